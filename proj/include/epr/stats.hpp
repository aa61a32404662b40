#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace epr {

// Two-sided 95% normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double rate = 0.0;
  double lo = 0.0;
  double hi = 1.0;
};

// Wilson score interval for a binomial proportion. Always contains the
// point estimate; degenerate n = 0 yields the vacuous [0, 1].
inline Interval wilson_interval(std::size_t successes, std::size_t trials,
                                double z = kZ95) {
  if (trials == 0) return {};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {p, std::max(0.0, center - half), std::min(1.0, center + half)};
}

// Standard deviation of a frequency estimate of a Bernoulli(p) mean.
inline double binomial_sigma(double p, std::size_t n) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

// Empirical mutual information in bits between two binary variables,
// from 2x2 joint counts. Empty cells contribute zero.
inline double mutual_information_bits(const std::array<std::array<std::size_t, 2>, 2>& joint) {
  const double n = static_cast<double>(joint[0][0] + joint[0][1] + joint[1][0] + joint[1][1]);
  if (n == 0.0) return 0.0;
  const double px[2] = {(joint[0][0] + joint[0][1]) / n, (joint[1][0] + joint[1][1]) / n};
  const double py[2] = {(joint[0][0] + joint[1][0]) / n, (joint[0][1] + joint[1][1]) / n};
  double mi = 0.0;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      if (joint[x][y] == 0) continue;
      const double pxy = joint[x][y] / n;
      mi += pxy * std::log2(pxy / (px[x] * py[y]));
    }
  }
  return mi;
}

}  // namespace epr
