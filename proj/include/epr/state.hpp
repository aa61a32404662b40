#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "epr/rng.hpp"

namespace epr {

using Amplitude = std::complex<double>;

inline constexpr int kMaxQubits = 4;
inline constexpr double kNormTolerance = 1e-9;
inline constexpr double kInvSqrt2 = 0.70710678118654752440;

// Measurement bases. Outcome 0 maps to the first vector of each basis:
//   Z: {|0>, |1>}      X: {(|0>+|1>)/sqrt2, (|0>-|1>)/sqrt2}
enum class Basis { Z, X };

inline const char* to_string(Basis b) { return b == Basis::Z ? "Z" : "X"; }

inline Basis basis_from_string(std::string_view s) {
  if (s == "Z" || s == "z") return Basis::Z;
  if (s == "X" || s == "x") return Basis::X;
  throw std::invalid_argument("unknown basis: " + std::string(s));
}

inline Basis random_basis(RandomStream& rng) {
  return rng.next_bit() ? Basis::X : Basis::Z;
}

// Pure state over 1..4 labeled qubits.
//
// Index convention: the label at position 0 is the most significant bit
// of a basis-state index, so with labels (A, B) the amplitude amps[0b10]
// belongs to |1>_A |0>_B. Stored states are always normalized within
// kNormTolerance and finite.
class StateVector {
 public:
  StateVector(std::vector<char> labels, std::vector<Amplitude> amps)
      : labels_(std::move(labels)), amps_(std::move(amps)) {
    if (labels_.empty() || labels_.size() > static_cast<std::size_t>(kMaxQubits))
      throw std::invalid_argument("StateVector: 1..4 qubits supported");
    for (std::size_t i = 0; i < labels_.size(); ++i)
      for (std::size_t j = i + 1; j < labels_.size(); ++j)
        if (labels_[i] == labels_[j])
          throw std::invalid_argument("StateVector: duplicate qubit label");
    if (amps_.size() != (std::size_t{1} << labels_.size()))
      throw std::invalid_argument("StateVector: amplitude count must be 2^n");
    double n2 = 0.0;
    for (const auto& a : amps_) {
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
        throw std::invalid_argument("StateVector: non-finite amplitude");
      n2 += std::norm(a);
    }
    if (std::abs(n2 - 1.0) > kNormTolerance)
      throw std::invalid_argument("StateVector: not normalized");
  }

  static StateVector basis_state(std::vector<char> labels, std::size_t index) {
    std::vector<Amplitude> amps(std::size_t{1} << labels.size(), Amplitude{0.0, 0.0});
    amps.at(index) = Amplitude{1.0, 0.0};
    return StateVector(std::move(labels), std::move(amps));
  }

  int num_qubits() const { return static_cast<int>(labels_.size()); }
  std::size_t dim() const { return amps_.size(); }
  const std::vector<char>& labels() const { return labels_; }
  std::span<const Amplitude> amplitudes() const { return amps_; }

  bool has_label(char label) const {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
  }

  int position(char label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end())
      throw std::invalid_argument(std::string("unknown qubit label: ") + label);
    return static_cast<int>(it - labels_.begin());
  }

  double norm_sq() const {
    double n2 = 0.0;
    for (const auto& a : amps_) n2 += std::norm(a);
    return n2;
  }

  // Kronecker product; this state's labels keep the high index bits.
  StateVector tensor(const StateVector& other) const {
    std::vector<char> labels = labels_;
    labels.insert(labels.end(), other.labels_.begin(), other.labels_.end());
    std::vector<Amplitude> amps;
    amps.reserve(dim() * other.dim());
    for (const auto& a : amps_)
      for (const auto& b : other.amps_) amps.push_back(a * b);
    return StateVector(std::move(labels), std::move(amps));
  }

  friend bool approx_equal(const StateVector& a, const StateVector& b, double tol) {
    if (a.labels_ != b.labels_) return false;
    for (std::size_t k = 0; k < a.amps_.size(); ++k)
      if (std::abs(a.amps_[k] - b.amps_[k]) > tol) return false;
    return true;
  }

 private:
  std::vector<char> labels_;
  std::vector<Amplitude> amps_;
};

// (|00> + |11>)/sqrt2 on labels (A, B): the honest channel state.
inline StateVector make_bell_pair() {
  return StateVector({'A', 'B'},
                     {Amplitude{kInvSqrt2, 0.0}, {}, {}, Amplitude{kInvSqrt2, 0.0}});
}

// (|000> + |111>)/sqrt2 on labels (A, B, E): the channel after an
// eavesdropper entangles a probe qubit with the pair.
inline StateVector make_ghz_probe() {
  std::vector<Amplitude> amps(8, Amplitude{0.0, 0.0});
  amps[0] = amps[7] = Amplitude{kInvSqrt2, 0.0};
  return StateVector({'A', 'B', 'E'}, std::move(amps));
}

namespace detail {

// Index mask selecting the given label position (position 0 = MSB).
inline std::size_t bit_mask(const StateVector& s, char label) {
  return s.dim() >> (s.position(label) + 1);
}

}  // namespace detail

inline StateVector apply_hadamard(const StateVector& state, char qubit) {
  const std::size_t mask = detail::bit_mask(state, qubit);
  auto in = state.amplitudes();
  std::vector<Amplitude> out(state.dim());
  for (std::size_t k = 0; k < state.dim(); ++k) {
    if (k & mask) continue;
    out[k] = (in[k] + in[k | mask]) * kInvSqrt2;
    out[k | mask] = (in[k] - in[k | mask]) * kInvSqrt2;
  }
  return StateVector(state.labels(), std::move(out));
}

inline StateVector apply_cnot(const StateVector& state, char control, char target) {
  if (control == target)
    throw std::invalid_argument("apply_cnot: control and target must differ");
  const std::size_t cmask = detail::bit_mask(state, control);
  const std::size_t tmask = detail::bit_mask(state, target);
  std::vector<Amplitude> out(state.amplitudes().begin(), state.amplitudes().end());
  for (std::size_t k = 0; k < state.dim(); ++k)
    if ((k & cmask) && !(k & tmask)) std::swap(out[k], out[k | tmask]);
  return StateVector(state.labels(), std::move(out));
}

// Probability that measuring `qubit` in `basis` yields `bit`, from the
// squared norm of the basis projection.
inline double outcome_probability(const StateVector& state, char qubit, Basis basis,
                                  int bit) {
  if (basis == Basis::X)
    return outcome_probability(apply_hadamard(state, qubit), qubit, Basis::Z, bit);
  const std::size_t mask = detail::bit_mask(state, qubit);
  double p = 0.0;
  for (std::size_t k = 0; k < state.dim(); ++k)
    if (((k & mask) != 0) == (bit == 1)) p += std::norm(state.amplitudes()[k]);
  return p;
}

struct MeasureResult {
  int bit;
  StateVector state;  // normalized post-measurement state
};

// Projective measurement with collapse. Consumes exactly one draw from
// the stream; an eigenstate of the measured basis collapses to a fixed
// outcome no matter the draw value. X measurement is the H-conjugated Z
// measurement.
inline MeasureResult measure(const StateVector& state, char qubit, Basis basis,
                             RandomStream& rng) {
  if (basis == Basis::X) {
    MeasureResult z = measure(apply_hadamard(state, qubit), qubit, Basis::Z, rng);
    return {z.bit, apply_hadamard(z.state, qubit)};
  }
  if (std::abs(state.norm_sq() - 1.0) > kNormTolerance)
    throw std::invalid_argument("measure: state norm out of tolerance");
  const std::size_t mask = detail::bit_mask(state, qubit);
  double p0 = 0.0;
  for (std::size_t k = 0; k < state.dim(); ++k)
    if (!(k & mask)) p0 += std::norm(state.amplitudes()[k]);
  const int bit = rng.next_double() < p0 ? 0 : 1;

  std::vector<Amplitude> post(state.dim(), Amplitude{0.0, 0.0});
  double kept = 0.0;
  for (std::size_t k = 0; k < state.dim(); ++k) {
    if (((k & mask) != 0) != (bit == 1)) continue;
    post[k] = state.amplitudes()[k];
    kept += std::norm(post[k]);
  }
  const double scale = 1.0 / std::sqrt(kept);
  for (auto& a : post) a *= scale;
  return {bit, StateVector(state.labels(), std::move(post))};
}

}  // namespace epr
