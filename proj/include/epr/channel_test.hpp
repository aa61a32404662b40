#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "epr/pairs.hpp"
#include "epr/stats.hpp"

namespace epr {

// One sacrificial comparison: both parties measure halves of the same
// pair in independently random bases and publish basis and outcome.
// Rounds with unequal bases are discarded but stay in the log.
struct CheckRound {
  std::size_t pair_index = 0;
  Basis basis_a = Basis::Z;
  Basis basis_b = Basis::Z;
  int outcome_a = 0;
  int outcome_b = 0;
  bool kept = false;      // bases agreed, outcomes comparable
  bool mismatch = false;  // kept and outcomes differ
};

inline CheckRound make_check_round(std::size_t pair_index, Basis basis_a, int outcome_a,
                                   Basis basis_b, int outcome_b) {
  CheckRound r{pair_index, basis_a, basis_b, outcome_a, outcome_b, false, false};
  r.kept = basis_a == basis_b;
  r.mismatch = r.kept && outcome_a != outcome_b;
  return r;
}

enum class Verdict { Pass, Abort };

inline const char* to_string(Verdict v) { return v == Verdict::Pass ? "pass" : "abort"; }

inline Verdict verdict_from_string(std::string_view s) {
  if (s == "pass") return Verdict::Pass;
  if (s == "abort") return Verdict::Abort;
  throw std::invalid_argument("unknown verdict: " + std::string(s));
}

struct TestVerdict {
  Verdict verdict = Verdict::Pass;
  std::vector<CheckRound> rounds;
  std::size_t kept_count = 0;
  std::size_t mismatch_count = 0;
};

inline void tally_round(TestVerdict& tv, const CheckRound& r) {
  tv.kept_count += r.kept;
  tv.mismatch_count += r.mismatch;
  tv.rounds.push_back(r);
  if (tv.mismatch_count >= 1) tv.verdict = Verdict::Abort;
}

// Channel verification over the batch's check pairs. Alice measures her
// half first, Bob his, each in a fresh uniform basis from their own
// streams; a single kept-round mismatch aborts.
inline TestVerdict run_channel_test(PairBatch& batch, std::size_t n_check,
                                    SessionStreams& streams) {
  const auto& checks = batch.check_indices();
  if (checks.size() < n_check)
    throw std::invalid_argument("run_channel_test: insufficient check pairs");
  TestVerdict tv;
  for (std::size_t r = 0; r < n_check; ++r) {
    const std::size_t p = checks[r];
    const Basis basis_a = random_basis(streams.alice);
    const int a = batch.measure_qubit(p, 'A', basis_a, streams.source);
    const Basis basis_b = random_basis(streams.bob);
    const int b = batch.measure_qubit(p, 'B', basis_b, streams.source);
    tally_round(tv, make_check_round(p, basis_a, a, basis_b, b));
  }
  return tv;
}

// Detection statistics for an attack, per compared round count.
struct DetectionStats {
  std::string attack;
  std::size_t n_check = 0;  // kept (same-basis) rounds compared per trial
  std::size_t trials = 0;
  std::size_t detected = 0;      // trials ending in Abort
  double rate = 0.0;             // detected / trials
  double ci_low = 0.0;           // Wilson 95%
  double ci_high = 1.0;
  double per_round_rate = 0.0;   // mismatches pooled over all kept rounds
  std::size_t kept_rounds = 0;   // pooled kept rounds over all trials
};

namespace detail {

struct DetectionTally {
  std::size_t detected = 0;
  std::size_t kept = 0;
  std::size_t mismatches = 0;
};

// One verification trial: fresh pairs from the attack source until
// n_kept rounds were comparable. Discarded rounds cost a pair but carry
// no information.
inline bool detection_trial(const AttackModel& attack, std::size_t n_kept,
                            std::uint64_t seed, DetectionTally& tally) {
  SessionStreams streams(seed);
  std::size_t kept = 0;
  std::size_t mismatches = 0;
  for (std::size_t pair = 0; kept < n_kept; ++pair) {
    RandomStream pair_rng = streams.eve.fork(pair);
    EmittedPair emitted = emit_pair(attack, pair_rng);
    const Basis basis_a = random_basis(streams.alice);
    RandomStream draw_a = streams.source.fork(PairBatch::collapse_slot(pair, 0));
    MeasureResult a = measure(emitted.state, 'A', basis_a, draw_a);
    const Basis basis_b = random_basis(streams.bob);
    RandomStream draw_b = streams.source.fork(PairBatch::collapse_slot(pair, 1));
    MeasureResult b = measure(a.state, 'B', basis_b, draw_b);
    if (basis_a != basis_b) continue;
    ++kept;
    mismatches += a.bit != b.bit;
  }
  tally.kept += kept;
  tally.mismatches += mismatches;
  tally.detected += mismatches >= 1;
  return mismatches >= 1;
}

}  // namespace detail

// Monte-Carlo detection estimate: `trials` independent verification
// trials, each comparing exactly n_kept same-basis rounds. Trials are
// independent seed slices, so splitting them over workers changes
// nothing but wall time.
inline DetectionStats estimate_detection(const AttackModel& attack, std::size_t n_kept,
                                         std::size_t trials, std::uint64_t seed,
                                         std::size_t jobs = 1) {
  if (trials < 1) throw std::invalid_argument("estimate_detection: trials must be >= 1");
  if (jobs < 1) jobs = 1;
  jobs = std::min(jobs, trials);

  std::vector<detail::DetectionTally> tallies(jobs);
  auto worker = [&](std::size_t w) {
    for (std::size_t t = w; t < trials; t += jobs)
      detail::detection_trial(attack, n_kept, derive_seed(seed, t), tallies[w]);
  };
  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }

  detail::DetectionTally total;
  for (const auto& t : tallies) {
    total.detected += t.detected;
    total.kept += t.kept;
    total.mismatches += t.mismatches;
  }

  DetectionStats stats;
  stats.attack = attack.name();
  stats.n_check = n_kept;
  stats.trials = trials;
  stats.detected = total.detected;
  const Interval ci = wilson_interval(total.detected, trials);
  stats.rate = ci.rate;
  stats.ci_low = ci.lo;
  stats.ci_high = ci.hi;
  stats.kept_rounds = total.kept;
  stats.per_round_rate =
      total.kept == 0 ? 0.0
                      : static_cast<double>(total.mismatches) / static_cast<double>(total.kept);
  return stats;
}

}  // namespace epr
