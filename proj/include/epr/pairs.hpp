#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "epr/attack.hpp"

namespace epr {

// All role streams of one session, derived from the session seed.
struct SessionStreams {
  RandomStream source;
  RandomStream alice;
  RandomStream bob;
  RandomStream eve;

  explicit SessionStreams(std::uint64_t seed)
      : source(seed, StreamRole::Source),
        alice(seed, StreamRole::Alice),
        bob(seed, StreamRole::Bob),
        eve(seed, StreamRole::Eve) {}
};

// Alice's sacrificial-pair selection: n_check distinct indices drawn
// from [0, total), announced to Bob, ascending for round order.
inline std::vector<std::size_t> pick_check_indices(std::size_t total, std::size_t n_check,
                                                   RandomStream& alice) {
  if (n_check > total)
    throw std::invalid_argument("pick_check_indices: more check pairs than pairs");
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < n_check; ++i)
    std::swap(idx[i], idx[i + alice.next_below(total - i)]);
  idx.resize(n_check);
  std::sort(idx.begin(), idx.end());
  return idx;
}

enum class PairRole { Check, Message };

struct PairInstance {
  StateVector state;
  PairRole role = PairRole::Message;
  std::array<bool, kMaxQubits> measured{};  // indexed by label position
  std::optional<EveObservation> tap;        // intercept-resend transit record
};

// Ordered entangled-pair instances for one session. Each qubit may be
// measured once. The collapse draw for (pair, label) is a dedicated
// child of the source stream, so an outcome never depends on how many
// draws other measurements consumed — only on the physical state at
// measurement time.
class PairBatch {
 public:
  static PairBatch distribute(const AttackModel& attack, std::size_t count,
                              SessionStreams& streams) {
    PairBatch batch;
    batch.attack_ = attack;
    batch.pairs_.reserve(count);
    for (std::size_t p = 0; p < count; ++p) {
      RandomStream pair_rng = streams.eve.fork(p);
      EmittedPair emitted = emit_pair(attack, pair_rng);
      batch.pairs_.push_back({std::move(emitted.state), PairRole::Message, {}, emitted.tap});
    }
    return batch;
  }

  void assign_check_pairs(std::size_t n_check, RandomStream& alice) {
    check_indices_ = pick_check_indices(pairs_.size(), n_check, alice);
    for (std::size_t p : check_indices_) pairs_[p].role = PairRole::Check;
  }

  std::size_t size() const { return pairs_.size(); }
  const AttackModel& attack() const { return attack_; }
  const std::vector<std::size_t>& check_indices() const { return check_indices_; }
  const PairInstance& at(std::size_t i) const { return pairs_.at(i); }

  std::vector<std::size_t> message_indices() const {
    std::vector<std::size_t> out;
    out.reserve(pairs_.size() - check_indices_.size());
    for (std::size_t p = 0; p < pairs_.size(); ++p)
      if (pairs_[p].role == PairRole::Message) out.push_back(p);
    return out;
  }

  static std::uint64_t collapse_slot(std::size_t pair_index, int label_pos) {
    return static_cast<std::uint64_t>(pair_index) * kMaxQubits +
           static_cast<std::uint64_t>(label_pos);
  }

  // Measure one qubit of one pair; a qubit can be consumed only once.
  int measure_qubit(std::size_t pair_index, char label, Basis basis,
                    const RandomStream& source) {
    PairInstance& inst = pairs_.at(pair_index);
    const int pos = inst.state.position(label);
    if (inst.measured[static_cast<std::size_t>(pos)])
      throw std::logic_error("already-measured: pair " + std::to_string(pair_index) +
                             " label " + std::string(1, label));
    RandomStream draw = source.fork(collapse_slot(pair_index, pos));
    MeasureResult result = measure(inst.state, label, basis, draw);
    inst.state = std::move(result.state);
    inst.measured[static_cast<std::size_t>(pos)] = true;
    return result.bit;
  }

 private:
  AttackModel attack_;
  std::vector<PairInstance> pairs_;
  std::vector<std::size_t> check_indices_;
};

}  // namespace epr
