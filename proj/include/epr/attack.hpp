#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "epr/bits.hpp"
#include "epr/state.hpp"

namespace epr {

enum class AttackKind { Honest, GhzProbe, InterceptResend };

// Basis Eve uses when she measures the transmitted qubit in transit.
enum class TapBasisPolicy { RandomZX, FixedZ, FixedX };

// A channel source plus optional eavesdropper strategy.
struct AttackModel {
  AttackKind kind = AttackKind::Honest;
  TapBasisPolicy tap_policy = TapBasisPolicy::RandomZX;  // intercept-resend only

  static AttackModel honest() { return {AttackKind::Honest}; }
  static AttackModel ghz_probe() { return {AttackKind::GhzProbe}; }
  static AttackModel intercept_resend(TapBasisPolicy policy = TapBasisPolicy::RandomZX) {
    return {AttackKind::InterceptResend, policy};
  }

  bool has_eve() const { return kind != AttackKind::Honest; }

  std::string name() const {
    switch (kind) {
      case AttackKind::Honest: return "honest";
      case AttackKind::GhzProbe: return "ghz-probe";
      case AttackKind::InterceptResend:
        switch (tap_policy) {
          case TapBasisPolicy::RandomZX: return "intercept-resend:random";
          case TapBasisPolicy::FixedZ: return "intercept-resend:z";
          case TapBasisPolicy::FixedX: return "intercept-resend:x";
        }
    }
    return "honest";
  }

  // "honest" | "ghz-probe" | "intercept-resend[:z|x|random]"
  static AttackModel parse(std::string_view text) {
    if (text == "honest") return honest();
    if (text == "ghz-probe") return ghz_probe();
    if (text == "intercept-resend" || text == "intercept-resend:random")
      return intercept_resend(TapBasisPolicy::RandomZX);
    if (text == "intercept-resend:z") return intercept_resend(TapBasisPolicy::FixedZ);
    if (text == "intercept-resend:x") return intercept_resend(TapBasisPolicy::FixedX);
    throw std::invalid_argument("unknown attack: " + std::string(text));
  }

  bool operator==(const AttackModel& o) const {
    return kind == o.kind &&
           (kind != AttackKind::InterceptResend || tap_policy == o.tap_policy);
  }
};

// One qubit observation Eve made: the basis she used and what she saw.
struct EveObservation {
  Basis basis = Basis::Z;
  int outcome = 0;
};

// Eve's accumulated view of one session.
struct EveRecord {
  std::vector<EveObservation> taps;  // one per message pair, in pair order
  BitString guess;                   // filled once the announcement is public
  double correct_fraction = 0.0;     // analysis field, needs the true message
};

struct EmittedPair {
  StateVector state;
  std::optional<EveObservation> tap;  // intercept-resend transit measurement
};

// One channel use.
//   Honest:          the exact Bell pair, Eve holds nothing.
//   GhzProbe:        a probe qubit E is entangled into the pair with a
//                    CNOT from B, yielding (|000>+|111|)/sqrt2.
//   InterceptResend: Eve measures B in transit under her basis policy
//                    and forwards the post-measurement eigenstate.
// The stream is Eve's own randomness; honest emission consumes none.
inline EmittedPair emit_pair(const AttackModel& model, RandomStream& eve_rng) {
  switch (model.kind) {
    case AttackKind::Honest:
      return {make_bell_pair(), std::nullopt};
    case AttackKind::GhzProbe: {
      StateVector coupled = make_bell_pair().tensor(StateVector::basis_state({'E'}, 0));
      return {apply_cnot(coupled, 'B', 'E'), std::nullopt};
    }
    case AttackKind::InterceptResend: {
      Basis basis = Basis::Z;
      switch (model.tap_policy) {
        case TapBasisPolicy::RandomZX: basis = random_basis(eve_rng); break;
        case TapBasisPolicy::FixedZ: basis = Basis::Z; break;
        case TapBasisPolicy::FixedX: basis = Basis::X; break;
      }
      MeasureResult tapped = measure(make_bell_pair(), 'B', basis, eve_rng);
      return {std::move(tapped.state), EveObservation{basis, tapped.bit}};
    }
  }
  throw std::logic_error("emit_pair: unreachable");
}

// Eve's message estimate from the public announcement: she applies the
// receiver's own decode rule to her recorded outcomes.
inline BitString eve_decode(const AttackModel& model, const EveRecord& record,
                            const BitString& announcement) {
  if (!model.has_eve())
    throw std::invalid_argument("eve_decode: honest channel leaves Eve no record");
  if (record.taps.size() != announcement.size())
    throw std::invalid_argument("eve_decode: record/announcement length mismatch");
  BitString guess;
  for (std::size_t i = 0; i < announcement.size(); ++i)
    guess.push_back(announcement[i] ^ record.taps[i].outcome);
  return guess;
}

}  // namespace epr
