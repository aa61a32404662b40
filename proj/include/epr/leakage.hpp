#pragma once

#include <array>
#include <span>
#include <stdexcept>

#include "epr/protocol.hpp"
#include "epr/stats.hpp"

namespace epr {

// Pooled per-bit statistics over sessions sharing one verdict.
struct LeakageSlice {
  std::size_t sessions = 0;
  std::size_t message_bits = 0;
  double eve_correct_fraction = 0.0;
  double eve_mi_bits = 0.0;  // empirical I(guess; message) per bit
  double bob_bit_error_rate = 0.0;
};

struct LeakageStats {
  LeakageSlice pass;
  LeakageSlice abort;
};

namespace detail {

struct LeakagePool {
  std::size_t sessions = 0;
  std::size_t message_bits = 0;
  std::size_t bob_bits = 0;
  std::size_t bob_errors = 0;
  std::size_t eve_bits = 0;
  std::size_t eve_correct = 0;
  std::array<std::array<std::size_t, 2>, 2> joint{};  // [message][guess]

  LeakageSlice slice() const {
    LeakageSlice s;
    s.sessions = sessions;
    s.message_bits = message_bits;
    s.bob_bit_error_rate =
        bob_bits == 0 ? 0.0 : static_cast<double>(bob_errors) / static_cast<double>(bob_bits);
    s.eve_correct_fraction =
        eve_bits == 0 ? 0.0 : static_cast<double>(eve_correct) / static_cast<double>(eve_bits);
    s.eve_mi_bits = mutual_information_bits(joint);
    return s;
  }
};

inline void pool_transcript(LeakagePool& pool, const Transcript& t) {
  pool.sessions += 1;
  pool.message_bits += t.message.size();
  if (t.decoded.size() == t.message.size()) {
    pool.bob_bits += t.message.size();
    pool.bob_errors += t.decoded.empty() ? 0 : count_mismatches(t.message, t.decoded);
  }
  if (t.eve_guess && t.eve_guess->size() == t.message.size()) {
    pool.eve_bits += t.message.size();
    for (std::size_t i = 0; i < t.message.size(); ++i) {
      pool.eve_correct += (*t.eve_guess)[i] == t.message[i];
      pool.joint[static_cast<std::size_t>(t.message[i])]
                [static_cast<std::size_t>((*t.eve_guess)[i])] += 1;
    }
  }
}

}  // namespace detail

// What Eve learned and what Bob got wrong, split by verdict.
inline LeakageStats leakage_report(const AttackModel& model,
                                   std::span<const Transcript> sessions) {
  if (sessions.empty())
    throw std::invalid_argument("leakage_report: at least one session required");
  detail::LeakagePool pass, abort;
  for (const Transcript& t : sessions) {
    if (!(t.attack == model))
      throw std::invalid_argument("leakage_report: transcript attack mismatch: " +
                                  t.attack.name() + " vs " + model.name());
    detail::pool_transcript(t.verdict == Verdict::Pass ? pass : abort, t);
  }
  return {pass.slice(), abort.slice()};
}

}  // namespace epr
