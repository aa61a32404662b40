#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "epr/attack.hpp"
#include "epr/bits.hpp"
#include "epr/channel_test.hpp"
#include "epr/pairs.hpp"

namespace epr {

// Classical cost of the Bell-measurement relay alternative, reported for
// comparison and never simulated: two announced bits per secret bit.
inline constexpr double kTeleportationBitsPerSecretBit = 2.0;

// Alice's announcement: 0 where her outcome already equals the message
// bit, 1 where it differs. Same truth table as XOR.
inline BitString alice_encode(const BitString& message, const BitString& outcomes_a) {
  if (message.size() != outcomes_a.size())
    throw std::invalid_argument("alice_encode: message/outcome length mismatch");
  return message ^ outcomes_a;
}

// Bob's inference: flip each announced bit by his own outcome.
inline BitString bob_decode(const BitString& announcement, const BitString& outcomes_b) {
  if (announcement.size() != outcomes_b.size())
    throw std::invalid_argument("bob_decode: announcement/outcome length mismatch");
  return announcement ^ outcomes_b;
}

// Check-pair budget when the caller does not size the test: enough that
// a probe surviving all comparisons is already a ~10% tail event.
inline std::size_t default_check_count(std::size_t message_length) {
  return std::max<std::size_t>(16, message_length);
}

struct SessionConfig {
  BitString message;
  std::size_t n_check = 16;
  AttackModel attack;
  std::uint64_t seed = 0;
};

// Full record of one session.
struct Transcript {
  std::uint64_t seed = 0;
  AttackModel attack;
  std::size_t n_check = 0;
  Verdict verdict = Verdict::Abort;
  BitString message;
  BitString outcomes_a;
  BitString outcomes_b;
  BitString announcement;
  BitString decoded;
  std::size_t classical_bits = 0;  // message-phase announcement payload bits
  std::optional<BitString> eve_guess;
  std::vector<CheckRound> rounds;
  std::optional<EveRecord> eve;
};

// One in-process session: distribute pairs, verify the channel, then on
// Pass run the message phase (Alice Z-measures and announces, Bob
// Z-measures and decodes, Eve reads the announcement). An Abort verdict
// ends the session before anything is announced.
inline Transcript run_session(const SessionConfig& config) {
  SessionStreams streams(config.seed);
  Transcript t;
  t.seed = config.seed;
  t.attack = config.attack;
  t.n_check = config.n_check;
  t.message = config.message;

  const std::size_t total = config.n_check + config.message.size();
  PairBatch batch = PairBatch::distribute(config.attack, total, streams);
  batch.assign_check_pairs(config.n_check, streams.alice);

  TestVerdict tv = run_channel_test(batch, config.n_check, streams);
  t.verdict = tv.verdict;
  t.rounds = std::move(tv.rounds);
  if (t.verdict == Verdict::Abort) return t;

  const std::vector<std::size_t> message_pairs = batch.message_indices();
  for (std::size_t p : message_pairs)
    t.outcomes_a.push_back(batch.measure_qubit(p, 'A', Basis::Z, streams.source));
  t.announcement = alice_encode(config.message, t.outcomes_a);
  t.classical_bits = t.announcement.size();

  for (std::size_t p : message_pairs)
    t.outcomes_b.push_back(batch.measure_qubit(p, 'B', Basis::Z, streams.source));
  t.decoded = bob_decode(t.announcement, t.outcomes_b);

  if (config.attack.has_eve()) {
    EveRecord record;
    record.taps.reserve(message_pairs.size());
    for (std::size_t p : message_pairs) {
      if (config.attack.kind == AttackKind::GhzProbe) {
        record.taps.push_back(
            {Basis::Z, batch.measure_qubit(p, 'E', Basis::Z, streams.source)});
      } else {
        record.taps.push_back(batch.at(p).tap.value());
      }
    }
    record.guess = eve_decode(config.attack, record, t.announcement);
    record.correct_fraction =
        t.message.empty()
            ? 0.0
            : 1.0 - static_cast<double>(count_mismatches(record.guess, t.message)) /
                        static_cast<double>(t.message.size());
    t.eve_guess = record.guess;
    t.eve = std::move(record);
  }
  return t;
}

}  // namespace epr
