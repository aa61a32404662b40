#pragma once

#include <nlohmann/json.hpp>

#include "epr/channel_test.hpp"
#include "epr/leakage.hpp"
#include "epr/protocol.hpp"

namespace epr {

// One transcript per JSONL line. Field order is fixed so identical runs
// serialize byte-identically.
inline nlohmann::ordered_json to_json(const Transcript& t) {
  return nlohmann::ordered_json{
      {"seed", t.seed},
      {"attack", t.attack.name()},
      {"n_check", t.n_check},
      {"verdict", to_string(t.verdict)},
      {"message", t.message.str()},
      {"announcement", t.announcement.str()},
      {"decoded", t.decoded.str()},
      {"classical_bits", t.classical_bits},
      {"eve_guess", t.eve_guess ? nlohmann::ordered_json(t.eve_guess->str())
                                : nlohmann::ordered_json(nullptr)},
  };
}

// Schema-field subset of a transcript, as read back for aggregation.
inline Transcript transcript_from_json(const nlohmann::json& j) {
  Transcript t;
  t.seed = j.at("seed").get<std::uint64_t>();
  t.attack = AttackModel::parse(j.at("attack").get<std::string>());
  t.n_check = j.at("n_check").get<std::size_t>();
  t.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  t.message = BitString::parse(j.at("message").get<std::string>());
  t.announcement = BitString::parse(j.at("announcement").get<std::string>());
  t.decoded = BitString::parse(j.at("decoded").get<std::string>());
  t.classical_bits = j.at("classical_bits").get<std::size_t>();
  const auto& guess = j.at("eve_guess");
  if (!guess.is_null()) t.eve_guess = BitString::parse(guess.get<std::string>());
  return t;
}

inline nlohmann::ordered_json to_json(const DetectionStats& s) {
  return nlohmann::ordered_json{
      {"attack", s.attack},
      {"n_check", s.n_check},
      {"trials", s.trials},
      {"detected", s.detected},
      {"rate", s.rate},
      {"ci_low", s.ci_low},
      {"ci_high", s.ci_high},
      {"per_round_rate", s.per_round_rate},
      {"kept_rounds", s.kept_rounds},
  };
}

inline nlohmann::ordered_json to_json(const LeakageSlice& s) {
  return nlohmann::ordered_json{
      {"sessions", s.sessions},
      {"message_bits", s.message_bits},
      {"eve_correct_fraction", s.eve_correct_fraction},
      {"eve_mi_bits", s.eve_mi_bits},
      {"bob_bit_error_rate", s.bob_bit_error_rate},
  };
}

}  // namespace epr
