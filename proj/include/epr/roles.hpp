#pragma once

#include <cstdio>
#include <set>
#include <string>
#include <utility>

#include "epr/broker.hpp"
#include "epr/net.hpp"
#include "epr/protocol.hpp"

namespace epr::wire {

struct RoleConfig {
  net::Endpoint broker;
  std::string session = "session-0";
  BitString message;        // alice only
  std::size_t n_check = 16;
  std::uint64_t seed = 1;
  AttackModel attack_label;  // transcript labeling only; the channel is the broker's
  std::chrono::milliseconds frame_timeout{10000};
};

namespace detail {

class RoleClient {
 public:
  RoleClient(const RoleConfig& cfg, const char* role)
      : sock_(net::connect_to(cfg.broker)), session_(cfg.session) {
    sock_.set_recv_timeout(cfg.frame_timeout);
    send(FrameType::Hello, {{"role", role}, {"seed", cfg.seed}});
  }

  void send(FrameType type, nlohmann::json body) {
    sock_.send_frame(type, session_, std::move(body));
  }

  Frame expect(FrameType type) {
    Frame f = sock_.recv_frame();
    if (f.type == FrameType::Error)
      throw ProtocolError("peer error: " + body_str(f, "reason"));
    if (f.session != session_)
      throw ProtocolError("protocol-violation: frame for session '" + f.session + "'");
    if (f.type != type)
      throw ProtocolError(std::string("protocol-violation: expected ") + to_string(type) +
                          ", got " + to_string(f.type));
    return f;
  }

  Frame next() {
    Frame f = sock_.recv_frame();
    if (f.type == FrameType::Error)
      throw ProtocolError("peer error: " + body_str(f, "reason"));
    if (f.session != session_)
      throw ProtocolError("protocol-violation: frame for session '" + f.session + "'");
    return f;
  }

  int measure(std::uint64_t pair, const char* label, Basis basis) {
    send(FrameType::MeasureReq,
         {{"pair", pair}, {"label", label}, {"basis", to_string(basis)}});
    Frame resp = expect(FrameType::MeasureResp);
    if (body_u64(resp, "pair") != pair || body_str(resp, "label") != label)
      throw ProtocolError("protocol-violation: MEASURE_RESP for wrong qubit");
    const std::uint64_t bit = body_u64(resp, "bit");
    if (bit > 1) throw ProtocolError("protocol-violation: MEASURE_RESP bit out of range");
    return static_cast<int>(bit);
  }

  void report_violation(const std::string& reason) {
    try {
      send(FrameType::Error, {{"reason", reason}});
    } catch (const TransportError&) {
    }
    throw ProtocolError(reason);
  }

 private:
  net::FrameSocket sock_;
  std::string session_;
};

inline void log_abort(const char* role, const RoleConfig& cfg, const char* why) {
  std::fprintf(stderr, "[%s] session %s aborted: %s\n", role, cfg.session.c_str(), why);
}

}  // namespace detail

// Sender state machine. Drives pair allocation, the per-round check
// ladder, the verdict, and — only on Pass — the announcement. The
// returned transcript gains `decoded` from Bob's closing receipt.
inline Transcript run_alice(const RoleConfig& cfg) {
  detail::RoleClient client(cfg, "alice");

  Transcript t;
  t.seed = cfg.seed;
  t.attack = cfg.attack_label;
  t.n_check = cfg.n_check;
  t.message = cfg.message;
  t.verdict = Verdict::Abort;

  const std::size_t total = cfg.n_check + cfg.message.size();
  bool announced = false;
  try {
    client.send(FrameType::PairsReady, {{"count", total}, {"n_check", cfg.n_check}});
    client.expect(FrameType::PairsReady);

    RandomStream alice(cfg.seed, StreamRole::Alice);
    const std::vector<std::size_t> checks = pick_check_indices(total, cfg.n_check, alice);

    TestVerdict tv;
    for (std::size_t r = 0; r < checks.size(); ++r) {
      const std::size_t p = checks[r];
      const Basis basis_a = random_basis(alice);
      const int bit_a = client.measure(p, "A", basis_a);
      client.send(FrameType::CheckBasis,
                  {{"round", r}, {"pair", p}, {"basis", to_string(basis_a)}});
      Frame fb = client.expect(FrameType::CheckBasis);
      if (body_u64(fb, "round") != r)
        client.report_violation("protocol-violation: check round out of step");
      const Basis basis_b = basis_from_string(body_str(fb, "basis"));
      client.send(FrameType::CheckOutcome, {{"round", r}, {"bit", bit_a}});
      Frame fo = client.expect(FrameType::CheckOutcome);
      if (body_u64(fo, "round") != r)
        client.report_violation("protocol-violation: check round out of step");
      const int bit_b = static_cast<int>(body_u64(fo, "bit"));
      tally_round(tv, make_check_round(p, basis_a, bit_a, basis_b, bit_b));
    }
    t.rounds = tv.rounds;
    t.verdict = tv.verdict;
    client.send(FrameType::Verdict, {{"verdict", to_string(tv.verdict)},
                                     {"kept", tv.kept_count},
                                     {"mismatches", tv.mismatch_count}});
    if (tv.verdict == Verdict::Abort) {
      client.send(FrameType::Bye, {});
      try {
        client.expect(FrameType::Bye);
      } catch (const TransportError&) {
      }
      return t;
    }

    for (std::size_t p = 0; p < total; ++p)
      if (!std::binary_search(checks.begin(), checks.end(), p))
        t.outcomes_a.push_back(client.measure(p, "A", Basis::Z));
    t.announcement = alice_encode(cfg.message, t.outcomes_a);
    t.classical_bits = t.announcement.size();
    client.send(FrameType::Announce, {{"bits", t.announcement.str()}});
    announced = true;

    Frame bye = client.expect(FrameType::Bye);
    t.decoded = BitString::parse(body_str(bye, "decoded"));
    client.send(FrameType::Bye, {});
  } catch (const TimeoutError& e) {
    if (announced) throw;
    detail::log_abort("alice", cfg, e.what());
    t.verdict = Verdict::Abort;
    t.announcement = BitString();
    t.classical_bits = 0;
  }
  return t;
}

// Receiver state machine. Reacts to relayed frames: measures his half
// of each check pair after Alice has committed hers, validates the
// verdict against his own tally, and refuses any announcement that
// arrives before a Pass verdict.
inline Transcript run_bob(const RoleConfig& cfg) {
  detail::RoleClient client(cfg, "bob");

  Transcript t;
  t.seed = cfg.seed;
  t.attack = cfg.attack_label;
  t.verdict = Verdict::Abort;

  bool decoded_done = false;
  try {
    Frame ready = client.expect(FrameType::PairsReady);
    const std::uint64_t total = body_u64(ready, "count");
    t.n_check = body_u64(ready, "n_check");

    RandomStream bob(cfg.seed, StreamRole::Bob);
    TestVerdict tv;
    std::set<std::uint64_t> check_pairs;
    bool pass_seen = false;

    for (;;) {
      Frame f = client.next();
      switch (f.type) {
        case FrameType::CheckBasis: {
          const std::uint64_t r = body_u64(f, "round");
          if (r != tv.rounds.size())
            client.report_violation("protocol-violation: check round out of step");
          const std::uint64_t pair = body_u64(f, "pair");
          const Basis basis_a = basis_from_string(body_str(f, "basis"));
          const Basis basis_b = random_basis(bob);
          const int bit_b = client.measure(pair, "B", basis_b);
          client.send(FrameType::CheckBasis, {{"round", r}, {"basis", to_string(basis_b)}});
          client.send(FrameType::CheckOutcome, {{"round", r}, {"bit", bit_b}});
          Frame fo = client.expect(FrameType::CheckOutcome);
          if (body_u64(fo, "round") != r)
            client.report_violation("protocol-violation: check round out of step");
          const int bit_a = static_cast<int>(body_u64(fo, "bit"));
          check_pairs.insert(pair);
          tally_round(tv, make_check_round(pair, basis_a, bit_a, basis_b, bit_b));
          break;
        }
        case FrameType::Verdict: {
          const Verdict announced_verdict = verdict_from_string(body_str(f, "verdict"));
          if (announced_verdict != tv.verdict)
            client.report_violation("protocol-violation: verdict does not match rounds");
          t.rounds = tv.rounds;
          t.verdict = tv.verdict;
          if (tv.verdict == Verdict::Abort) {
            client.send(FrameType::Bye, {});
            try {
              client.expect(FrameType::Bye);
            } catch (const TransportError&) {
            }
            return t;
          }
          pass_seen = true;
          break;
        }
        case FrameType::Announce: {
          if (!pass_seen)
            client.report_violation("protocol-violation: ANNOUNCE before VERDICT pass");
          t.announcement = BitString::parse(body_str(f, "bits"));
          std::vector<std::uint64_t> message_pairs;
          for (std::uint64_t p = 0; p < total; ++p)
            if (!check_pairs.contains(p)) message_pairs.push_back(p);
          if (message_pairs.size() != t.announcement.size())
            client.report_violation("protocol-violation: announcement length mismatch");
          for (std::uint64_t p : message_pairs)
            t.outcomes_b.push_back(client.measure(p, "B", Basis::Z));
          t.decoded = bob_decode(t.announcement, t.outcomes_b);
          t.classical_bits = t.announcement.size();
          decoded_done = true;
          client.send(FrameType::Bye, {{"decoded", t.decoded.str()}});
          try {
            client.expect(FrameType::Bye);
          } catch (const TransportError&) {
          }
          return t;
        }
        default:
          client.report_violation(std::string("protocol-violation: unexpected ") +
                                  to_string(f.type));
      }
    }
  } catch (const TimeoutError& e) {
    if (decoded_done) return t;
    detail::log_abort("bob", cfg, e.what());
    t.verdict = Verdict::Abort;
  }
  return t;
}

}  // namespace epr::wire
