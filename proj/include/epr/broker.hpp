#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "epr/net.hpp"
#include "epr/pairs.hpp"
#include "epr/protocol.hpp"

namespace epr::wire {

struct BrokerConfig {
  std::string listen_host = "127.0.0.1";
  std::uint16_t listen_port = 0;  // 0 picks an ephemeral port
  AttackModel attack;
  std::chrono::milliseconds frame_timeout{10000};
  std::size_t max_pairs_per_session = 1u << 16;
  bool log_to_stderr = false;
};

// Entanglement source and classical relay. The broker is the only
// process holding quantum state; clients see measurement outcomes and
// each other's relayed announcements, nothing more. Eve, when the
// configured channel has one, lives here and reads the relayed traffic.
class Broker {
 public:
  explicit Broker(BrokerConfig cfg)
      : cfg_(std::move(cfg)), listener_(cfg_.listen_host, cfg_.listen_port) {}

  ~Broker() {
    shutdown();
    if (accept_thread_.joinable()) accept_thread_.join();
  }

  std::uint16_t port() const { return listener_.port(); }
  net::Endpoint endpoint() const { return {cfg_.listen_host, listener_.port()}; }

  // Blocking accept loop; returns once shutdown() is called.
  void serve() {
    for (;;) {
      std::optional<net::FrameSocket> conn = listener_.accept();
      if (!conn || stopping_) break;
      conn->set_recv_timeout(cfg_.frame_timeout);
      std::lock_guard lock(conns_mu_);
      conns_.push_back(std::make_unique<net::FrameSocket>(std::move(*conn)));
      workers_.emplace_back(&Broker::handle_connection, this, conns_.back().get());
    }
    std::vector<std::thread> workers;
    {
      std::lock_guard lock(conns_mu_);
      workers.swap(workers_);
    }
    for (auto& w : workers) w.join();
  }

  void start() {
    accept_thread_ = std::thread([this] { serve(); });
  }

  void shutdown() {
    if (stopping_.exchange(true)) return;
    listener_.close();
    std::lock_guard lock(conns_mu_);
    for (auto& c : conns_) c->shutdown_both();
    std::lock_guard slock(sessions_mu_);
    for (auto& [id, s] : sessions_) s->cv.notify_all();
  }

  // Eve's message estimate for a completed session, when the configured
  // channel gave her anything to record.
  std::optional<BitString> eve_guess(const std::string& session) const {
    std::lock_guard lock(guesses_mu_);
    auto it = guesses_.find(session);
    if (it == guesses_.end()) return std::nullopt;
    return it->second;
  }

 private:
  static constexpr int kAlice = 0;
  static constexpr int kBob = 1;

  struct Session {
    std::mutex mu;
    std::condition_variable cv;
    std::uint64_t seed = 0;
    bool seeded = false;
    net::FrameSocket* peers[2] = {nullptr, nullptr};
    std::optional<SessionStreams> streams;
    std::optional<PairBatch> batch;
  };

  using SessionPtr = std::shared_ptr<Session>;

  SessionPtr session(const std::string& id) {
    std::lock_guard lock(sessions_mu_);
    auto& slot = sessions_[id];
    if (!slot) slot = std::make_shared<Session>();
    return slot;
  }

  void log(const std::string& line) const {
    if (cfg_.log_to_stderr) std::fprintf(stderr, "[broker] %s\n", line.c_str());
  }

  void handle_connection(net::FrameSocket* sock) {
    std::string session_id;
    int role = -1;
    try {
      for (;;) {
        Frame f = sock->recv_frame();
        dispatch(f, sock, session_id, role);
      }
    } catch (const TransportError&) {
      // peer hung up or idled out; nothing to answer
    } catch (const ProtocolError& e) {
      try {
        sock->send_frame(FrameType::Error, session_id, {{"reason", e.what()}});
      } catch (...) {
      }
      log("closing connection: " + std::string(e.what()));
    }
    sock->shutdown_both();
    if (role >= 0) unregister(session_id, role);
  }

  void dispatch(const Frame& f, net::FrameSocket* sock, std::string& session_id, int& role) {
    if (role < 0 && f.type != FrameType::Hello)
      throw ProtocolError("protocol-violation: first frame must be HELLO");

    switch (f.type) {
      case FrameType::Hello: {
        const std::string who = body_str(f, "role");
        const int r = who == "alice" ? kAlice : who == "bob" ? kBob : -1;
        if (r < 0) throw ProtocolError("protocol-violation: unknown role '" + who + "'");
        if (role >= 0) throw ProtocolError("protocol-violation: duplicate HELLO");
        SessionPtr s = session(f.session);
        std::lock_guard lock(s->mu);
        if (s->peers[r]) throw ProtocolError("protocol-violation: role already connected");
        const std::uint64_t seed = body_u64(f, "seed");
        if (s->seeded && s->seed != seed)
          throw ProtocolError("protocol-violation: session seed mismatch");
        s->seed = seed;
        s->seeded = true;
        s->peers[r] = sock;
        role = r;
        session_id = f.session;
        s->cv.notify_all();
        log("session " + session_id + ": " + who + " joined");
        return;
      }
      case FrameType::PairsReady: {
        if (role != kAlice)
          throw ProtocolError("protocol-violation: PAIRS_READY must come from alice");
        SessionPtr s = session(session_id);
        std::unique_lock lock(s->mu);
        if (!s->cv.wait_for(lock, cfg_.frame_timeout,
                            [&] { return s->peers[kBob] != nullptr || stopping_; }) ||
            stopping_)
          throw ProtocolError("peer-missing: bob never joined session " + session_id);
        if (s->batch) throw ProtocolError("protocol-violation: duplicate PAIRS_READY");
        const std::uint64_t count = body_u64(f, "count");
        const std::uint64_t n_check = body_u64(f, "n_check");
        if (count > cfg_.max_pairs_per_session || n_check > count)
          throw ProtocolError("protocol-violation: bad pair counts");
        s->streams.emplace(s->seed);
        s->batch = PairBatch::distribute(cfg_.attack, count, *s->streams);
        const nlohmann::json ack{{"count", count}, {"n_check", n_check}};
        s->peers[kAlice]->send_frame(FrameType::PairsReady, session_id, ack);
        s->peers[kBob]->send_frame(FrameType::PairsReady, session_id, ack);
        log("session " + session_id + ": allocated " + std::to_string(count) + " pairs");
        return;
      }
      case FrameType::MeasureReq: {
        SessionPtr s = session(session_id);
        std::lock_guard lock(s->mu);
        if (!s->batch) throw ProtocolError("protocol-violation: MEASURE_REQ before pairs");
        const std::uint64_t pair = body_u64(f, "pair");
        const std::string label = body_str(f, "label");
        const Basis basis = basis_from_string(body_str(f, "basis"));
        if (pair >= s->batch->size())
          throw ProtocolError("protocol-violation: pair index out of range");
        const char owned = role == kAlice ? 'A' : 'B';
        if (label.size() != 1 || label[0] != owned)
          throw ProtocolError("protocol-violation: qubit " + label + " is not yours");
        try {
          const int bit = s->batch->measure_qubit(pair, label[0], basis, s->streams->source);
          sock->send_frame(FrameType::MeasureResp, session_id,
                           {{"pair", pair}, {"label", label}, {"bit", bit}});
        } catch (const std::logic_error&) {
          // contract breach, but the session survives it
          sock->send_frame(FrameType::Error, session_id,
                           {{"reason", "already-measured"}, {"pair", pair}, {"label", label}});
        }
        return;
      }
      case FrameType::CheckBasis:
      case FrameType::CheckOutcome:
      case FrameType::Verdict:
      case FrameType::Announce:
      case FrameType::Bye:
      case FrameType::Error: {
        SessionPtr s = session(session_id);
        std::lock_guard lock(s->mu);
        if (f.type == FrameType::Announce) observe_announcement(session_id, *s, f);
        net::FrameSocket* peer = s->peers[1 - role];
        if (!peer) {
          if (f.type == FrameType::Bye || f.type == FrameType::Error) return;
          throw ProtocolError("peer-missing: cannot relay " + std::string(to_string(f.type)));
        }
        try {
          peer->send_frame(f.type, session_id, f.body);
        } catch (const TransportError&) {
          if (f.type != FrameType::Bye) throw ProtocolError("peer-gone: relay failed");
        }
        return;
      }
      case FrameType::MeasureResp:
      case FrameType::PairsReady:
        break;
    }
    throw ProtocolError("protocol-violation: unexpected " + std::string(to_string(f.type)));
  }

  // Eve reads the public channel. Message pairs are exactly those whose
  // A half has been read out and whose B half has not: Alice measures
  // before announcing, Bob only after. Her guess never travels anywhere.
  void observe_announcement(const std::string& session_id, Session& s, const Frame& f) {
    if (!cfg_.attack.has_eve() || !s.batch) return;
    BitString announced;
    try {
      announced = BitString::parse(body_str(f, "bits"));
    } catch (const std::invalid_argument&) {
      throw ProtocolError("malformed-frame: ANNOUNCE bits must be '0'/'1'");
    }
    std::vector<std::size_t> message_pairs;
    for (std::size_t p = 0; p < s.batch->size(); ++p) {
      const PairInstance& inst = s.batch->at(p);
      const bool a_done = inst.measured[static_cast<std::size_t>(inst.state.position('A'))];
      const bool b_done = inst.measured[static_cast<std::size_t>(inst.state.position('B'))];
      if (a_done && !b_done) message_pairs.push_back(p);
    }
    if (message_pairs.size() != announced.size()) {
      log("session " + session_id + ": announcement length does not match message pairs");
      return;
    }
    EveRecord record;
    for (std::size_t p : message_pairs) {
      if (cfg_.attack.kind == AttackKind::GhzProbe) {
        record.taps.push_back(
            {Basis::Z, s.batch->measure_qubit(p, 'E', Basis::Z, s.streams->source)});
      } else {
        record.taps.push_back(s.batch->at(p).tap.value());
      }
    }
    BitString guess = eve_decode(cfg_.attack, record, announced);
    std::lock_guard lock(guesses_mu_);
    guesses_[session_id] = std::move(guess);
  }

  void unregister(const std::string& session_id, int role) {
    std::lock_guard lock(sessions_mu_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return;
    Session& s = *it->second;
    bool empty = false;
    {
      std::lock_guard slock(s.mu);
      s.peers[role] = nullptr;
      empty = !s.peers[kAlice] && !s.peers[kBob];
    }
    if (empty) sessions_.erase(it);
  }

  BrokerConfig cfg_;
  net::Listener listener_;
  std::atomic<bool> stopping_{false};

  std::mutex conns_mu_;
  std::vector<std::unique_ptr<net::FrameSocket>> conns_;
  std::vector<std::thread> workers_;

  std::mutex sessions_mu_;
  std::map<std::string, SessionPtr> sessions_;

  mutable std::mutex guesses_mu_;
  std::map<std::string, BitString> guesses_;

  std::thread accept_thread_;
};

}  // namespace epr::wire
