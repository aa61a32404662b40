#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "epr/wire.hpp"

namespace epr::net {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  std::string str() const { return host + ":" + std::to_string(port); }
};

inline Endpoint parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size())
    throw std::invalid_argument("endpoint must be host:port, got '" + std::string(text) + "'");
  const std::string port_str(text.substr(colon + 1));
  unsigned long port = 0;
  try {
    port = std::stoul(port_str);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad port in endpoint '" + std::string(text) + "'");
  }
  if (port > 65535) throw std::invalid_argument("port out of range: " + port_str);
  return {std::string(text.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

namespace detail {

inline sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
    throw wire::TransportError("cannot parse IPv4 address '" + host + "'");
  return addr;
}

}  // namespace detail

// Framed, sequenced connection. Sends are serialized and stamped with
// this endpoint's per-connection seq; receives enforce that the peer's
// seq starts at 0 and increments by 1.
class FrameSocket {
 public:
  explicit FrameSocket(int fd) : fd_(fd), send_mu_(std::make_unique<std::mutex>()) {}

  FrameSocket(FrameSocket&& o) noexcept
      : fd_(std::exchange(o.fd_, -1)),
        send_seq_(o.send_seq_),
        recv_seq_(o.recv_seq_),
        send_mu_(std::move(o.send_mu_)) {}
  FrameSocket& operator=(FrameSocket&&) = delete;
  FrameSocket(const FrameSocket&) = delete;

  ~FrameSocket() { close(); }

  void set_recv_timeout(std::chrono::milliseconds t) {
    timeval tv{};
    tv.tv_sec = static_cast<time_t>(t.count() / 1000);
    tv.tv_usec = static_cast<suseconds_t>((t.count() % 1000) * 1000);
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  }

  std::uint64_t send_frame(wire::FrameType type, const std::string& session,
                           nlohmann::json body) {
    std::lock_guard lock(*send_mu_);
    wire::Frame f{type, session, send_seq_, std::move(body)};
    const std::string bytes = wire::encode_frame(f);
    send_all(bytes.data(), bytes.size());
    return send_seq_++;
  }

  wire::Frame recv_frame() {
    unsigned char hdr[4];
    recv_exact(hdr, sizeof(hdr));
    const std::uint32_t len = wire::decode_frame_length(hdr);
    if (len > wire::kMaxFramePayload)
      throw wire::ProtocolError("malformed-frame: length " + std::to_string(len) +
                                " exceeds limit");
    std::string payload(len, '\0');
    recv_exact(payload.data(), len);
    wire::Frame f = wire::decode_frame_payload(payload);
    if (f.seq != recv_seq_)
      throw wire::ProtocolError("bad-seq: expected " + std::to_string(recv_seq_) +
                                ", got " + std::to_string(f.seq));
    ++recv_seq_;
    return f;
  }

  // Half-close both directions; unblocks a reader in another thread.
  void shutdown_both() {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
  }

  void close() {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
  }

  int fd() const { return fd_; }

 private:
  void send_all(const char* data, std::size_t n) {
    std::size_t sent = 0;
    while (sent < n) {
      const ssize_t k = ::send(fd_, data + sent, n - sent, MSG_NOSIGNAL);
      if (k < 0) {
        if (errno == EINTR) continue;
        throw wire::TransportError(std::string("send failed: ") + std::strerror(errno));
      }
      sent += static_cast<std::size_t>(k);
    }
  }

  void recv_exact(void* buf, std::size_t n) {
    std::size_t got = 0;
    auto* out = static_cast<char*>(buf);
    while (got < n) {
      const ssize_t k = ::recv(fd_, out + got, n - got, 0);
      if (k == 0) throw wire::TransportError("connection closed by peer");
      if (k < 0) {
        if (errno == EINTR) continue;
        if (errno == EAGAIN || errno == EWOULDBLOCK)
          throw wire::TimeoutError("timed out waiting for frame");
        throw wire::TransportError(std::string("recv failed: ") + std::strerror(errno));
      }
      got += static_cast<std::size_t>(k);
    }
  }

  int fd_ = -1;
  std::uint64_t send_seq_ = 0;
  std::uint64_t recv_seq_ = 0;
  std::unique_ptr<std::mutex> send_mu_;
};

class Listener {
 public:
  Listener(const std::string& host, std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw wire::TransportError("socket() failed");
    const int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr = detail::make_addr(host, port);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
      const std::string err = std::strerror(errno);
      ::close(fd_);
      fd_ = -1;
      throw wire::TransportError("bind " + host + ":" + std::to_string(port) +
                                 " failed: " + err);
    }
    if (::listen(fd_, 16) < 0) {
      ::close(fd_);
      fd_ = -1;
      throw wire::TransportError("listen() failed");
    }
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
  }

  Listener(const Listener&) = delete;
  ~Listener() { close(); }

  std::uint16_t port() const { return port_; }

  // Blocks for the next connection; empty once the listener is closed.
  std::optional<FrameSocket> accept() {
    for (;;) {
      const int fd = ::accept(fd_, nullptr, nullptr);
      if (fd >= 0) {
        const int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        return FrameSocket(fd);
      }
      if (errno == EINTR) continue;
      return std::nullopt;
    }
  }

  void close() {
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

inline FrameSocket connect_to(const Endpoint& ep) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw wire::TransportError("socket() failed");
  sockaddr_in addr = detail::make_addr(ep.host, ep.port);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    const std::string err = std::strerror(errno);
    ::close(fd);
    throw wire::TransportError("connect to " + ep.str() + " failed: " + err);
  }
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return FrameSocket(fd);
}

}  // namespace epr::net
