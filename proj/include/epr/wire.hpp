#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace epr::wire {

// Classical-channel failure: endpoint unreachable, connection lost.
struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No frame arrived within the per-frame deadline.
struct TimeoutError : TransportError {
  using TransportError::TransportError;
};

// Peer sent something the protocol forbids (or an ERROR frame).
struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class FrameType {
  Hello,
  PairsReady,
  CheckBasis,
  CheckOutcome,
  Verdict,
  Announce,
  MeasureReq,
  MeasureResp,
  Bye,
  Error,
};

inline const char* to_string(FrameType t) {
  switch (t) {
    case FrameType::Hello: return "HELLO";
    case FrameType::PairsReady: return "PAIRS_READY";
    case FrameType::CheckBasis: return "CHECK_BASIS";
    case FrameType::CheckOutcome: return "CHECK_OUTCOME";
    case FrameType::Verdict: return "VERDICT";
    case FrameType::Announce: return "ANNOUNCE";
    case FrameType::MeasureReq: return "MEASURE_REQ";
    case FrameType::MeasureResp: return "MEASURE_RESP";
    case FrameType::Bye: return "BYE";
    case FrameType::Error: return "ERROR";
  }
  return "ERROR";
}

inline FrameType frame_type_from_string(std::string_view s) {
  if (s == "HELLO") return FrameType::Hello;
  if (s == "PAIRS_READY") return FrameType::PairsReady;
  if (s == "CHECK_BASIS") return FrameType::CheckBasis;
  if (s == "CHECK_OUTCOME") return FrameType::CheckOutcome;
  if (s == "VERDICT") return FrameType::Verdict;
  if (s == "ANNOUNCE") return FrameType::Announce;
  if (s == "MEASURE_REQ") return FrameType::MeasureReq;
  if (s == "MEASURE_RESP") return FrameType::MeasureResp;
  if (s == "BYE") return FrameType::Bye;
  if (s == "ERROR") return FrameType::Error;
  throw ProtocolError("malformed-frame: unknown type '" + std::string(s) + "'");
}

// Wire format: 4-byte big-endian payload length, then a UTF-8 JSON
// object {type, session, seq, body}. seq strictly increases per
// (session, sender); a relay re-stamps it for the outgoing leg.
struct Frame {
  FrameType type = FrameType::Error;
  std::string session;
  std::uint64_t seq = 0;
  nlohmann::json body = nlohmann::json::object();
};

inline constexpr std::size_t kMaxFramePayload = 1u << 20;

inline std::array<unsigned char, 4> encode_frame_length(std::uint32_t n) {
  return {static_cast<unsigned char>(n >> 24), static_cast<unsigned char>(n >> 16),
          static_cast<unsigned char>(n >> 8), static_cast<unsigned char>(n)};
}

inline std::uint32_t decode_frame_length(const unsigned char* hdr) {
  return (static_cast<std::uint32_t>(hdr[0]) << 24) |
         (static_cast<std::uint32_t>(hdr[1]) << 16) |
         (static_cast<std::uint32_t>(hdr[2]) << 8) | static_cast<std::uint32_t>(hdr[3]);
}

inline std::string encode_frame(const Frame& f) {
  const std::string payload = nlohmann::ordered_json{{"type", to_string(f.type)},
                                                     {"session", f.session},
                                                     {"seq", f.seq},
                                                     {"body", f.body}}
                                  .dump();
  if (payload.size() > kMaxFramePayload)
    throw ProtocolError("malformed-frame: payload too large");
  const auto hdr = encode_frame_length(static_cast<std::uint32_t>(payload.size()));
  std::string out(reinterpret_cast<const char*>(hdr.data()), hdr.size());
  out += payload;
  return out;
}

// Parses the bytes after the length prefix. Throws ProtocolError on
// anything that is not a well-formed frame.
inline Frame decode_frame_payload(std::string_view payload) {
  nlohmann::json j = nlohmann::json::parse(payload, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object())
    throw ProtocolError("malformed-frame: payload is not a JSON object");
  if (!j.contains("type") || !j["type"].is_string() || !j.contains("session") ||
      !j["session"].is_string() || !j.contains("seq") || !j["seq"].is_number_unsigned() ||
      !j.contains("body") || !j["body"].is_object())
    throw ProtocolError("malformed-frame: missing or mistyped field");
  Frame f;
  f.type = frame_type_from_string(j["type"].get<std::string>());
  f.session = j["session"].get<std::string>();
  f.seq = j["seq"].get<std::uint64_t>();
  f.body = j["body"];
  return f;
}

// Body-field accessors with protocol-level validation.
inline std::uint64_t body_u64(const Frame& f, const char* key) {
  if (!f.body.contains(key) || !f.body[key].is_number_unsigned())
    throw ProtocolError(std::string("malformed-frame: expected unsigned field '") + key +
                        "' in " + to_string(f.type));
  return f.body[key].get<std::uint64_t>();
}

inline std::string body_str(const Frame& f, const char* key) {
  if (!f.body.contains(key) || !f.body[key].is_string())
    throw ProtocolError(std::string("malformed-frame: expected string field '") + key +
                        "' in " + to_string(f.type));
  return f.body[key].get<std::string>();
}

}  // namespace epr::wire
