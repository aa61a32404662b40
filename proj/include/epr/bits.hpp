#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "epr/rng.hpp"

namespace epr {

// Sequence of 0/1 values with an ASCII '0'/'1' external form.
class BitString {
 public:
  BitString() = default;

  static BitString parse(std::string_view text) {
    BitString out;
    out.bits_.reserve(text.size());
    for (char c : text) {
      if (c != '0' && c != '1')
        throw std::invalid_argument("BitString: expected only '0'/'1', got '" +
                                    std::string(1, c) + "'");
      out.bits_.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return out;
  }

  static BitString random(std::size_t n, RandomStream& rng) {
    BitString out;
    out.bits_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.bits_.push_back(
        static_cast<std::uint8_t>(rng.next_bit()));
    return out;
  }

  std::string str() const {
    std::string s;
    s.reserve(bits_.size());
    for (auto b : bits_) s.push_back(static_cast<char>('0' + b));
    return s;
  }

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  int operator[](std::size_t i) const { return bits_[i]; }
  int at(std::size_t i) const { return bits_.at(i); }

  void push_back(int bit) {
    if (bit != 0 && bit != 1) throw std::invalid_argument("BitString: bit must be 0 or 1");
    bits_.push_back(static_cast<std::uint8_t>(bit));
  }

  auto begin() const { return bits_.begin(); }
  auto end() const { return bits_.end(); }

  bool operator==(const BitString&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

inline BitString operator^(const BitString& a, const BitString& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("BitString xor: length mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  BitString out;
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(a[i] ^ b[i]);
  return out;
}

inline std::size_t count_mismatches(const BitString& a, const BitString& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("count_mismatches: length mismatch");
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += a[i] != b[i];
  return n;
}

}  // namespace epr
