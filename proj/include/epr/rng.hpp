#pragma once

#include <cstdint>

namespace epr {

// One stream per protocol role. Draws in one role's stream never shift
// another role's sequence.
enum class StreamRole : std::uint64_t {
  Source = 0,  // quantum collapse draws (the channel itself)
  Alice = 1,
  Bob = 2,
  Eve = 3,
};

namespace detail {

// 64-bit golden ratio, the splitmix64 increment.
inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer (Stafford mix13).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based random stream: draw k is mix64(key + (k+1)*golden), the
// random-access form of splitmix64. The key folds the seed with the
// stream role, so a draw is a pure function of (seed, role, counter) and
// any draw can be reproduced in isolation.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, StreamRole role)
      : key_(detail::mix64(detail::mix64(seed + detail::kGolden) +
                           (static_cast<std::uint64_t>(role) + 1) * detail::kGolden)) {}

  std::uint64_t next_u64() { return detail::mix64(key_ + ++counter_ * detail::kGolden); }

  // 53-bit double in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  int next_bit() { return static_cast<int>(next_u64() >> 63); }

  // Integer in [0, n) via fixed-point multiply.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Independent child stream. Children with distinct indices are
  // independent of each other and of the parent's own draw sequence.
  RandomStream fork(std::uint64_t child) const {
    return RandomStream(detail::mix64(key_ ^ detail::mix64(child + detail::kGolden)));
  }

  std::uint64_t draws() const { return counter_; }

 private:
  explicit RandomStream(std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Per-trial seed for batch runs; trials are independent slices of one
// master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return detail::mix64(master ^ detail::mix64((index + 1) * detail::kGolden));
}

}  // namespace epr
