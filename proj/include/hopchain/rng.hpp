#pragma once

// Platform-independent seeded randomness. std::mt19937_64 output is fixed by
// the standard, but the std distributions and std::shuffle are not, so the
// bounded draws and the permutation are done here.

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace hopchain {

class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    // Reject the top partial bucket to avoid modulo bias.
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Keyed 64-bit hash over a sequence of byte strings (FNV-1a with length
// framing, finalized by splitmix64). Not cryptographic.
inline std::uint64_t keyed_hash(std::uint64_t key,
                                std::initializer_list<std::string_view> parts) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ splitmix64(key);
  auto mix_byte = [&h](unsigned char b) {
    h ^= b;
    h *= 0x100000001b3ULL;
  };
  for (std::string_view part : parts) {
    std::uint64_t len = part.size();
    for (int i = 0; i < 8; ++i) mix_byte(static_cast<unsigned char>(len >> (8 * i)));
    for (char c : part) mix_byte(static_cast<unsigned char>(c));
  }
  return splitmix64(h);
}

// Maps a hash to [0, 1).
inline double unit_interval(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace hopchain
