#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace seqshift {

// Counter-based generator built on the SplitMix64 finalizer
// (Steele/Lea/Vigna 2014). Draw i from stream `key` is
// mix(key + (i+1) * kGamma), so a stream is a pure function of
// (key, counter) and never depends on other streams.
//
// Streams are derived by hashing (parent key, tag, indices); the draws
// for one (step, purpose) stay fixed when unrelated purposes consume
// more or fewer values.
class Rng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit Rng(std::uint64_t key) : key_(key) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // FNV-1a over the tag bytes.
  static constexpr std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : tag) {
      h ^= static_cast<std::uint8_t>(c);
      h *= 0x100000001B3ULL;
    }
    return h;
  }

  static constexpr std::uint64_t derive(std::uint64_t key, std::string_view tag) {
    return mix(mix(key + kGamma) ^ hash_tag(tag));
  }
  static constexpr std::uint64_t derive(std::uint64_t key, std::string_view tag,
                                        std::uint64_t a) {
    return mix(derive(key, tag) ^ mix(a + kGamma));
  }
  static constexpr std::uint64_t derive(std::uint64_t key, std::string_view tag,
                                        std::uint64_t a, std::uint64_t b) {
    return mix(derive(key, tag, a) ^ mix(b + 2 * kGamma));
  }

  Rng stream(std::string_view tag) const { return Rng(derive(key_, tag)); }
  Rng stream(std::string_view tag, std::uint64_t a) const {
    return Rng(derive(key_, tag, a));
  }
  Rng stream(std::string_view tag, std::uint64_t a, std::uint64_t b) const {
    return Rng(derive(key_, tag, a, b));
  }

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }

  // Unbiased draw in [0, bound) by rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // [0, 1) with 53 random mantissa bits.
  double next_real() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_real_in(double lo, double hi) {
    return lo + (hi - lo) * next_real();
  }

  bool next_bool() { return (next_u64() >> 63) != 0; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[next_below(i)]);
    }
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace seqshift
