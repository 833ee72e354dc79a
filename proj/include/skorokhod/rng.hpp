#pragma once

#include <cstdint>
#include <limits>

namespace skorokhod {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Tag a master seed for an independent sub-experiment (model index, calibration run, ...).
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  return mix64(mix64(master ^ 0x5851f42d4c957f2dULL) + mix64(tag + kGolden));
}

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t replicate_index = 0;
};

// A position in the stream tree. Children are statistically independent of
// the parent and of each other; nothing depends on traversal order.
class StreamKey {
 public:
  constexpr StreamKey() = default;
  constexpr explicit StreamKey(std::uint64_t raw) : raw_(raw) {}
  constexpr explicit StreamKey(const SeedSpec& seed)
      : raw_(mix64(mix64(seed.master_seed + kGolden) ^ mix64(seed.replicate_index * 0xd1b54a32d192ed03ULL + 1))) {}

  constexpr StreamKey child(std::uint64_t index) const {
    return StreamKey(mix64(raw_ ^ mix64(index * 0xa0761d6478bd642fULL + 0xe7037ed1a0b428dbULL)));
  }
  constexpr std::uint64_t raw() const { return raw_; }

 private:
  std::uint64_t raw_ = 0;
};

// Counter-based generator: output k is mix64(key + k * golden).
class StreamRng {
 public:
  using result_type = std::uint64_t;

  constexpr explicit StreamRng(StreamKey key) : key_(key.raw()) {}
  explicit StreamRng(const SeedSpec& seed) : StreamRng(StreamKey(seed)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() { return mix64(key_ + (++counter_) * kGolden); }

  // Uniform on [0,1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1).
  constexpr double open_uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  constexpr std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace skorokhod
