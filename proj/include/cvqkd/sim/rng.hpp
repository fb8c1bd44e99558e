#pragma once

#include <cstdint>
#include <limits>

namespace cvqkd::sim {

// SplitMix64. Small state, so one generator per slot is cheap; this is what
// makes per-slot substreams a pure function of (seed, slot).
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  SplitMix64 g(a ^ (0xD1B54A32D192ED03ULL * (b + 1)));
  g();
  return g();
}

// Independent stream for (seed, stream id, index).
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t stream,
                            std::uint64_t index) {
  return SplitMix64(mix64(mix64(seed, stream), index));
}

__extension__ using uint128 = unsigned __int128;

// Uniform integer in [0, n) by multiply-shift; bias below n / 2^64.
template <class Rng>
std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<uint128>(rng()) * n) >> 64);
}

template <class Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <class Rng>
std::uint8_t random_bit(Rng& rng) {
  return static_cast<std::uint8_t>(rng() >> 63);
}

template <class Rng, class T>
void shuffle(Rng& rng, T& items) {
  for (std::uint64_t i = items.size(); i > 1; --i) {
    const auto j = uniform_index(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

// Stream ids.
inline constexpr std::uint64_t kSlotStream = 1;
inline constexpr std::uint64_t kDisclosureStream = 2;
inline constexpr std::uint64_t kReconcileStream = 3;
inline constexpr std::uint64_t kAmplifyStream = 4;

}  // namespace cvqkd::sim
