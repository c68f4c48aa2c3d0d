#pragma once

#include <cstdint>
#include <initializer_list>

namespace rmglab {

/// 64-bit finalizer with full avalanche (the splitmix64 mixing function).
/// Pure integer arithmetic, so results are bit-identical across platforms.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-based random stream. The state is derived by folding an arbitrary
/// key tuple (seed, purpose tag, indices ...) through mix64, so distinct keys
/// give statistically independent streams and the draw sequence for a key is
/// independent of any other stream's consumption order.
class rng_stream {
  public:
    static constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ULL;

    explicit rng_stream(std::initializer_list<std::uint64_t> key) {
        state_ = golden;
        for (std::uint64_t w : key) state_ = mix64(state_ + golden + w);
    }

    std::uint64_t next_u64() {
        state_ += golden;
        return mix64(state_);
    }

    /// Uniform double in [0, 1): 53 random mantissa bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1), never exactly 0 or 1; safe under log().
    double next_double_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

  private:
    std::uint64_t state_;
};

/// Purpose tags keep unrelated uses of the same index tuple on disjoint streams.
namespace stream_tag {
inline constexpr std::uint64_t game_kernel = 1;  // random_game kernel rows
inline constexpr std::uint64_t game_reward = 2;  // random_game rewards
inline constexpr std::uint64_t sample = 3;       // generative-model draws
inline constexpr std::uint64_t mc_sequence = 4;  // Monte-Carlo policy-sequence draws
inline constexpr std::uint64_t oracle = 5;       // dual-vs-LP cross-check triples
} // namespace stream_tag

} // namespace rmglab
