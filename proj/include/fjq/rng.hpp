#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace fjq {

namespace detail {

/// splitmix64 output function (Steele, Lea, Flood).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// Key of the child stream `index` under `parent`.
///
/// This is the stable substream derivation used throughout the library:
///
///     derive_key(parent, index) = mix64(parent ^ mix64(index * 0x9E3779B97F4A7C15 + 0xD1B54A32D192ED03))
///
/// with mix64 the splitmix64 finalizer. It never changes between versions;
/// saved master seeds keep reproducing the same SampleSets.
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t index) noexcept {
    return detail::mix64(parent ^ detail::mix64(index * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL));
}

/// Deterministic single-owner pseudorandom stream: xoshiro256** seeded from a
/// 64-bit key through splitmix64. Satisfies UniformRandomBitGenerator so it
/// can drive standard and Boost distributions directly.
///
/// Streams form a tree: `child(i)` depends only on this stream's key, never on
/// how many numbers were already drawn.
class RngStream {
public:
    using result_type = std::uint64_t;

    explicit RngStream(std::uint64_t key) noexcept : key_(key) {
        std::uint64_t x = key;
        for (auto& word : state_) {
            x += 0x9E3779B97F4A7C15ULL;
            word = detail::mix64(x);
        }
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1).
    double uniform_open() noexcept {
        return (static_cast<double>((*this)() >> 12) + 0.5) * 0x1.0p-52;
    }

    std::uint64_t key() const noexcept { return key_; }

    RngStream child(std::uint64_t index) const noexcept { return RngStream(derive_key(key_, index)); }

    friend bool operator==(const RngStream&, const RngStream&) = default;

private:
    std::uint64_t key_;
    std::array<std::uint64_t, 4> state_{};
};

/// Stream for replication `index` of a batch run under `master_seed`.
inline RngStream substream(std::uint64_t master_seed, std::uint64_t index) noexcept {
    return RngStream(derive_key(master_seed, index));
}

}  // namespace fjq
