#pragma once

// Counter-based random numbers for reproducible experiments.
//
// The generator is Philox4x32 with 10 rounds (Salmon et al., SC'11), the same
// bijection Random123 ships as philox4x32_10. A stream is identified by a
// 64-bit key (the user seed) and a 64-bit stream id stored in the upper half of
// the 128-bit counter; the lower half counts blocks. Two streams with distinct
// ids never overlap, so a single seed can feed several independent consumers
// (noise, block selection) without any shared state.
//
// Derived distributions:
//   uniform01()  53-bit mantissa from two 32-bit words: (a>>5)*2^26 + (b>>6), times 2^-53.
//   normal()     Box-Muller on (1 - u1, u2); both outputs are used, cached in order.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace rpir {

class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    /// The raw bijection. Exposed for known-answer tests.
    static Counter block(Counter ctr, Key key) {
        ctr = round(ctr, key);
        for (int r = 1; r < 10; ++r) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
            ctr = round(ctr, key);
        }
        return ctr;
    }

    Philox4x32() : Philox4x32(0, 0) {}

    Philox4x32(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    /// Same key, different stream id.
    Philox4x32 split(std::uint64_t stream) const {
        Philox4x32 g;
        g.key_ = key_;
        g.stream_ = stream;
        return g;
    }

    std::uint32_t next_u32() {
        if (lane_ == 4) refill();
        return buffer_[lane_++];
    }

    /// Uniform on [0, 1).
    double uniform01() {
        const std::uint64_t a = next_u32() >> 5;
        const std::uint64_t b = next_u32() >> 6;
        return static_cast<double>(a * 67108864ULL + b) * 0x1.0p-53;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    std::uint64_t blocks_consumed() const { return counter_; }

    bool operator==(const Philox4x32&) const = default;

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static Counter round(const Counter& c, const Key& k) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }

    void refill() {
        const Counter ctr{static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                          static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        buffer_ = block(ctr, key_);
        ++counter_;
        lane_ = 0;
    }

    Key key_{};
    std::uint64_t stream_ = 0;
    std::uint64_t counter_ = 0;
    Counter buffer_{};
    int lane_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Stream ids used by the library. Keeping them in one place guarantees the
/// noise draw for a seed is unaffected by how many block draws a solver makes.
namespace streams {
inline constexpr std::uint64_t kNoise = 0;
inline constexpr std::uint64_t kBlockSelection = 1;
}  // namespace streams

/// Inverse-CDF sampling over a fixed discrete distribution.
class CategoricalSampler {
public:
    CategoricalSampler() = default;

    explicit CategoricalSampler(std::span<const double> probabilities) {
        cumulative_.reserve(probabilities.size());
        double acc = 0.0;
        for (double p : probabilities) {
            acc += p;
            cumulative_.push_back(acc);
        }
        // Guard against the last partial sum landing just under 1.
        if (!cumulative_.empty()) cumulative_.back() = 1.0;
    }

    std::size_t size() const { return cumulative_.size(); }

    std::size_t sample(Philox4x32& rng) const {
        const double u = rng.uniform01();
        std::size_t lo = 0;
        std::size_t hi = cumulative_.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (u < cumulative_[mid]) hi = mid;
            else lo = mid + 1;
        }
        return lo;
    }

private:
    std::vector<double> cumulative_;
};

}  // namespace rpir
