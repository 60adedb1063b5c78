#pragma once

#include <cstdint>
#include <random>

namespace ym2 {

/// Seed used when the caller passes seed 0.
inline constexpr std::uint64_t kDefaultSeed = 0x5eed2d1a11ce5ULL;

/// An independent random stream. Streams are cheap to create and must not be
/// shared between threads; derive one per worker with `split`.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0)
        : seed_(seed == 0 ? kDefaultSeed : seed), stream_id_(stream_id) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                          static_cast<std::uint32_t>(stream_id_),
                          static_cast<std::uint32_t>(stream_id_ >> 32)};
        engine_.seed(seq);
    }

    /// Uniform double in [0, 1) with 53 random bits. Bit-identical across
    /// standard libraries, unlike std::uniform_real_distribution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t next_u64() { return engine_(); }

    RandomStream split(std::uint64_t child) const {
        return RandomStream(seed_, stream_id_ * 0x9e3779b97f4a7c15ULL + child + 1);
    }

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
};

}  // namespace ym2
