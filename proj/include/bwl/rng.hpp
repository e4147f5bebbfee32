#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace bwl {

/// Seed for every sampled quantity; identical seeds reproduce identical draws.
struct RngSeed {
    std::uint64_t value = 0;
};

/// Recorded in reports so that runs can be matched to the generator that produced them.
inline constexpr std::string_view kRngVersion = "mt19937_64/splitmix64/box-muller v1";

/// SplitMix64 finalizer, used to decorrelate seeds and derive independent streams.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of the substream `stream` derived from `seed`.
[[nodiscard]] constexpr RngSeed derive_seed(RngSeed seed, std::uint64_t stream) noexcept {
    return RngSeed{splitmix64(splitmix64(seed.value) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL))};
}

// Named substreams of an experiment seed.
namespace stream {
inline constexpr std::uint64_t kPhases = 1;
inline constexpr std::uint64_t kNoise = 2;
inline constexpr std::uint64_t kFeatures = 3;
inline constexpr std::uint64_t kTrainSample = 4;
inline constexpr std::uint64_t kTestSample = 5;
inline constexpr std::uint64_t kRepeat = 1000;
} // namespace stream

/// Portable generator: the raw mt19937_64 sequence is fixed by the standard, and the
/// uniform/Gaussian transforms below are implemented here rather than taken from
/// <random> distributions, whose output is implementation-defined.
class Rng {
public:
    explicit Rng(RngSeed seed) : engine_(splitmix64(seed.value)) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform on [lo, hi].
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box–Muller; the second variate of each pair is cached.
    double normal() noexcept;

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

} // namespace bwl
