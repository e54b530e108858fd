#pragma once

#include <cstdint>

namespace convexiwave {

/// Counter-based generator built on the SplitMix64 finalizer. Draw k of a
/// stream depends only on (seed, stream, k), so streams split without shared state.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(seed ^ mix(stream + 0x632BE59BD9B4E019ULL))) {}

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t bits(std::uint64_t counter) const { return mix(key_ + counter * 0x9E3779B97F4A7C15ULL); }

    /// Uniform on [0, 1).
    double unit(std::uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    /// Uniform on [-1, 1).
    double symmetric(std::uint64_t counter) const { return 2.0 * unit(counter) - 1.0; }

    CounterRng split(std::uint64_t stream) const { return CounterRng(key_, stream); }

private:
    std::uint64_t key_;
};

}  // namespace convexiwave
