#pragma once

// Counter-based random source built on the SplitMix64 finalizer
// (Steele, Lea & Vigna constants). Stateless apart from the key: output i
// is a pure function of (key, i), so shot generation parallelizes over the
// counter and runs are reproducible from the seed alone.

#include <cstdint>

namespace fluxlab {

class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(seed ^ mix(stream + 0x632BE59BD9B4E019ULL))) {}

    /// 64 uniform bits for counter value i.
    std::uint64_t bits(std::uint64_t i) const {
        return mix(key_ + (i + 1) * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform double in [0, 1).
    double uniform(std::uint64_t i) const {
        return static_cast<double>(bits(i) >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [-1, 1).
    double symmetric(std::uint64_t i) const { return 2.0 * uniform(i) - 1.0; }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
};

}  // namespace fluxlab
