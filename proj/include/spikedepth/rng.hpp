#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace spikedepth {

/**
 * Counter-based generator: output n of stream (seed, id) is a SplitMix64
 * finalization of key(seed, id) + n * golden. Any substream can be created
 * directly from its index, so work split across threads draws the same
 * numbers regardless of scheduling.
 *
 * Satisfies UniformRandomBitGenerator and can drive <random> distributions.
 */
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(mix(seed) ^ mix(stream * kGolden + 0x632be59bd9b4e019ULL)))
    {
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return mix(key_ + (++counter_) * kGolden); }

    /// Independent child stream; deterministic in (this key, id).
    CounterRng substream(std::uint64_t id) const { return CounterRng(key_, id); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0, 1).
    double uniform_open()
    {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return u;
    }

    double exponential() { return -std::log(uniform_open()); }

    std::uint64_t counter() const { return counter_; }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

    static constexpr std::uint64_t mix(std::uint64_t z)
    {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace spikedepth
