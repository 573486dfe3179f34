#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace pnd {

using RandomStream = std::mt19937_64;

enum class StreamRole : std::uint64_t {
    Symbols = 1,
    Channel = 2,
    Instance = 3,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream for one (trial, role) pair. The derivation depends only
/// on its inputs, so any parallel schedule reproduces the same draws.
inline RandomStream substream(std::uint64_t master_seed, std::uint64_t index, StreamRole role) {
    std::uint64_t h = splitmix64(master_seed);
    h = splitmix64(h ^ index);
    h = splitmix64(h ^ static_cast<std::uint64_t>(role));
    return RandomStream(h);
}

/// Standard circularly symmetric complex Gaussian, CN(0, 1).
template <class Rng>
std::complex<double> complex_gaussian(Rng& rng) {
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    const double re = normal(rng);
    const double im = normal(rng);
    return {re, im};
}

}  // namespace pnd
