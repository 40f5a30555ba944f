#ifndef ORPCO_RNG_HPP
#define ORPCO_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace orpco {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent substreams from one master
// seed so that parallel workers stay deterministic regardless of scheduling.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(mix64(seed) ^ mix64(stream * 0xd6e8feb86659fd93ULL + 1));
}

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags = {}) {
    std::uint64_t s = mix64(seed);
    for (auto t : tags) s = mix_seed(s, t);
    return Rng(s);
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double normal(Rng& rng, double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(rng);
}

} // namespace orpco

#endif
