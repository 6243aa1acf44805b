#pragma once

#include <cstdint>
#include <random>

namespace rmhedge {

/// SplitMix64 finalizer, used only to derive per-path seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of path `index` under master seed `seed`; a pure function of both, so
/// the stream of a path does not depend on which worker simulates it.
inline std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::uint64_t index) { return Engine(path_seed(seed, index)); }

}  // namespace rmhedge
