#pragma once

#include <cstdint>
#include <random>

namespace mapelites {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent random stream for one (seed, stream, slot) triple.
///
/// Every candidate in a batch draws from its own substream keyed by the run
/// seed, the iteration (or generation) and its slot in the batch, so the
/// values it sees do not depend on how evaluation work is scheduled.
inline Rng substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t slot)
{
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
    h = splitmix64(h ^ splitmix64(slot + 0x85157af5ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    return Rng(seq);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

} // namespace mapelites
