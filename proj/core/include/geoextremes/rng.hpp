#pragma once

#include <cstdint>
#include <random>

namespace geoextremes {

using Rng = std::mt19937_64;

/// One step of the splitmix64 generator, used to derive stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/**
 * Deterministic seed for one replicate. Every random stream is a pure function of
 * (master_seed, replicate_id, substream), so results do not depend on worker count
 * or scheduling.
 */
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t replicate_id = 0;

  std::uint64_t stream_seed(std::uint64_t substream = 0) const noexcept
  {
    std::uint64_t h = splitmix64(master_seed);
    h = splitmix64(h ^ replicate_id);
    return splitmix64(h ^ splitmix64(substream + 0x5851f42d4c957f2dULL));
  }

  Rng engine(std::uint64_t substream = 0) const
  {
    const std::uint64_t s = stream_seed(substream);
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(replicate_id), static_cast<std::uint32_t>(substream)};
    return Rng(seq);
  }

  /// A seed for the replicate `id` of a nested experiment that lives inside this stream.
  SeedSpec child(std::uint64_t substream, std::uint64_t id) const noexcept
  {
    return SeedSpec{stream_seed(substream), id};
  }
};

/// Uniform double in [0, 1).
inline double uniform01(Rng &rng)
{
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace geoextremes
