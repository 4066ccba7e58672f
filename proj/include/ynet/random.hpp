#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ynet {

using Rng = std::mt19937_64;

/// Derives an independent seed for a named sub-stream of a run seed, e.g.
/// derive_seed(seed, "shuffle") or derive_seed(seed, "bed", i, j).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t a = 0,
                          std::uint64_t b = 0);

/// Uniform in [0,1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Standard normal via Box-Muller; one draw pair per call.
double standard_normal(Rng& rng);

}  // namespace ynet
