#include "ynet/condition.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "ynet/errors.hpp"
#include "ynet/random.hpp"

namespace ynet {

Condition::Condition(double power, double speed) : power_(power), speed_(speed) {
  if (!(power >= kPowerMin && power <= kPowerMax)) {
    std::ostringstream msg;
    msg << "laser power " << power << " W outside [" << kPowerMin << ", " << kPowerMax << "]";
    throw RangeError(msg.str());
  }
  if (!(speed >= kSpeedMin && speed <= kSpeedMax)) {
    std::ostringstream msg;
    msg << "scan speed " << speed << " m/s outside [" << kSpeedMin << ", " << kSpeedMax << "]";
    throw RangeError(msg.str());
  }
}

std::vector<std::vector<double>> latin_hypercube(std::size_t n, std::size_t dims,
                                                 std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> points(n, std::vector<double>(dims));
  std::vector<std::size_t> strata(n);
  for (std::size_t d = 0; d < dims; ++d) {
    std::iota(strata.begin(), strata.end(), std::size_t{0});
    // Fisher-Yates with our own uniform draw; std::shuffle's output is
    // library-specific.
    for (std::size_t i = n; i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
      std::swap(strata[i - 1], strata[std::min(j, i - 1)]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      points[i][d] = (static_cast<double>(strata[i]) + uniform01(rng)) / static_cast<double>(n);
    }
  }
  return points;
}

std::vector<Condition> lhs_sample(std::size_t n, Range power, Range speed, std::uint64_t seed) {
  std::vector<Condition> out;
  out.reserve(n);
  for (const auto& p : latin_hypercube(n, 2, seed)) {
    out.emplace_back(power.lo + p[0] * (power.hi - power.lo), speed.lo + p[1] * (speed.hi - speed.lo));
  }
  return out;
}

}  // namespace ynet
