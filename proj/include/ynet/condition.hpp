#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace ynet {

/// Laser power (W) and scan speed (m/s), with min-max normalized forms.
class Condition {
 public:
  static constexpr double kPowerMin = 25.0;
  static constexpr double kPowerMax = 40.0;
  static constexpr double kSpeedMin = 0.5;
  static constexpr double kSpeedMax = 2.5;

  Condition() = default;
  /// Throws RangeError outside [25,40] W or [0.5,2.5] m/s.
  Condition(double power, double speed);

  double power() const noexcept { return power_; }
  double speed() const noexcept { return speed_; }
  double power_norm() const noexcept { return (power_ - kPowerMin) / (kPowerMax - kPowerMin); }
  double speed_norm() const noexcept { return (speed_ - kSpeedMin) / (kSpeedMax - kSpeedMin); }
  std::array<double, 2> normalized() const noexcept { return {power_norm(), speed_norm()}; }

  bool operator==(const Condition&) const = default;
  auto operator<=>(const Condition&) const = default;

 private:
  double power_ = kPowerMin;
  double speed_ = kSpeedMin;
};

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

/// Latin Hypercube design on the unit cube: each axis split into n equal
/// strata, one point per stratum per axis, uniform within its stratum, strata
/// paired across axes by independent seeded permutations. Returns n points of
/// `dims` coordinates.
std::vector<std::vector<double>> latin_hypercube(std::size_t n, std::size_t dims,
                                                 std::uint64_t seed);

/// LHS over (power, speed) in the given ranges.
std::vector<Condition> lhs_sample(std::size_t n, Range power, Range speed, std::uint64_t seed);

inline std::vector<Condition> lhs_sample(std::size_t n, std::uint64_t seed) {
  return lhs_sample(n, {Condition::kPowerMin, Condition::kPowerMax},
                    {Condition::kSpeedMin, Condition::kSpeedMax}, seed);
}

}  // namespace ynet
