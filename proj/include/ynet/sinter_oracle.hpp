#pragma once

#include <cstddef>
#include <optional>

#include "ynet/condition.hpp"
#include "ynet/tensor.hpp"

namespace ynet {

/// Constants of the synthetic sintering transform that generates targets.
struct OracleParams {
  double d_min_px = 16.0;
  double d_max_px = 112.0;
  double alpha = 0.8;
  double k_base = 2.0;
  double k_range = 6.0;

  void validate() const;
};

/// Condition-dependent intensity eta in [0,1], affected depth D (rows) and
/// blur iteration count K.
struct OracleSchedule {
  double intensity = 0.0;
  std::size_t depth = 0;
  std::size_t iterations = 0;
};

/// eta = (power_norm + 1 - speed_norm) / 2, D = d_min + round(eta (d_max - d_min)),
/// K = k_base + round(eta k_range).
OracleSchedule oracle_schedule(const Condition& cond, const OracleParams& params = {});

/// First row (from the top) holding any value >= 0.5, if any.
std::optional<std::size_t> bed_surface_row(const Tensor& field);

/// Deterministic stand-in for sintering a binary field [H,W]. With depth
/// y = row - surface_row and weight w(y) = max(0, 1 - y/D) for y >= 0,
/// repeats K times f <- (1 - alpha w) f + alpha w box3(f) (edge-replicated
/// 3x3 mean), then thresholds at 0.5. Rows above the surface or at y >= D are
/// returned unchanged.
Tensor sinter_oracle(const Tensor& field, const Condition& cond, const OracleParams& params = {});

}  // namespace ynet
