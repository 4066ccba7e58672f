#include "ynet/sinter_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ynet {

void OracleParams::validate() const {
  if (!(d_min_px > 0.0 && d_min_px < d_max_px && d_max_px <= 128.0)) {
    throw std::invalid_argument("oracle: need 0 < d_min < d_max <= 128");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("oracle: alpha must be in (0,1]");
  if (k_base < 0.0 || k_range < 0.0) throw std::invalid_argument("oracle: negative iteration count");
}

OracleSchedule oracle_schedule(const Condition& cond, const OracleParams& params) {
  params.validate();
  OracleSchedule s;
  s.intensity = 0.5 * (cond.power_norm() + (1.0 - cond.speed_norm()));
  s.depth = static_cast<std::size_t>(
      std::lround(params.d_min_px + std::round(s.intensity * (params.d_max_px - params.d_min_px))));
  s.iterations =
      static_cast<std::size_t>(std::lround(params.k_base + std::round(s.intensity * params.k_range)));
  return s;
}

std::optional<std::size_t> bed_surface_row(const Tensor& field) {
  if (field.rank() != 2) throw ShapeError("bed_surface_row: expected [H,W], got " + shape_string(field.shape()));
  const std::size_t cols = field.dim(1);
  for (std::size_t r = 0; r < field.dim(0); ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (field[r * cols + c] >= 0.5f) return r;
    }
  }
  return std::nullopt;
}

Tensor sinter_oracle(const Tensor& field, const Condition& cond, const OracleParams& params) {
  if (field.rank() != 2) throw ShapeError("sinter_oracle: expected [H,W], got " + shape_string(field.shape()));
  const OracleSchedule sched = oracle_schedule(cond, params);
  const auto surface = bed_surface_row(field);
  if (!surface) return field;

  const std::size_t rows = field.dim(0);
  const std::size_t cols = field.dim(1);
  const std::size_t r0 = *surface;
  const std::size_t r1 = std::min(rows, r0 + sched.depth);  // rows [r0, r1) evolve

  std::vector<double> f(field.values().begin(), field.values().end());
  std::vector<double> weight(r1 - r0);
  for (std::size_t r = r0; r < r1; ++r) {
    weight[r - r0] = params.alpha * (1.0 - static_cast<double>(r - r0) / static_cast<double>(sched.depth));
  }
  std::vector<double> next(f.size());
  auto at = [&](std::ptrdiff_t r, std::ptrdiff_t c) {
    r = std::clamp<std::ptrdiff_t>(r, 0, static_cast<std::ptrdiff_t>(rows) - 1);
    c = std::clamp<std::ptrdiff_t>(c, 0, static_cast<std::ptrdiff_t>(cols) - 1);
    return f[static_cast<std::size_t>(r) * cols + static_cast<std::size_t>(c)];
  };
  for (std::size_t k = 0; k < sched.iterations; ++k) {
    for (std::size_t r = r0; r < r1; ++r) {
      const double w = weight[r - r0];
      for (std::size_t c = 0; c < cols; ++c) {
        double sum = 0.0;
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            sum += at(static_cast<std::ptrdiff_t>(r) + dr, static_cast<std::ptrdiff_t>(c) + dc);
          }
        }
        const double cur = f[r * cols + c];
        next[r * cols + c] = (1.0 - w) * cur + w * (sum / 9.0);
      }
    }
    for (std::size_t r = r0; r < r1; ++r) {
      std::copy_n(next.begin() + r * cols, cols, f.begin() + r * cols);
    }
  }
  Tensor out = field;
  for (std::size_t r = r0; r < r1; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = f[r * cols + c] >= 0.5 ? 1.0f : 0.0f;
  }
  return out;
}

}  // namespace ynet
