#include "ynet/powder_bed.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ynet {

namespace {

double truncated_normal(double mean, double stddev, Rng& rng) {
  for (;;) {
    const double z = standard_normal(rng);
    if (std::abs(z) <= 3.0) return mean + stddev * z;
  }
}

// Column index range whose pixel centres lie strictly within `radius` of x.
std::pair<std::ptrdiff_t, std::ptrdiff_t> covered_columns(double x, double radius,
                                                          std::size_t columns) {
  const auto first = static_cast<std::ptrdiff_t>(std::ceil(x - radius - 0.5));
  const auto last = static_cast<std::ptrdiff_t>(std::floor(x + radius - 0.5));
  return {std::max<std::ptrdiff_t>(first, 0),
          std::min<std::ptrdiff_t>(last, static_cast<std::ptrdiff_t>(columns) - 1)};
}

}  // namespace

std::vector<Particle> rain(std::span<double> surface, double x_begin, double x_end,
                           double target_height, double mean_diameter, double std_diameter,
                           Rng& rng) {
  std::vector<Particle> particles;
  if (surface.empty()) return particles;
  const std::size_t columns = surface.size();
  auto lowest = [&] { return *std::min_element(surface.begin(), surface.end()); };
  // Generous cap: a pathological spec should fail loudly rather than spin.
  const double area = (x_end - x_begin) * std::max(target_height, 1.0);
  const double disk = mean_diameter * mean_diameter;
  const std::size_t cap = 1000 + static_cast<std::size_t>(1000.0 * area / disk);

  while (lowest() < target_height) {
    if (particles.size() >= cap) throw std::runtime_error("rain: deposition did not converge");
    const double radius = 0.5 * truncated_normal(mean_diameter, std_diameter, rng);
    const double x = x_begin + uniform01(rng) * (x_end - x_begin);
    const auto [c0, c1] = covered_columns(x, radius, columns);
    if (c0 > c1) continue;
    double y = 0.0;
    for (auto c = c0; c <= c1; ++c) {
      const double dx = static_cast<double>(c) + 0.5 - x;
      y = std::max(y, surface[c] + std::sqrt(radius * radius - dx * dx));
    }
    for (auto c = c0; c <= c1; ++c) {
      const double dx = static_cast<double>(c) + 0.5 - x;
      surface[c] = std::max(surface[c], y + std::sqrt(radius * radius - dx * dx));
    }
    particles.push_back({x, y, radius});
  }
  return particles;
}

void rasterize(std::span<const Particle> particles, double top_y, BasicTensor<float>& field) {
  const std::size_t rows = field.dim(0);
  const std::size_t cols = field.dim(1);
  for (const Particle& p : particles) {
    const auto [c0, c1] = covered_columns(p.x, p.radius, cols);
    const double r2 = p.radius * p.radius;
    // Rows whose centres top_y - r - 0.5 lie within the disk's vertical span.
    const auto r_first = std::max<std::ptrdiff_t>(
        0, static_cast<std::ptrdiff_t>(std::ceil(top_y - 0.5 - (p.y + p.radius))));
    const auto r_last = std::min<std::ptrdiff_t>(
        static_cast<std::ptrdiff_t>(rows) - 1,
        static_cast<std::ptrdiff_t>(std::floor(top_y - 0.5 - (p.y - p.radius))));
    for (auto r = r_first; r <= r_last; ++r) {
      const double dy = top_y - static_cast<double>(r) - 0.5 - p.y;
      for (auto c = c0; c <= c1; ++c) {
        const double dx = static_cast<double>(c) + 0.5 - p.x;
        if (dx * dx + dy * dy <= r2) field.at(r, c) = 1.0f;
      }
    }
  }
}

Tensor rain_deposit(const PowderBedSpec& spec) {
  const double widest = spec.mean_diameter_px + 3.0 * spec.std_diameter_px;
  if (spec.mean_diameter_px <= 0.0 || spec.std_diameter_px < 0.0 ||
      widest > static_cast<double>(spec.track_length_px)) {
    throw std::invalid_argument("rain_deposit: disks up to " + std::to_string(widest) +
                                " px do not fit a " + std::to_string(spec.track_length_px) +
                                " px track");
  }
  if (spec.height_px == 0) throw std::invalid_argument("rain_deposit: height must be positive");
  Rng rng(spec.seed);
  std::vector<double> surface(spec.track_length_px, 0.0);
  const auto particles = rain(surface, 0.0, static_cast<double>(spec.track_length_px),
                              spec.target_fill_height_px, spec.mean_diameter_px,
                              spec.std_diameter_px, rng);
  Tensor field({spec.height_px, spec.track_length_px});
  // Floor-anchored: the bottom row's centre is 0.5 px above the floor.
  // Vertical drop without rolling leaves a surface far rougher than the
  // window, so material above the top row is cut off.
  rasterize(particles, static_cast<double>(spec.height_px), field);
  return field;
}

}  // namespace ynet
