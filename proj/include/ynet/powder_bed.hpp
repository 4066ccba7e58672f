#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ynet/random.hpp"
#include "ynet/tensor.hpp"

namespace ynet {

/// Powder bed geometry in pixels (2 um per pixel): 25 um mean diameter,
/// 0.5 um standard deviation.
struct PowderBedSpec {
  std::size_t track_length_px = 700;
  std::size_t height_px = 128;
  double mean_diameter_px = 12.5;
  double std_diameter_px = 0.25;
  double target_fill_height_px = 100.0;
  std::uint64_t seed = 0;
};

/// A deposited disk; y is the centre height above the deposition floor.
struct Particle {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.0;
};

/// Vertical-drop ("rain") deposition onto a column heightmap. `surface[c]`
/// holds the top of existing material in column c (pixel centre c + 0.5) and
/// is raised as disks land. Disks fall at uniform x in [x_begin, x_end) with
/// diameters from a normal truncated at +-3 sigma, and stop at first contact;
/// there is no rolling. Deposition ends once every column's surface reaches
/// `target_height`.
std::vector<Particle> rain(std::span<double> surface, double x_begin, double x_end,
                           double target_height, double mean_diameter, double std_diameter,
                           Rng& rng);

/// Sets every pixel whose centre lies inside a disk to 1. Pixel (r, c) has
/// centre (c + 0.5, top_y - r - 0.5) in deposition coordinates.
void rasterize(std::span<const Particle> particles, double top_y, BasicTensor<float>& field);

/// A full track [height_px, track_length_px] with values in {0,1}; the last
/// row sits on the deposition floor and material above row 0 is clipped.
/// Rows above the bed surface row are empty. Throws std::invalid_argument
/// when a disk could be wider than the track.
Tensor rain_deposit(const PowderBedSpec& spec);

}  // namespace ynet
