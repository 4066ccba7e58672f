#include "ynet/patch.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <string>

#include "ynet/errors.hpp"
#include "ynet/random.hpp"
#include "ynet/sinter_oracle.hpp"

namespace ynet {

namespace {

void require_length(std::size_t length, std::size_t window, const char* who) {
  if (window == 0) throw std::invalid_argument(std::string(who) + ": window must be positive");
  if (length < window) {
    throw RangeError(std::string(who) + ": track length " + std::to_string(length) +
                     " is shorter than the " + std::to_string(window) + " px window");
  }
}

Tensor copy_block(const Tensor& src, std::size_t row, std::size_t col, std::size_t rows,
                  std::size_t cols) {
  Tensor out({rows, cols});
  const std::size_t width = src.dim(1);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(src.data() + (row + r) * width + col, cols, out.data() + r * cols);
  }
  return out;
}

}  // namespace

std::vector<std::size_t> crop_offsets(std::size_t length, const CropPlan& plan) {
  require_length(length, plan.window, "crop");
  if (plan.stride == 0) throw std::invalid_argument("crop: stride must be positive");
  std::vector<std::size_t> out;
  for (std::size_t x = 0; x + plan.window <= length; x += plan.stride) out.push_back(x);
  return out;
}

std::size_t crop_count(std::size_t length, const CropPlan& plan) {
  require_length(length, plan.window, "crop");
  if (plan.stride == 0) throw std::invalid_argument("crop: stride must be positive");
  return (length - plan.window) / plan.stride + 1;
}

std::size_t dataset_pair_count(std::size_t conditions, std::size_t tracks, std::size_t length,
                               const CropPlan& plan) {
  return conditions * tracks * crop_count(length, plan);
}

std::vector<SamplePair> crop_track(const Tensor& track_in, const Tensor& track_out,
                                   const Condition& cond, const CropPlan& plan) {
  if (track_in.rank() != 2 || track_in.shape() != track_out.shape()) {
    throw ShapeError("crop_track: need two [H,L] tracks of equal shape, got " +
                     shape_string(track_in.shape()) + " and " + shape_string(track_out.shape()));
  }
  const auto offsets = crop_offsets(track_in.dim(1), plan);
  const std::size_t top = bed_surface_row(track_in).value_or(0);
  if (track_in.dim(0) < top + plan.window) {
    throw RangeError("crop_track: only " + std::to_string(track_in.dim(0) - top) +
                     " rows below the bed surface, need " + std::to_string(plan.window));
  }
  std::vector<SamplePair> pairs;
  pairs.reserve(offsets.size());
  for (std::size_t x : offsets) {
    pairs.push_back({copy_block(track_in, top, x, plan.window, plan.window),
                     copy_block(track_out, top, x, plan.window, plan.window), cond});
  }
  return pairs;
}

std::vector<std::size_t> tile_offsets(std::size_t length, std::size_t window) {
  require_length(length, window, "tiling");
  std::vector<std::size_t> out;
  for (std::size_t x = 0; x + window <= length; x += window) out.push_back(x);
  if (length % window != 0) out.push_back(length - window);
  return out;
}

Tensor infer_window(const YNet& model, const Tensor& window, const Condition& cond,
                    InferenceStats* stats) {
  const std::size_t size = model.config().input_size;
  if (window.rank() != 2 || window.dim(0) != size) {
    throw ShapeError("infer_window: expected [" + std::to_string(size) + ",L], got " +
                     shape_string(window.shape()));
  }
  const auto offsets = tile_offsets(window.dim(1), size);
  const auto norm = cond.normalized();
  const Tensor conds({1, 2}, std::vector<float>{static_cast<float>(norm[0]), static_cast<float>(norm[1])});
  Tensor out(window.shape());
  const std::size_t width = window.dim(1);
  const auto start = std::chrono::steady_clock::now();
  // One tile per call: a tile's output never depends on its neighbours.
  for (std::size_t x : offsets) {
    const Tensor tile = copy_block(window, 0, x, size, size).reshaped({1, 1, size, size});
    const Tensor pred = model.predict(tile, conds);
    for (std::size_t r = 0; r < size; ++r) {
      std::copy_n(pred.data() + r * size, size, out.data() + r * width + x);
    }
  }
  if (stats) {
    stats->frames += offsets.size();
    stats->seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return out;
}

Tensor infer_track(const YNet& model, const Tensor& track, const Condition& cond,
                   InferenceStats* stats) {
  if (track.rank() != 2) throw ShapeError("infer_track: expected [H,L], got " + shape_string(track.shape()));
  const std::size_t size = model.config().input_size;
  require_length(track.dim(1), size, "infer_track");
  const std::size_t top = bed_surface_row(track).value_or(0);
  if (track.dim(0) < top + size) {
    throw RangeError("infer_track: only " + std::to_string(track.dim(0) - top) +
                     " rows below the bed surface, need " + std::to_string(size));
  }
  const Tensor window = copy_block(track, top, 0, size, track.dim(1));
  const Tensor pred = infer_window(model, window, cond, stats);
  Tensor out = track;
  std::copy_n(pred.data(), pred.size(), out.data() + top * track.dim(1));
  return out;
}

std::size_t layer_count(std::size_t height, std::size_t layer_height) {
  if (layer_height == 0) throw std::invalid_argument("layer height must be positive");
  return (height + layer_height - 1) / layer_height;
}

Tensor deposit_layer(const Tensor& mask_band, const ComponentSpec& spec, std::uint64_t seed) {
  if (mask_band.rank() != 2) throw ShapeError("deposit_layer: expected [rows,W] mask");
  if (spec.segment_length_px == 0) throw std::invalid_argument("deposit_layer: segment length must be positive");
  const std::size_t rows = mask_band.dim(0);
  const std::size_t width = mask_band.dim(1);
  Tensor band({rows, width});
  for (std::size_t x0 = 0, j = 0; x0 < width; x0 += spec.segment_length_px, ++j) {
    const std::size_t cols = std::min(spec.segment_length_px, width - x0);
    // A segment narrower than the widest disk still fills: disks overhanging
    // its edges are clipped to it.
    std::vector<double> surface(cols, 0.0);
    Rng rng(derive_seed(seed, "segment", j));
    const auto particles = rain(surface, 0.0, static_cast<double>(cols), static_cast<double>(rows),
                                spec.mean_diameter_px, spec.std_diameter_px, rng);
    Tensor segment({rows, cols});
    rasterize(particles, static_cast<double>(rows), segment);
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(segment.data() + r * cols, cols, band.data() + r * width + x0);
    }
  }
  for (std::size_t i = 0; i < band.size(); ++i) {
    if (mask_band[i] == 0.0f) band[i] = 0.0f;
  }
  return band;
}

Tensor component_window(const Tensor& raster, std::size_t top, std::size_t rows) {
  if (raster.rank() != 2) throw ShapeError("component_window: expected [H,W] raster");
  const std::size_t height = raster.dim(0);
  const std::size_t width = raster.dim(1);
  Tensor out({rows, width}, 1.0f);
  for (std::size_t r = 0; r < rows && top + r < height; ++r) {
    std::copy_n(raster.data() + (top + r) * width, width, out.data() + r * width);
  }
  return out;
}

ComponentResult simulate_component(const YNet& model, const ComponentSpec& spec,
                                   const Condition& cond, std::uint64_t seed) {
  const Tensor& mask = spec.mask;
  if (mask.rank() != 2) throw ShapeError("simulate_component: mask must be [H,W], got " + shape_string(mask.shape()));
  const std::size_t size = model.config().input_size;
  require_length(mask.dim(1), size, "simulate_component");
  const std::size_t height = mask.dim(0);
  const std::size_t width = mask.dim(1);

  ComponentResult result;
  result.raster = Tensor({height, width});
  result.layers = layer_count(height, spec.layer_height_px);
  Tensor& raster = result.raster;
  for (std::size_t l = 0; l < result.layers; ++l) {
    const std::size_t bottom = height - l * spec.layer_height_px;
    const std::size_t top = bottom - std::min(spec.layer_height_px, bottom);
    const Tensor band = deposit_layer(copy_block(mask, top, 0, bottom - top, width), spec,
                                      derive_seed(seed, "layer", l));
    std::copy_n(band.data(), band.size(), raster.data() + top * width);

    const Tensor pred = infer_window(model, component_window(raster, top, size), cond, &result.stats);
    for (std::size_t r = 0; r < size && top + r < height; ++r) {
      for (std::size_t c = 0; c < width; ++c) {
        const std::size_t i = (top + r) * width + c;
        if (mask[i] != 0.0f) raster[i] = pred[r * width + c] >= 0.5f ? 1.0f : 0.0f;
      }
    }
  }
  return result;
}

}  // namespace ynet
