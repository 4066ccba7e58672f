#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ynet/condition.hpp"
#include "ynet/dataset.hpp"
#include "ynet/model.hpp"
#include "ynet/powder_bed.hpp"
#include "ynet/tensor.hpp"

namespace ynet {

/// Horizontal cropping of long tracks into square patches whose top row is
/// the bed surface row.
struct CropPlan {
  std::size_t window = 128;
  std::size_t stride = 10;
};

/// 0, stride, 2 stride, ... while the window fits. Throws RangeError if
/// length < window.
std::vector<std::size_t> crop_offsets(std::size_t length, const CropPlan& plan = {});
/// floor((length - window) / stride) + 1.
std::size_t crop_count(std::size_t length, const CropPlan& plan = {});
/// Total pairs produced by `conditions` x `tracks` tracks of `length` px.
std::size_t dataset_pair_count(std::size_t conditions, std::size_t tracks, std::size_t length,
                               const CropPlan& plan = {});

/// Crops both tracks [H,L] at the offsets of `plan`, rows starting at the
/// input's bed surface row (row 0 for an empty bed).
std::vector<SamplePair> crop_track(const Tensor& track_in, const Tensor& track_out,
                                   const Condition& cond, const CropPlan& plan = {});

/// Non-overlapped tiles 0, window, 2 window, ...; a remainder is covered by
/// a final tile right-aligned at length - window.
std::vector<std::size_t> tile_offsets(std::size_t length, std::size_t window = 128);

struct InferenceStats {
  std::size_t frames = 0;
  double seconds = 0.0;

  double frames_per_second() const { return seconds > 0.0 ? frames / seconds : 0.0; }
  InferenceStats& operator+=(const InferenceStats& o) {
    frames += o.frames;
    seconds += o.seconds;
    return *this;
  }
};

/// Runs the model over a [S,L] window (S = model input size) tile by tile
/// and stitches the probabilities, later tiles overwriting earlier ones.
Tensor infer_window(const YNet& model, const Tensor& window, const Condition& cond,
                    InferenceStats* stats = nullptr);

/// infer_window on the S rows starting at the bed surface row of a track
/// [H,L]; other rows are copied from the input.
Tensor infer_track(const YNet& model, const Tensor& track, const Condition& cond,
                   InferenceStats* stats = nullptr);

/// Layer-by-layer build of a masked component.
struct ComponentSpec {
  Tensor mask;  // [H,W], nonzero = inside
  std::size_t layer_height_px = 70;
  std::size_t segment_length_px = 700;
  double mean_diameter_px = 12.5;
  double std_diameter_px = 0.25;
};

std::size_t layer_count(std::size_t height, std::size_t layer_height);

/// Powder for one layer band: rain deposition from the band bottom up to the
/// band top, in independent segments of `segment_length_px` columns so that
/// seams form between them, rows clipped to the band and pixels outside
/// `mask_band` [rows,W] zeroed. Segment j draws from
/// derive_seed(seed, "segment", j).
Tensor deposit_layer(const Tensor& mask_band, const ComponentSpec& spec, std::uint64_t seed);

/// The `rows` rows of `raster` starting at `top`; rows past the bottom edge
/// read as solid (the build plate).
Tensor component_window(const Tensor& raster, std::size_t top, std::size_t rows);

struct ComponentResult {
  Tensor raster;  // [H,W] binary
  std::size_t layers = 0;
  InferenceStats stats;
};

/// For each layer bottom to top: deposit powder into the band, then infer a
/// window of model-input height whose top is the band top (so it includes
/// already sintered material below) and write the binarized result back
/// inside the mask. Layer l deposits with derive_seed(seed, "layer", l).
ComponentResult simulate_component(const YNet& model, const ComponentSpec& spec,
                                   const Condition& cond, std::uint64_t seed);

}  // namespace ynet
