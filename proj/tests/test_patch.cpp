#include <gtest/gtest.h>

#include "support.hpp"
#include "ynet/errors.hpp"
#include "ynet/patch.hpp"
#include "ynet/sinter_oracle.hpp"

using namespace ynet;

namespace {

const YNet& tiny_model() {
  static const YNet model = [] {
    YNetConfig cfg;
    cfg.scale = ChannelScale::parse("1/8");
    return YNet::build(cfg, 77);
  }();
  return model;
}

Tensor predict_tile(const Tensor& window, std::size_t offset, const Condition& cond) {
  Tensor field({1, 1, 128, 128});
  for (std::size_t r = 0; r < 128; ++r)
    for (std::size_t c = 0; c < 128; ++c) field.at(0, 0, r, c) = window.at(r, offset + c);
  const auto n = cond.normalized();
  const Tensor conds({1, 2}, std::vector<float>{float(n[0]), float(n[1])});
  return tiny_model().predict(field, conds);
}

Tensor random_binary(const Shape& shape, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(shape);
  for (auto& v : t.values()) v = uniform01(rng) < 0.5 ? 1.0f : 0.0f;
  return t;
}

}  // namespace

// ------------------------------------------------------------------ cropping

TEST(Crop, CountsForKnownLengths) {
  EXPECT_EQ(crop_count(700), 58u);
  EXPECT_EQ(crop_count(128), 1u);
  EXPECT_EQ(crop_count(138), 2u);
  EXPECT_EQ(crop_count(137), 1u);
  EXPECT_THROW(crop_count(127), RangeError);
  EXPECT_EQ(dataset_pair_count(1, 30, 700), 1740u);
  EXPECT_EQ(dataset_pair_count(100, 30, 700), 174000u);
}

TEST(Crop, CountMatchesEnumeration) {
  for (std::size_t length = 128; length <= 2000; ++length) {
    std::size_t n = 0;
    for (std::size_t x = 0; x + 128 <= length; x += 10) ++n;
    ASSERT_EQ(crop_count(length), n) << length;
    const auto offs = crop_offsets(length);
    ASSERT_EQ(offs.size(), n);
    EXPECT_EQ(offs.front(), 0u);
    EXPECT_LE(offs.back() + 128, length);
  }
}

TEST(Crop, PatchesStartAtSurfaceRow) {
  Tensor in({200, 300}), out({200, 300});
  for (std::size_t r = 40; r < 200; ++r)
    for (std::size_t c = 0; c < 300; ++c) {
      in.at(r, c) = float((r + c) % 2);
      out.at(r, c) = float((r * c) % 3 == 0);
    }
  const Condition cond(30, 1.0);
  const auto pairs = crop_track(in, out, cond);
  ASSERT_EQ(pairs.size(), crop_count(300));
  for (std::size_t k : {std::size_t(0), pairs.size() - 1}) {
    const std::size_t x = k * 10;
    EXPECT_EQ(pairs[k].input.shape(), (Shape{128, 128}));
    EXPECT_EQ(pairs[k].cond, cond);
    for (std::size_t r = 0; r < 128; ++r)
      for (std::size_t c = 0; c < 128; ++c) {
        ASSERT_EQ(pairs[k].input.at(r, c), in.at(40 + r, x + c));
        ASSERT_EQ(pairs[k].target.at(r, c), out.at(40 + r, x + c));
      }
  }
}

TEST(Crop, TooShortBelowSurfaceRejected) {
  Tensor in({200, 300}), out({200, 300});
  in.at(100, 5) = 1.0f;
  EXPECT_THROW(crop_track(in, out, Condition(30, 1)), RangeError);
  EXPECT_THROW(crop_track(in, Tensor({200, 301}), Condition(30, 1)), ShapeError);
}

// -------------------------------------------------------------------- tiling

TEST(Tiles, OffsetsCoverTrack) {
  EXPECT_EQ(tile_offsets(700), (std::vector<std::size_t>{0, 128, 256, 384, 512, 572}));
  EXPECT_EQ(tile_offsets(256), (std::vector<std::size_t>{0, 128}));
  EXPECT_EQ(tile_offsets(128), (std::vector<std::size_t>{0}));
  EXPECT_THROW(tile_offsets(100), RangeError);
  for (std::size_t length = 128; length < 1200; length += 37) {
    std::vector<int> hit(length, 0);
    for (std::size_t o : tile_offsets(length))
      for (std::size_t c = o; c < o + 128; ++c) ++hit[c];
    for (int h : hit) ASSERT_GE(h, 1);
  }
}

TEST(Infer, ConstantInputGivesUniformOutput) {
  const Tensor zero({128, 384});
  const Tensor pred = infer_window(tiny_model(), zero, Condition(30, 1));
  const Tensor tile = predict_tile(zero, 0, Condition(30, 1));
  for (std::size_t r = 0; r < 128; ++r)
    for (std::size_t c = 0; c < 384; ++c) ASSERT_EQ(pred.at(r, c), tile.at(0, 0, r, c % 128));
}

TEST(Infer, MultipleOfWindowIsConcatenationOfTiles) {
  const Tensor window = random_binary({128, 256}, 3);
  const Condition cond(37, 0.8);
  InferenceStats stats;
  const Tensor pred = infer_window(tiny_model(), window, cond, &stats);
  EXPECT_EQ(stats.frames, 2u);
  EXPECT_GT(stats.seconds, 0.0);
  for (std::size_t o : {0u, 128u}) {
    const Tensor tile = predict_tile(window, o, cond);
    for (std::size_t r = 0; r < 128; ++r)
      for (std::size_t c = 0; c < 128; ++c) ASSERT_EQ(pred.at(r, o + c), tile.at(0, 0, r, c));
  }
}

TEST(Infer, RemainderTileOverwritesOverlap) {
  const Tensor window = random_binary({128, 200}, 4);
  const Condition cond(27, 2.0);
  const Tensor pred = infer_window(tiny_model(), window, cond);
  const Tensor last = predict_tile(window, 72, cond);
  const Tensor first = predict_tile(window, 0, cond);
  for (std::size_t r = 0; r < 128; ++r) {
    for (std::size_t c = 0; c < 72; ++c) ASSERT_EQ(pred.at(r, c), first.at(0, 0, r, c));
    for (std::size_t c = 72; c < 200; ++c) ASSERT_EQ(pred.at(r, c), last.at(0, 0, r, c - 72));
  }
}

TEST(Infer, TrackReplacesRowsBelowSurfaceOnly) {
  Tensor track = random_binary({180, 256}, 5);
  for (std::size_t r = 0; r < 20; ++r)
    for (std::size_t c = 0; c < 256; ++c) track.at(r, c) = 0.0f;
  const Condition cond(33, 1.2);
  const Tensor out = infer_track(tiny_model(), track, cond);
  EXPECT_EQ(out, infer_track(tiny_model(), track, cond));
  const Tensor window_pred = [&] {
    Tensor w({128, 256});
    for (std::size_t r = 0; r < 128; ++r)
      for (std::size_t c = 0; c < 256; ++c) w.at(r, c) = track.at(20 + r, c);
    return infer_window(tiny_model(), w, cond);
  }();
  for (std::size_t r = 0; r < 180; ++r)
    for (std::size_t c = 0; c < 256; ++c) {
      const bool inside = r >= 20 && r < 148;
      ASSERT_EQ(out.at(r, c), inside ? window_pred.at(r - 20, c) : track.at(r, c));
    }
}

TEST(Infer, ShortOrMisshapenTrackRejected) {
  EXPECT_THROW(infer_track(tiny_model(), Tensor({100, 256}), Condition(30, 1)), RangeError);
  EXPECT_THROW(infer_window(tiny_model(), Tensor({64, 256}), Condition(30, 1)), ShapeError);
  EXPECT_THROW(infer_window(tiny_model(), Tensor({128, 100}), Condition(30, 1)), RangeError);
}

// ----------------------------------------------------------------- component

TEST(Component, LayerCount) {
  EXPECT_EQ(layer_count(22050, 70), 315u);
  EXPECT_EQ(layer_count(210, 70), 3u);
  EXPECT_EQ(layer_count(211, 70), 4u);
  EXPECT_EQ(layer_count(1, 70), 1u);
}

TEST(Component, WindowPadsWithBuildPlate) {
  const Tensor raster = random_binary({100, 130}, 6);
  const Tensor w = component_window(raster, 40, 128);
  EXPECT_EQ(w.shape(), (Shape{128, 130}));
  for (std::size_t r = 0; r < 128; ++r)
    for (std::size_t c = 0; c < 130; ++c)
      ASSERT_EQ(w.at(r, c), r + 40 < 100 ? raster.at(40 + r, c) : 1.0f);
}

TEST(Component, DepositStaysInsideMaskAndBand) {
  Tensor mask({70, 300});
  for (std::size_t r = 0; r < 70; ++r)
    for (std::size_t c = 50; c < 250; ++c) mask.at(r, c) = 1.0f;
  ComponentSpec spec;
  spec.segment_length_px = 100;
  const Tensor band = deposit_layer(mask, spec, 9);
  EXPECT_EQ(band.shape(), mask.shape());
  double solid = 0.0;
  for (std::size_t i = 0; i < band.size(); ++i) {
    if (mask[i] == 0.0f) ASSERT_EQ(band[i], 0.0f);
    solid += band[i];
  }
  EXPECT_GT(solid, 0.0);
  EXPECT_EQ(band, deposit_layer(mask, spec, 9));
}

TEST(Component, SingleLayerMatchesManualPipeline) {
  Tensor mask({70, 256});
  for (std::size_t r = 0; r < 70; ++r)
    for (std::size_t c = 30; c < 200; ++c) mask.at(r, c) = 1.0f;
  ComponentSpec spec;
  spec.mask = mask;
  const Condition cond(35, 1.0);
  const ComponentResult res = simulate_component(tiny_model(), spec, cond, 21);
  EXPECT_EQ(res.layers, 1u);
  EXPECT_EQ(res.stats.frames, 2u);

  const Tensor band = deposit_layer(mask, spec, derive_seed(21, "layer", 0));
  const Tensor pred = infer_window(tiny_model(), component_window(band, 0, 128), cond);
  for (std::size_t r = 0; r < 70; ++r)
    for (std::size_t c = 0; c < 256; ++c) {
      const float expect = mask.at(r, c) != 0.0f ? (pred.at(r, c) >= 0.5f ? 1.0f : 0.0f) : 0.0f;
      ASSERT_EQ(res.raster.at(r, c), expect) << r << "," << c;
    }
}

TEST(Component, NothingWrittenOutsideMask) {
  // An L-shaped part over three layers.
  Tensor mask({210, 300});
  for (std::size_t r = 0; r < 210; ++r)
    for (std::size_t c = 0; c < 300; ++c)
      if ((c >= 20 && c < 90) || (r >= 150 && c >= 20 && c < 280)) mask.at(r, c) = 1.0f;
  ComponentSpec spec;
  spec.mask = mask;
  const ComponentResult res = simulate_component(tiny_model(), spec, Condition(30, 1.5), 4);
  EXPECT_EQ(res.layers, 3u);
  EXPECT_EQ(res.stats.frames, 3u * tile_offsets(300).size());
  EXPECT_GT(res.stats.frames_per_second(), 0.0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == 0.0f) ASSERT_EQ(res.raster[i], 0.0f) << i;
    ASSERT_TRUE(res.raster[i] == 0.0f || res.raster[i] == 1.0f);
  }
}
