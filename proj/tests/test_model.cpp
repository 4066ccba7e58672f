#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include "support.hpp"
#include "ynet/errors.hpp"
#include "ynet/model.hpp"

using namespace ynet;

namespace {

YNetConfig tiny(MergeStrategy merge = MergeStrategy::gating) {
  YNetConfig c;
  c.scale = {1, 8};
  c.merge = merge;
  return c;
}

Tensor random_fields(std::size_t n, std::size_t size, Rng& rng) {
  return test::random_tensor<float>({n, 1, size, size}, rng, 0.0, 1.0);
}

Tensor conds_of(std::initializer_list<float> v) {
  return Tensor({v.size() / 2, 2}, std::vector<float>(v));
}

// Infer-mode forward assembled directly from the layer functions, with the
// merge step replaced by `merge(bottleneck)`.
Tensor reference_forward(ModelWeights w, const YNetConfig& cfg, const Tensor& x0,
                         const std::function<Tensor(const Tensor&)>& merge) {
  auto block = [&](const std::string& conv, const std::string& bn, const Tensor& x) {
    Tensor z = conv2d(x, w.at(conv + ".weight"), Tensor(), 1).first;
    z = batchnorm(z, w.at(bn + ".gamma"), w.at(bn + ".beta"), w.at(bn + ".running_mean"),
                  w.at(bn + ".running_var"), Mode::infer)
            .first;
    return relu(z);
  };
  std::vector<Tensor> skips;
  Tensor x = x0;
  for (std::size_t s = 0; s < cfg.stages; ++s) {
    const std::string p = "enc" + std::to_string(s);
    x = block(p + ".conv0", p + ".bn0", x);
    x = block(p + ".conv1", p + ".bn1", x);
    skips.push_back(x);
    x = maxpool2(x).first;
  }
  x = merge(x);
  for (std::size_t l = cfg.stages; l-- > 0;) {
    const std::string p = "dec" + std::to_string(l);
    x = concat_channels(upsample2(x), skips[l]);
    x = block(p + ".conv0", p + ".bn0", x);
    x = block(p + ".conv1", p + ".bn1", x);
  }
  return sigmoid(conv2d(x, w.at("head.weight"), w.at("head.bias"), 0).first);
}

// Non-trivial batch-norm statistics so infer mode is not an identity.
void perturb_running_stats(ModelWeights& w, Rng& rng) {
  for (auto& e : w.entries()) {
    if (e.name.ends_with(".running_mean")) e.tensor = test::random_tensor<float>(e.tensor.shape(), rng, -0.2, 0.2);
    if (e.name.ends_with(".running_var")) e.tensor = test::random_tensor<float>(e.tensor.shape(), rng, 0.5, 2.0);
  }
}

void force_gate(YNet& model, float bias) {
  model.weights().at("mlp.fc1.weight").fill(0.0f);
  model.weights().at("mlp.fc1.bias").fill(bias);
}

std::string put_u32(std::uint32_t v) {
  std::string s(4, '\0');
  for (int i = 0; i < 4; ++i) s[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  return s;
}

WeightsFormatError::Kind load_error_kind(std::string_view bytes) {
  try {
    deserialize_weights(bytes);
  } catch (const WeightsFormatError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return WeightsFormatError::Kind::io;
}

}  // namespace

// --------------------------------------------------------------- structure

TEST(Config, DefaultShapes) {
  const YNetConfig c;
  EXPECT_EQ(c.gate_size(), 256u);
  EXPECT_EQ(c.bottleneck_size(), 8u);
  EXPECT_EQ(c.encoder_channels(0), 32u);
  EXPECT_EQ(c.encoder_channels(3), 256u);
  std::vector<std::size_t> dec;
  for (std::size_t l = 4; l-- > 0;) dec.push_back(c.decoder_channels(l));
  EXPECT_EQ(dec, (std::vector<std::size_t>{128, 64, 32, 32}));
}

TEST(Config, InvalidRejected) {
  YNetConfig c;
  c.input_size = 100;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.scale = {1, 64};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_THROW(YNet::build(c, 1), std::invalid_argument);
  EXPECT_THROW(parse_merge_strategy("average"), std::invalid_argument);
  EXPECT_THROW(ChannelScale::parse("1/0"), std::invalid_argument);
  EXPECT_EQ(ChannelScale::parse("1/4").str(), "1/4");
}

TEST(Model, DefaultArchitectureShapes) {
  YNet model = YNet::build(YNetConfig{}, 1);
  const auto& w = model.weights();
  EXPECT_EQ(w.at("mlp.fc0.weight").shape(), (Shape{128, 2}));
  EXPECT_EQ(w.at("mlp.fc1.weight").shape(), (Shape{256, 128}));
  Rng rng(1);
  const auto pass = model.forward(random_fields(1, 128, rng), conds_of({0.3f, 0.6f}), Mode::infer);
  EXPECT_EQ(pass.dropped.shape(), (Shape{1, 256, 8, 8}));
  EXPECT_EQ(pass.prediction.shape(), (Shape{1, 1, 128, 128}));
  for (float p : pass.prediction.values()) {
    EXPECT_GT(p, 0.0f);
    EXPECT_LT(p, 1.0f);
  }
}

TEST(Model, WeightOrderIsDocumented) {
  const auto layout = weight_layout(tiny(MergeStrategy::flatten_concat));
  EXPECT_EQ(layout.front().first, "enc0.conv0.weight");
  EXPECT_EQ(layout[1].first, "enc0.bn0.gamma");
  std::vector<std::string> names;
  for (const auto& [n, s] : layout) names.push_back(n);
  auto pos = [&](const std::string& n) { return std::find(names.begin(), names.end(), n) - names.begin(); };
  EXPECT_LT(pos("enc3.bn1.running_var"), pos("mlp.fc0.weight"));
  EXPECT_LT(pos("mlp.fc1.bias"), pos("merge.fc.weight"));
  EXPECT_LT(pos("merge.fc.bias"), pos("dec3.conv0.weight"));
  EXPECT_LT(pos("dec3.bn1.running_var"), pos("dec0.conv0.weight"));
  EXPECT_EQ(names.back(), "head.bias");
  EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), names.size());
}

TEST(Model, SameSeedSameWeights) {
  EXPECT_EQ(YNet::build(tiny(), 5).weights(), YNet::build(tiny(), 5).weights());
  EXPECT_FALSE(YNet::build(tiny(), 5).weights() == YNet::build(tiny(), 6).weights());
}

TEST(Model, ParameterCountsMatchAcrossPaths) {
  for (auto m : {MergeStrategy::gating, MergeStrategy::flatten_concat, MergeStrategy::flatten_add}) {
    EXPECT_EQ(YNet::build(tiny(m), 1).parameter_count(), parameter_count(tiny(m)));
  }
}

TEST(Model, GatingHasFewerParametersThanFlattenConcat) {
  YNetConfig g, f;
  f.merge = MergeStrategy::flatten_concat;
  // The merge layer alone is 16384 x (16384 + 256) weights plus 16384 biases.
  EXPECT_EQ(parameter_count(f) - parameter_count(g), 16384u * (16384u + 256u) + 16384u);
  EXPECT_LT(parameter_count(g), parameter_count(f));
}

TEST(Model, InferConfigRoundTrip) {
  for (auto m : {MergeStrategy::gating, MergeStrategy::flatten_concat, MergeStrategy::flatten_add}) {
    const YNet model = YNet::build(tiny(m), 3);
    const YNetConfig c = infer_config(model.weights());
    EXPECT_EQ(c.merge, m);
    EXPECT_EQ(c.width(), 4u);
    EXPECT_EQ(weight_layout(c), weight_layout(tiny(m)));
  }
}

TEST(Model, RejectsOutOfRangeConditionAndBadShapes) {
  YNet model = YNet::build(tiny(), 1);
  Rng rng(2);
  const Tensor x = random_fields(1, 128, rng);
  EXPECT_THROW(model.forward(x, conds_of({1.2f, 0.5f}), Mode::infer), RangeError);
  EXPECT_THROW(model.forward(x, conds_of({0.5f, -0.01f}), Mode::infer), RangeError);
  EXPECT_THROW(model.forward(random_fields(1, 64, rng), conds_of({0.5f, 0.5f}), Mode::infer), ShapeError);
  EXPECT_THROW(model.forward(x, conds_of({0.5f, 0.5f}), Mode::train), std::invalid_argument);
}

TEST(Model, InferIsDeterministic) {
  YNet model = YNet::build(tiny(), 1);
  Rng rng(3);
  const Tensor x = random_fields(2, 128, rng);
  const Tensor c = conds_of({0.1f, 0.2f, 0.9f, 0.4f});
  EXPECT_EQ(model.predict(x, c), model.predict(x, c));
}

TEST(Model, ConditionChangesPrediction) {
  YNet model = YNet::build(tiny(), 4);
  Rng rng(4);
  const Tensor x = random_fields(1, 128, rng);
  EXPECT_FALSE(model.predict(x, conds_of({0.0f, 0.0f})) == model.predict(x, conds_of({1.0f, 1.0f})));
}

TEST(Model, ZeroGateRemovesBottleneckContent) {
  YNet model = YNet::build(tiny(), 5);
  Rng rng(5);
  perturb_running_stats(model.weights(), rng);
  force_gate(model, -1000.0f);
  const Tensor x = random_fields(1, 128, rng);
  const Tensor out = model.predict(x, conds_of({0.2f, 0.7f}));
  // Decoder sees only zero maps plus skips, whatever the condition.
  EXPECT_EQ(out, model.predict(x, conds_of({0.9f, 0.1f})));
  const Tensor ref = reference_forward(model.weights(), model.config(), x,
                                       [](const Tensor& b) { return Tensor::zeros_like(b); });
  EXPECT_EQ(out, ref);
}

TEST(Model, UnitGateEqualsNetworkWithoutMerge) {
  YNet model = YNet::build(tiny(), 6);
  Rng rng(6);
  perturb_running_stats(model.weights(), rng);
  force_gate(model, 1000.0f);
  const Tensor x = random_fields(1, 128, rng);
  const Tensor ref = reference_forward(model.weights(), model.config(), x, [](const Tensor& b) { return b; });
  EXPECT_EQ(model.predict(x, conds_of({0.4f, 0.4f})), ref);
}

// ----------------------------------------------------------------- backward

TEST(Loss, PerfectPredictionNearZero) {
  const Tensor t({1, 1, 4, 4}, std::vector<float>{1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 1, 0, 0, 0, 1, 1});
  EXPECT_LE(binary_cross_entropy(t, t), 1e-6f);
  EXPECT_THROW(binary_cross_entropy(t, Tensor({1, 1, 4, 5})), ShapeError);
}

TEST(Backward, HalfTargetAtHalfPredictionIsStationary) {
  YNet model = YNet::build(tiny(), 7);
  model.weights().at("head.weight").fill(0.0f);  // logits 0, p = 0.5 everywhere
  Rng rng(7);
  Rng drop(8);
  const auto pass = model.forward(random_fields(2, 128, rng), conds_of({0.1f, 0.2f, 0.3f, 0.4f}),
                                  Mode::train, &drop);
  const auto r = model.backward(pass, Tensor({2, 1, 128, 128}, 0.5f));
  EXPECT_EQ(r.grads.at("head.bias")[0], 0.0f);
  for (const auto& e : r.grads.entries()) {
    for (float g : e.tensor.values()) ASSERT_EQ(g, 0.0f) << e.name;
  }
}

TEST(Backward, EveryLearnableTensorGetsGradient) {
  for (auto m : {MergeStrategy::gating, MergeStrategy::flatten_concat, MergeStrategy::flatten_add}) {
    YNet model = YNet::build(tiny(m), 9);
    Rng rng(10);
    Rng drop(11);
    const auto pass = model.forward(random_fields(2, 128, rng), conds_of({0.1f, 0.8f, 0.6f, 0.3f}),
                                    Mode::train, &drop);
    const Tensor target = test::random_tensor<float>({2, 1, 128, 128}, rng, 0.0, 1.0);
    const auto r = model.backward(pass, target);
    EXPECT_TRUE(std::isfinite(r.loss));
    for (const auto& e : r.grads.entries()) {
      float mx = 0.0f;
      for (float g : e.tensor.values()) mx = std::max(mx, std::abs(g));
      if (ModelWeights::is_buffer(e.name)) {
        EXPECT_EQ(mx, 0.0f) << e.name;
      } else {
        EXPECT_GT(mx, 0.0f) << to_string(m) << " " << e.name;
      }
    }
  }
}

TEST(Backward, SampledWeightsMatchFiniteDifferences) {
  for (auto m : {MergeStrategy::gating, MergeStrategy::flatten_concat}) {
    YNet64 model = YNet::build(tiny(m), 12).cast<double>();
    Rng rng(13);
    const Tensor64 x = test::random_tensor<double>({2, 1, 128, 128}, rng, 0.0, 1.0);
    const Tensor64 c({2, 2}, std::vector<double>{0.2, 0.7, 0.9, 0.4});
    const Tensor64 t = test::random_tensor<double>({2, 1, 128, 128}, rng, 0.0, 1.0);
    auto loss = [&] {
      Rng drop(14);
      return binary_cross_entropy(model.forward(x, c, Mode::train, &drop).prediction, t);
    };
    Rng drop(14);
    const auto grads = model.backward(model.forward(x, c, Mode::train, &drop), t).grads;
    std::vector<std::size_t> learnable;
    for (std::size_t i = 0; i < grads.size(); ++i) {
      if (!ModelWeights::is_buffer(grads.entries()[i].name)) learnable.push_back(i);
    }
    for (int k = 0; k < 20; ++k) {
      const std::size_t ti = learnable[std::size_t(uniform01(rng) * learnable.size())];
      auto& w = model.weights().entries()[ti].tensor;
      const std::size_t j = std::size_t(uniform01(rng) * w.size());
      // ReLU and max-pool kinks crossed by the step spoil a single central
      // difference now and then; a wrong gradient disagrees at every step.
      const double saved = w[j];
      double best = std::numeric_limits<double>::infinity(), fd = 0.0;
      for (double h : {1e-6, 1e-7, 1e-8}) {
        w[j] = saved + h;
        const double up = loss();
        w[j] = saved - h;
        const double down = loss();
        w[j] = saved;
        const double d = (up - down) / (2 * h);
        const double e = test::rel_err(d, grads.entries()[ti].tensor[j], 1e-10);
        if (e < best) best = e, fd = d;
      }
      EXPECT_LE(best, 1e-3)
          << grads.entries()[ti].name << "[" << j << "] fd " << fd << " analytic "
          << grads.entries()[ti].tensor[j];
    }
  }
}

TEST(Backward, RejectsMismatchedTarget) {
  YNet model = YNet::build(tiny(), 15);
  Rng rng(16);
  const auto pass = model.forward(random_fields(1, 128, rng), conds_of({0.5f, 0.5f}), Mode::infer);
  EXPECT_THROW(model.backward(pass, Tensor({2, 1, 128, 128})), ShapeError);
  EXPECT_THROW(YNet::build(tiny(MergeStrategy::flatten_add), 1).backward(pass, Tensor({1, 1, 128, 128})),
               std::invalid_argument);
}

// ---------------------------------------------------------------- weights io

TEST(Weights, RoundTripIsBitIdentical) {
  const YNet model = YNet::build(tiny(MergeStrategy::flatten_add), 17);
  const auto path = std::filesystem::temp_directory_path() / "ynet_test_roundtrip.ynw";
  save_weights(model.weights(), path);
  const ModelWeights loaded = load_weights(path);
  EXPECT_EQ(loaded, model.weights());
  EXPECT_EQ(serialize_weights(loaded), serialize_weights(model.weights()));
  std::filesystem::remove(path);
}

TEST(Weights, LayoutMatchesFormat) {
  ModelWeights w;
  w.add("ab", Tensor({2}, std::vector<float>{1.0f, -2.0f}));
  const std::string bytes = serialize_weights(w);
  std::string expect = "YNW1" + put_u32(1) + put_u32(2) + "ab" + put_u32(1) + put_u32(2);
  const float vals[2] = {1.0f, -2.0f};
  expect.append(reinterpret_cast<const char*>(vals), 8);  // little-endian host
  EXPECT_EQ(bytes, expect);
}

TEST(Weights, CorruptionKinds) {
  const YNet model = YNet::build(tiny(), 18);
  const std::string good = serialize_weights(model.weights());
  std::string bad = good;
  bad[0] = 'X';
  EXPECT_EQ(load_error_kind(bad), WeightsFormatError::Kind::bad_magic);
  EXPECT_EQ(load_error_kind(good.substr(0, good.size() - 1)), WeightsFormatError::Kind::truncated_payload);
  EXPECT_EQ(load_error_kind(good.substr(0, 6)), WeightsFormatError::Kind::truncated_payload);
  EXPECT_EQ(load_error_kind(good + "x"), WeightsFormatError::Kind::trailing_bytes);

  const std::string entry = put_u32(1) + "a" + put_u32(1) + put_u32(1) + std::string(4, '\0');
  EXPECT_EQ(load_error_kind("YNW1" + put_u32(2) + entry + entry), WeightsFormatError::Kind::duplicate_name);
  EXPECT_EQ(load_error_kind("YNW1" + put_u32(1) + put_u32(1) + "a" + put_u32(0)),
            WeightsFormatError::Kind::invalid_rank);

  ModelWeights dup;
  dup.add("x", Tensor({1}));
  EXPECT_THROW(dup.add("x", Tensor({1})), WeightsFormatError);
}

TEST(Weights, TruncatedFileOnDisk) {
  const YNet model = YNet::build(tiny(), 19);
  const auto path = std::filesystem::temp_directory_path() / "ynet_test_truncated.ynw";
  save_weights(model.weights(), path);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 1);
  try {
    load_weights(path);
    ADD_FAILURE() << "truncated file accepted";
  } catch (const WeightsFormatError& e) {
    EXPECT_EQ(e.kind(), WeightsFormatError::Kind::truncated_payload);
  }
  std::filesystem::remove(path);
  try {
    load_weights(path);
    ADD_FAILURE() << "missing file accepted";
  } catch (const WeightsFormatError& e) {
    EXPECT_EQ(e.kind(), WeightsFormatError::Kind::io);
  }
}

TEST(Weights, RejectsTableNotMatchingConfig) {
  const ModelWeights full = YNet::build(tiny(), 20).weights();
  ModelWeights w;
  for (std::size_t i = 0; i + 1 < full.size(); ++i) w.add(full.entries()[i].name, full.entries()[i].tensor);
  EXPECT_THROW(YNet(tiny(), w), std::invalid_argument);
  EXPECT_THROW(YNet{w}, std::invalid_argument);
}
