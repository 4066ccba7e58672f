#include "ynet/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "ynet/errors.hpp"

namespace ynet {

std::string_view to_string(MergeStrategy strategy) {
  switch (strategy) {
    case MergeStrategy::gating:
      return "gating";
    case MergeStrategy::flatten_concat:
      return "flatten_concat";
    case MergeStrategy::flatten_add:
      return "flatten_add";
  }
  return "unknown";
}

MergeStrategy parse_merge_strategy(std::string_view name) {
  for (MergeStrategy s :
       {MergeStrategy::gating, MergeStrategy::flatten_concat, MergeStrategy::flatten_add}) {
    if (name == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown merge strategy '" + std::string(name) +
                              "' (expected gating, flatten_concat or flatten_add)");
}

ChannelScale ChannelScale::parse(std::string_view text) {
  auto parse_int = [&](std::string_view part) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size() || v == 0) {
      throw std::invalid_argument("invalid channel scale '" + std::string(text) + "'");
    }
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return {parse_int(text), 1};
  return {parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1))};
}

std::string ChannelScale::str() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

std::size_t YNetConfig::width() const { return base_channels * scale.num / scale.den; }

std::size_t YNetConfig::embedding_size() const {
  return merge == MergeStrategy::flatten_add ? bottleneck_numel() : gate_size();
}

void YNetConfig::validate() const {
  auto fail = [](const std::string& why) { throw std::invalid_argument("invalid config: " + why); };
  if (stages < 1 || stages > 8) fail("stages must be 1-8");
  if (scale.num == 0 || scale.den == 0) fail("scale must be positive");
  if (base_channels * scale.num % scale.den != 0 || width() == 0) {
    fail("base_channels " + std::to_string(base_channels) + " times scale " + scale.str() +
         " is not a positive integer");
  }
  if (mlp_hidden == 0 || cond_dim == 0) fail("MLP widths must be positive");
  if (input_size == 0 || input_size % (std::size_t{1} << stages) != 0) {
    fail("input_size " + std::to_string(input_size) + " not divisible by 2^stages");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout rate must lie in [0,1)");
}

namespace {

std::string block_name(const char* part, std::size_t stage, std::size_t block) {
  return std::string(part) + std::to_string(stage) + (block == 0 ? ".conv0" : ".conv1");
}

std::string bn_name(const char* part, std::size_t stage, std::size_t block) {
  return std::string(part) + std::to_string(stage) + (block == 0 ? ".bn0" : ".bn1");
}

void add_block(std::vector<std::pair<std::string, Shape>>& out, const char* part,
               std::size_t stage, std::size_t block, std::size_t cin, std::size_t cout) {
  out.emplace_back(block_name(part, stage, block) + ".weight", Shape{cout, cin, 3, 3});
  const std::string bn = bn_name(part, stage, block);
  for (const char* t : {".gamma", ".beta", ".running_mean", ".running_var"}) {
    out.emplace_back(bn + t, Shape{cout});
  }
}

}  // namespace

std::vector<std::pair<std::string, Shape>> weight_layout(const YNetConfig& config) {
  config.validate();
  std::vector<std::pair<std::string, Shape>> out;
  std::size_t cin = 1;
  for (std::size_t s = 0; s < config.stages; ++s) {
    const std::size_t c = config.encoder_channels(s);
    add_block(out, "enc", s, 0, cin, c);
    add_block(out, "enc", s, 1, c, c);
    cin = c;
  }
  out.emplace_back("mlp.fc0.weight", Shape{config.mlp_hidden, config.cond_dim});
  out.emplace_back("mlp.fc0.bias", Shape{config.mlp_hidden});
  out.emplace_back("mlp.fc1.weight", Shape{config.embedding_size(), config.mlp_hidden});
  out.emplace_back("mlp.fc1.bias", Shape{config.embedding_size()});
  if (config.merge == MergeStrategy::flatten_concat) {
    const std::size_t flat = config.bottleneck_numel();
    out.emplace_back("merge.fc.weight", Shape{flat, flat + config.embedding_size()});
    out.emplace_back("merge.fc.bias", Shape{flat});
  }
  std::size_t below = config.gate_size();
  for (std::size_t l = config.stages; l-- > 0;) {
    const std::size_t c = config.decoder_channels(l);
    add_block(out, "dec", l, 0, below + config.encoder_channels(l), c);
    add_block(out, "dec", l, 1, c, c);
    below = c;
  }
  out.emplace_back("head.weight", Shape{1, below, 1, 1});
  out.emplace_back("head.bias", Shape{1});
  return out;
}

std::size_t parameter_count(const YNetConfig& config) {
  std::size_t count = 0;
  for (const auto& [name, shape] : weight_layout(config)) {
    if (!ModelWeights::is_buffer(name)) count += shape_numel(shape);
  }
  return count;
}

template <typename T>
YNetConfig infer_config(const BasicModelWeights<T>& weights) {
  auto fail = [](const std::string& why) {
    throw std::invalid_argument("weights do not describe a yNet: " + why);
  };
  YNetConfig config;
  if (!weights.contains("enc0.conv0.weight") || !weights.contains("mlp.fc0.weight") ||
      !weights.contains("mlp.fc1.weight")) {
    fail("missing encoder or MLP tensors");
  }
  std::size_t stages = 0;
  while (weights.contains("enc" + std::to_string(stages) + ".conv0.weight")) ++stages;
  config.stages = stages;
  config.base_channels = weights.at("enc0.conv0.weight").dim(0);
  config.scale = {};
  config.mlp_hidden = weights.at("mlp.fc0.weight").dim(0);
  config.cond_dim = weights.at("mlp.fc0.weight").dim(1);
  const std::size_t embedding = weights.at("mlp.fc1.weight").dim(0);
  const std::size_t gate = config.gate_size();
  auto input_for_flat = [&](std::size_t flat) {
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(double(flat) / gate)));
    if (side * side * gate != flat) fail("flattened bottleneck size is not square");
    return side << stages;
  };
  if (weights.contains("merge.fc.weight")) {
    config.merge = MergeStrategy::flatten_concat;
    config.input_size = input_for_flat(weights.at("merge.fc.weight").dim(0));
  } else if (embedding == gate) {
    config.merge = MergeStrategy::gating;
  } else {
    config.merge = MergeStrategy::flatten_add;
    config.input_size = input_for_flat(embedding);
  }
  const auto layout = weight_layout(config);
  if (layout.size() != weights.size()) fail("unexpected tensor count");
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& e = weights.entries()[i];
    if (e.name != layout[i].first || e.tensor.shape() != layout[i].second) {
      fail("tensor " + std::to_string(i) + " is '" + e.name + "' " + shape_string(e.tensor.shape()) +
           ", expected '" + layout[i].first + "' " + shape_string(layout[i].second));
    }
  }
  return config;
}

// ------------------------------------------------------------------ loss

namespace {

constexpr double kProbClamp = 1e-7;

}  // namespace

template <typename T>
T binary_cross_entropy(const BasicTensor<T>& prediction, const BasicTensor<T>& target) {
  if (prediction.shape() != target.shape()) {
    throw ShapeError("binary_cross_entropy: shape mismatch " + shape_string(prediction.shape()) +
                     " vs " + shape_string(target.shape()));
  }
  const T lo = static_cast<T>(kProbClamp);
  const T hi = T(1) - lo;
  T sum = T(0);
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const T p = std::clamp(prediction[i], lo, hi);
    const T t = target[i];
    sum -= t * std::log(p) + (T(1) - t) * std::log(T(1) - p);
  }
  return sum / static_cast<T>(prediction.size());
}

// ---------------------------------------------------------------- network

template <typename T>
BasicYNet<T> BasicYNet<T>::build(const YNetConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  BasicModelWeights<T> weights;
  for (auto& [name, shape] : weight_layout(config)) {
    BasicTensor<T> t(shape);
    if (name.ends_with(".weight")) {
      // He normal: fan-in is everything but the output axis.
      const double fan_in = static_cast<double>(t.size() / shape[0]);
      const double stddev = std::sqrt(2.0 / fan_in);
      for (auto& v : t.values()) v = static_cast<T>(stddev * standard_normal(rng));
    } else if (name.ends_with(".gamma") || name.ends_with(".running_var")) {
      t.fill(T(1));
    }
    weights.add(std::move(name), std::move(t));
  }
  return BasicYNet(config, std::move(weights));
}

template <typename T>
BasicYNet<T>::BasicYNet(YNetConfig config, BasicModelWeights<T> weights)
    : config_(config), weights_(std::move(weights)) {
  const auto layout = weight_layout(config_);
  bool ok = layout.size() == weights_.size();
  for (std::size_t i = 0; ok && i < layout.size(); ++i) {
    ok = weights_.entries()[i].name == layout[i].first &&
         weights_.entries()[i].tensor.shape() == layout[i].second;
  }
  if (!ok) throw std::invalid_argument("weight table does not match the configuration");
}

template <typename T>
BasicYNet<T>::BasicYNet(BasicModelWeights<T> weights)
    : config_(infer_config(weights)), weights_(std::move(weights)) {}

namespace {

template <typename T>
BasicTensor<T> conv_block_forward(BasicModelWeights<T>& w, const std::string& conv,
                                  const std::string& bn, const BasicTensor<T>& x, Mode mode,
                                  ConvBlockCache<T>& cache) {
  static const BasicTensor<T> no_bias;
  auto [z, conv_cache] = conv2d(x, w.at(conv + ".weight"), no_bias, 1);
  auto [y, bn_cache] = batchnorm(z, w.at(bn + ".gamma"), w.at(bn + ".beta"),
                                 w.at(bn + ".running_mean"), w.at(bn + ".running_var"), mode);
  cache.conv = std::move(conv_cache);
  cache.bn = std::move(bn_cache);
  cache.act = relu(y);
  return cache.act;
}

template <typename T>
BasicTensor<T> conv_block_backward(BasicModelWeights<T>& grads, const std::string& conv,
                                   const std::string& bn, const ConvBlockCache<T>& cache,
                                   const BasicTensor<T>& dy) {
  BatchNormGrads<T> bg = batchnorm_grad(cache.bn, relu_grad(cache.act, dy));
  grads.at(bn + ".gamma") = std::move(bg.dgamma);
  grads.at(bn + ".beta") = std::move(bg.dbeta);
  ConvGrads<T> cg = conv2d_grad(cache.conv, bg.dx);
  grads.at(conv + ".weight") = std::move(cg.dw);
  return std::move(cg.dx);
}

std::string stage_prefix(const char* part, std::size_t stage) {
  return std::string(part) + std::to_string(stage);
}

}  // namespace

template <typename T>
ForwardPass<T> BasicYNet<T>::forward(const BasicTensor<T>& fields, const BasicTensor<T>& conds,
                                     Mode mode, Rng* rng) {
  const YNetConfig& cfg = config_;
  const std::size_t size = cfg.input_size;
  if (fields.rank() != 4 || fields.dim(1) != 1 || fields.dim(2) != size || fields.dim(3) != size) {
    throw ShapeError("forward: fields must be [N,1," + std::to_string(size) + "," +
                     std::to_string(size) + "], got " + shape_string(fields.shape()));
  }
  const std::size_t n = fields.dim(0);
  if (conds.rank() != 2 || conds.dim(0) != n || conds.dim(1) != cfg.cond_dim) {
    throw ShapeError("forward: conditions must be [" + std::to_string(n) + "," +
                     std::to_string(cfg.cond_dim) + "], got " + shape_string(conds.shape()));
  }
  for (T v : conds.values()) {
    if (!(v >= T(0) && v <= T(1))) {
      throw RangeError("forward: normalized condition " + std::to_string(v) +
                       " outside [0,1]");
    }
  }
  const bool drops = mode == Mode::train && cfg.dropout_rate > 0.0;
  if (drops && rng == nullptr) throw std::invalid_argument("forward: train mode needs an rng");

  ForwardPass<T> pass;
  pass.mode = mode;
  pass.encoder.resize(2 * cfg.stages);
  pass.decoder.resize(2 * cfg.stages);

  BasicTensor<T> x = fields;
  for (std::size_t s = 0; s < cfg.stages; ++s) {
    const std::string p = stage_prefix("enc", s);
    x = conv_block_forward(weights_, p + ".conv0", p + ".bn0", x, mode, pass.encoder[2 * s]);
    x = conv_block_forward(weights_, p + ".conv1", p + ".bn1", x, mode, pass.encoder[2 * s + 1]);
    auto [pooled, pool_cache] = maxpool2(x);
    pass.pools.push_back(std::move(pool_cache));
    x = std::move(pooled);
  }

  Rng unused;
  auto [dropped, drop_cache] = dropout(x, cfg.dropout_rate, mode, rng ? *rng : unused);
  pass.dropout = std::move(drop_cache);
  pass.dropped = std::move(dropped);
  const Shape bottleneck_shape = pass.dropped.shape();

  auto [h, c0] = fully_connected(conds, weights_.at("mlp.fc0.weight"), weights_.at("mlp.fc0.bias"));
  pass.mlp0 = std::move(c0);
  pass.hidden = relu(h);
  auto [e, c1] =
      fully_connected(pass.hidden, weights_.at("mlp.fc1.weight"), weights_.at("mlp.fc1.bias"));
  pass.mlp1 = std::move(c1);

  BasicTensor<T> merged;
  const std::size_t flat = cfg.bottleneck_numel();
  switch (cfg.merge) {
    case MergeStrategy::gating:
      pass.embedding = sigmoid(e);
      merged = gate_merge(pass.dropped, pass.embedding);
      break;
    case MergeStrategy::flatten_concat: {
      pass.embedding = relu(e);
      // [N,F] ++ [N,E] along the feature axis, viewed as channels of width 1.
      BasicTensor<T> joined = concat_channels(pass.dropped.reshaped({n, flat, 1, 1}),
                                              pass.embedding.reshaped({n, e.dim(1), 1, 1}));
      const std::size_t joined_width = joined.size() / n;
      auto [m, mc] = fully_connected(std::move(joined).reshaped({n, joined_width}),
                                     weights_.at("merge.fc.weight"), weights_.at("merge.fc.bias"));
      pass.merge_fc = std::move(mc);
      pass.merged_flat = relu(m);
      merged = pass.merged_flat.reshaped(bottleneck_shape);
      break;
    }
    case MergeStrategy::flatten_add:
      pass.embedding = relu(e);
      merged = add(pass.dropped, pass.embedding.reshaped(bottleneck_shape));
      break;
  }

  x = std::move(merged);
  for (std::size_t l = cfg.stages, k = 0; l-- > 0; ++k) {
    const std::string p = stage_prefix("dec", l);
    x = concat_channels(upsample2(x), pass.encoder[2 * l + 1].act);
    x = conv_block_forward(weights_, p + ".conv0", p + ".bn0", x, mode, pass.decoder[2 * k]);
    x = conv_block_forward(weights_, p + ".conv1", p + ".bn1", x, mode, pass.decoder[2 * k + 1]);
  }
  auto [logits, head_cache] = conv2d(x, weights_.at("head.weight"), weights_.at("head.bias"), 0);
  pass.head = std::move(head_cache);
  pass.prediction = sigmoid(logits);
  return pass;
}

template <typename T>
BasicTensor<T> BasicYNet<T>::predict(const BasicTensor<T>& fields,
                                     const BasicTensor<T>& conds) const {
  // Infer mode reads the running statistics and never writes them.
  return const_cast<BasicYNet*>(this)->forward(fields, conds, Mode::infer).prediction;
}

template <typename T>
BackwardResult<T> BasicYNet<T>::backward(const ForwardPass<T>& pass,
                                         const BasicTensor<T>& target) const {
  const YNetConfig& cfg = config_;
  if (pass.encoder.size() != 2 * cfg.stages || pass.decoder.size() != 2 * cfg.stages ||
      pass.prediction.empty()) {
    throw std::invalid_argument("backward: forward pass does not belong to this network");
  }
  if (target.shape() != pass.prediction.shape()) {
    throw ShapeError("backward: target shape " + shape_string(target.shape()) +
                     " does not match prediction " + shape_string(pass.prediction.shape()));
  }
  BackwardResult<T> result;
  result.loss = binary_cross_entropy(pass.prediction, target);
  result.grads = weights_.zeros_like();
  auto& grads = result.grads;

  // d(mean BCE)/d(logit) = (p - t) / count inside the clamp, 0 where clamped.
  const T lo = static_cast<T>(kProbClamp);
  const T hi = T(1) - lo;
  const T inv_count = T(1) / static_cast<T>(target.size());
  BasicTensor<T> dlogit(target.shape());
  for (std::size_t i = 0; i < target.size(); ++i) {
    const T p = pass.prediction[i];
    dlogit[i] = (p < lo || p > hi) ? T(0) : (p - target[i]) * inv_count;
  }
  ConvGrads<T> head = conv2d_grad(pass.head, dlogit);
  grads.at("head.weight") = std::move(head.dw);
  grads.at("head.bias") = std::move(head.db);
  BasicTensor<T> d = std::move(head.dx);

  std::vector<BasicTensor<T>> dskip(cfg.stages);
  for (std::size_t l = 0, k = cfg.stages - 1; l < cfg.stages; ++l, --k) {
    const std::string p = stage_prefix("dec", l);
    d = conv_block_backward(grads, p + ".conv1", p + ".bn1", pass.decoder[2 * k + 1], d);
    d = conv_block_backward(grads, p + ".conv0", p + ".bn0", pass.decoder[2 * k], d);
    const std::size_t up_channels = d.dim(1) - cfg.encoder_channels(l);
    auto [dup, ds] = split_channels(d, up_channels);
    dskip[l] = std::move(ds);
    d = upsample2_grad(dup);
  }

  // d is now the gradient at the merge output.
  const std::size_t n = d.dim(0);
  BasicTensor<T> dbottleneck;
  BasicTensor<T> dembedding;
  switch (cfg.merge) {
    case MergeStrategy::gating: {
      GateGrads<T> gg = gate_merge_grad(pass.dropped, pass.embedding, d);
      dbottleneck = std::move(gg.dfmaps);
      dembedding = sigmoid_grad(pass.embedding, gg.dgate);
      break;
    }
    case MergeStrategy::flatten_concat: {
      const BasicTensor<T> dm = relu_grad(pass.merged_flat, d.reshaped(pass.merged_flat.shape()));
      FcGrads<T> fg = fully_connected_grad(pass.merge_fc, dm);
      grads.at("merge.fc.weight") = std::move(fg.dw);
      grads.at("merge.fc.bias") = std::move(fg.db);
      const std::size_t flat = cfg.bottleneck_numel();
      auto [dflat, demb] = split_channels(fg.dx.reshaped({n, fg.dx.dim(1), 1, 1}), flat);
      dbottleneck = std::move(dflat).reshaped(pass.dropped.shape());
      dembedding = relu_grad(pass.embedding, demb.reshaped(pass.embedding.shape()));
      break;
    }
    case MergeStrategy::flatten_add:
      dbottleneck = d;
      dembedding = relu_grad(pass.embedding, d.reshaped(pass.embedding.shape()));
      break;
  }

  FcGrads<T> g1 = fully_connected_grad(pass.mlp1, dembedding);
  grads.at("mlp.fc1.weight") = std::move(g1.dw);
  grads.at("mlp.fc1.bias") = std::move(g1.db);
  FcGrads<T> g0 = fully_connected_grad(pass.mlp0, relu_grad(pass.hidden, g1.dx));
  grads.at("mlp.fc0.weight") = std::move(g0.dw);
  grads.at("mlp.fc0.bias") = std::move(g0.db);

  d = dropout_grad(pass.dropout, dbottleneck);
  for (std::size_t s = cfg.stages; s-- > 0;) {
    const std::string p = stage_prefix("enc", s);
    d = add(maxpool2_grad(pass.pools[s], d), dskip[s]);
    d = conv_block_backward(grads, p + ".conv1", p + ".bn1", pass.encoder[2 * s + 1], d);
    d = conv_block_backward(grads, p + ".conv0", p + ".bn0", pass.encoder[2 * s], d);
  }
  return result;
}

template YNetConfig infer_config(const BasicModelWeights<float>&);
template YNetConfig infer_config(const BasicModelWeights<double>&);
template float binary_cross_entropy(const Tensor&, const Tensor&);
template double binary_cross_entropy(const Tensor64&, const Tensor64&);
template class BasicYNet<float>;
template class BasicYNet<double>;

}  // namespace ynet
