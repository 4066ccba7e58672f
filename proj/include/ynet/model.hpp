#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ynet/layers.hpp"
#include "ynet/random.hpp"
#include "ynet/tensor.hpp"
#include "ynet/weights.hpp"

namespace ynet {

/// How the condition embedding is fused with the encoder bottleneck.
///  gating:         one sigmoid gate per bottleneck channel, multiplied in.
///  flatten_concat: flattened bottleneck ++ embedding -> FC back to the
///                  bottleneck size -> reshape.
///  flatten_add:    embedding as wide as the flattened bottleneck, added.
enum class MergeStrategy { gating, flatten_concat, flatten_add };

std::string_view to_string(MergeStrategy strategy);
MergeStrategy parse_merge_strategy(std::string_view name);

/// Rational multiplier on the base channel count ("1/4" etc).
struct ChannelScale {
  std::size_t num = 1;
  std::size_t den = 1;

  static ChannelScale parse(std::string_view text);
  std::string str() const;
};

struct YNetConfig {
  std::size_t base_channels = 32;
  std::size_t stages = 4;
  std::size_t mlp_hidden = 128;
  std::size_t cond_dim = 2;
  MergeStrategy merge = MergeStrategy::gating;
  std::size_t input_size = 128;
  ChannelScale scale;
  double dropout_rate = 0.5;

  /// Channels of the first encoder stage after scaling.
  std::size_t width() const;
  std::size_t encoder_channels(std::size_t stage) const { return width() << stage; }
  /// Output channels of the decoder stage working at `level` (0 = full res).
  std::size_t decoder_channels(std::size_t level) const {
    return width() << (level > 0 ? level - 1 : 0);
  }
  std::size_t gate_size() const { return encoder_channels(stages - 1); }
  std::size_t bottleneck_size() const { return input_size >> stages; }
  std::size_t bottleneck_numel() const {
    return gate_size() * bottleneck_size() * bottleneck_size();
  }
  /// Width of the MLP's final layer for the configured merge strategy.
  std::size_t embedding_size() const;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

/// Name and shape of every tensor the configured network holds, in the
/// documented weight-table order.
std::vector<std::pair<std::string, Shape>> weight_layout(const YNetConfig& config);

/// Learnable scalar count for a configuration, without allocating it.
std::size_t parameter_count(const YNetConfig& config);

/// Recovers the configuration a weight table was built with. The input
/// size of a gating network is not recorded and defaults to 128.
template <typename T>
YNetConfig infer_config(const BasicModelWeights<T>& weights);

template <typename T>
struct ConvBlockCache {
  ConvCache<T> conv;
  BatchNormCache<T> bn;
  BasicTensor<T> act;
};

/// Everything a forward pass saves for its backward pass.
template <typename T>
struct ForwardPass {
  Mode mode = Mode::infer;
  BasicTensor<T> prediction;  // [N,1,H,W], values in (0,1)

  std::vector<ConvBlockCache<T>> encoder;  // two per stage
  std::vector<PoolCache> pools;
  DropoutCache<T> dropout;
  BasicTensor<T> dropped;  // bottleneck after dropout
  FcCache<T> mlp0;
  FcCache<T> mlp1;
  BasicTensor<T> hidden;     // post-ReLU hidden layer
  BasicTensor<T> embedding;  // post-activation MLP output (the gate, for gating)
  FcCache<T> merge_fc;
  BasicTensor<T> merged_flat;
  std::vector<ConvBlockCache<T>> decoder;  // two per stage, deepest first
  ConvCache<T> head;
};

template <typename T>
struct BackwardResult {
  T loss = T(0);
  BasicModelWeights<T> grads;  // same layout as the weights; buffers stay zero
};

/// Probabilities are clamped to [1e-7, 1 - 1e-7] before taking logs.
template <typename T>
T binary_cross_entropy(const BasicTensor<T>& prediction, const BasicTensor<T>& target);

template <typename T>
class BasicYNet {
 public:
  /// He-initialized network (conv and FC weights), zero biases, identity
  /// batch norms.
  static BasicYNet build(const YNetConfig& config, std::uint64_t seed);

  BasicYNet(YNetConfig config, BasicModelWeights<T> weights);
  explicit BasicYNet(BasicModelWeights<T> weights);

  const YNetConfig& config() const noexcept { return config_; }
  BasicModelWeights<T>& weights() noexcept { return weights_; }
  const BasicModelWeights<T>& weights() const noexcept { return weights_; }
  std::size_t parameter_count() const { return weights_.parameter_count(); }

  /// fields [N,1,S,S] with S = input_size, conds [N,cond_dim] in [0,1].
  /// Train mode updates batch-norm running statistics and needs `rng` for
  /// dropout.
  ForwardPass<T> forward(const BasicTensor<T>& fields, const BasicTensor<T>& conds, Mode mode,
                         Rng* rng = nullptr);

  /// Inference-mode forward returning only the prediction.
  BasicTensor<T> predict(const BasicTensor<T>& fields, const BasicTensor<T>& conds) const;

  /// Mean binary cross-entropy against `target` and its gradient with
  /// respect to every learnable tensor.
  BackwardResult<T> backward(const ForwardPass<T>& pass, const BasicTensor<T>& target) const;

  template <typename U>
  BasicYNet<U> cast() const {
    return BasicYNet<U>(config_, weights_.template cast<U>());
  }

 private:
  YNetConfig config_;
  BasicModelWeights<T> weights_;
};

using YNet = BasicYNet<float>;
using YNet64 = BasicYNet<double>;

}  // namespace ynet
