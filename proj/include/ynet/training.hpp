#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ynet/dataset.hpp"
#include "ynet/model.hpp"
#include "ynet/weights.hpp"

namespace ynet {

struct AdamOptions {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moment estimates for the learnable entries of a weight table (buffers
/// get empty placeholders so indices line up).
template <typename T>
struct BasicAdamState {
  AdamOptions options;
  std::uint64_t t = 0;
  BasicModelWeights<T> m;
  BasicModelWeights<T> v;

  static BasicAdamState init(const BasicModelWeights<T>& weights, AdamOptions options = {});
};

using AdamState = BasicAdamState<float>;

/// One bias-corrected Adam update of every learnable entry; buffers are left
/// untouched. Throws ShapeError when names or shapes of `grads` differ.
template <typename T>
void adam_step(BasicAdamState<T>& state, BasicModelWeights<T>& weights,
               const BasicModelWeights<T>& grads);

/// Fraction of pixels on which pred and truth agree after thresholding both
/// at 0.5.
double global_accuracy(const Tensor& pred, const Tensor& truth);

struct Evaluation {
  double loss = 0.0;      // mean BCE over pairs
  double accuracy = 0.0;  // mean global accuracy over pairs
};

/// Infer-mode loss and accuracy, one pair per forward pass.
Evaluation evaluate(const YNet& model, const std::vector<SamplePair>& pairs);

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 2;
  std::uint64_t seed = 0;
  AdamOptions adam;

  void validate() const;
};

struct EpochRecord {
  double train_loss = 0.0;  // mean over the epoch's batches
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  ModelWeights best;  // checkpoint with the smallest validation loss
  std::size_t best_epoch = 0;
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(std::size_t epoch, const EpochRecord&)>;

/// Stacks pairs[indices] into fields [N,1,S,S], targets [N,1,S,S] and
/// normalized conditions [N,2].
struct Batch {
  Tensor fields;
  Tensor targets;
  Tensor conds;
};
Batch make_batch(const std::vector<SamplePair>& pairs, const std::vector<std::size_t>& indices);

/// Trains `model` in place with Adam. Each epoch shuffles the training pairs
/// from derive_seed(seed, "shuffle", epoch), draws dropout masks from
/// derive_seed(seed, "dropout") and ends with an infer-mode validation pass.
/// Throws std::invalid_argument for an empty training or validation set.
TrainResult train(YNet& model, const std::vector<SamplePair>& train_pairs,
                  const std::vector<SamplePair>& val_pairs, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Splits pairs by condition: the last `held_out` distinct conditions (in
/// first-appearance order) form the second set.
std::pair<std::vector<SamplePair>, std::vector<SamplePair>> split_by_condition(
    const std::vector<SamplePair>& pairs, std::size_t held_out);

/// Number of distinct conditions.
std::size_t condition_count(const std::vector<SamplePair>& pairs);

/// key=value lines, in the given order.
using Manifest = std::vector<std::pair<std::string, std::string>>;
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest training_manifest(const TrainConfig& config, std::uint64_t data_hash);

}  // namespace ynet
