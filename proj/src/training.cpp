#include "ynet/training.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ynet/errors.hpp"
#include "ynet/random.hpp"

namespace ynet {

template <typename T>
BasicAdamState<T> BasicAdamState<T>::init(const BasicModelWeights<T>& weights, AdamOptions options) {
  BasicAdamState state;
  state.options = options;
  for (const auto& e : weights.entries()) {
    const bool learnable = !BasicModelWeights<T>::is_buffer(e.name);
    state.m.add(e.name, learnable ? BasicTensor<T>(e.tensor.shape()) : BasicTensor<T>());
    state.v.add(e.name, learnable ? BasicTensor<T>(e.tensor.shape()) : BasicTensor<T>());
  }
  return state;
}

template <typename T>
void adam_step(BasicAdamState<T>& state, BasicModelWeights<T>& weights,
               const BasicModelWeights<T>& grads) {
  auto& we = weights.entries();
  const auto& ge = grads.entries();
  if (we.size() != ge.size() || state.m.size() != we.size()) {
    throw ShapeError("adam_step: weight, gradient and state tables differ in size");
  }
  for (std::size_t i = 0; i < we.size(); ++i) {
    if (we[i].name != ge[i].name || we[i].tensor.shape() != ge[i].tensor.shape()) {
      throw ShapeError("adam_step: gradient '" + ge[i].name + "' " + shape_string(ge[i].tensor.shape()) +
                       " does not match weight '" + we[i].name + "' " +
                       shape_string(we[i].tensor.shape()));
    }
  }
  const AdamOptions& o = state.options;
  ++state.t;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < we.size(); ++i) {
    if (BasicModelWeights<T>::is_buffer(we[i].name)) continue;
    T* w = we[i].tensor.data();
    const T* g = ge[i].tensor.data();
    T* m = state.m.entries()[i].tensor.data();
    T* v = state.v.entries()[i].tensor.data();
    for (std::size_t k = 0; k < we[i].tensor.size(); ++k) {
      const double gk = g[k];
      const double mk = o.beta1 * m[k] + (1.0 - o.beta1) * gk;
      const double vk = o.beta2 * v[k] + (1.0 - o.beta2) * gk * gk;
      m[k] = static_cast<T>(mk);
      v[k] = static_cast<T>(vk);
      w[k] = static_cast<T>(w[k] - o.lr * (mk / c1) / (std::sqrt(vk / c2) + o.eps));
    }
  }
}

template struct BasicAdamState<float>;
template struct BasicAdamState<double>;
template void adam_step(BasicAdamState<float>&, BasicModelWeights<float>&, const BasicModelWeights<float>&);
template void adam_step(BasicAdamState<double>&, BasicModelWeights<double>&,
                        const BasicModelWeights<double>&);

double global_accuracy(const Tensor& pred, const Tensor& truth) {
  if (pred.shape() != truth.shape()) {
    throw ShapeError("global_accuracy: shape mismatch " + shape_string(pred.shape()) + " vs " +
                     shape_string(truth.shape()));
  }
  if (pred.empty()) throw std::invalid_argument("global_accuracy: empty field");
  std::size_t match = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) match += (pred[i] >= 0.5f) == (truth[i] >= 0.5f);
  return static_cast<double>(match) / static_cast<double>(pred.size());
}

Batch make_batch(const std::vector<SamplePair>& pairs, const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw std::invalid_argument("make_batch: no indices");
  const Shape& shape = pairs.at(indices[0]).input.shape();
  if (shape.size() != 2) throw ShapeError("make_batch: pairs must hold [S,S] fields");
  const std::size_t n = indices.size();
  const std::size_t plane = shape[0] * shape[1];
  Batch b{Tensor({n, 1, shape[0], shape[1]}), Tensor({n, 1, shape[0], shape[1]}), Tensor({n, 2})};
  for (std::size_t k = 0; k < n; ++k) {
    const SamplePair& p = pairs.at(indices[k]);
    if (p.input.shape() != shape || p.target.shape() != shape) {
      throw ShapeError("make_batch: inconsistent patch shapes");
    }
    std::copy_n(p.input.data(), plane, b.fields.data() + k * plane);
    std::copy_n(p.target.data(), plane, b.targets.data() + k * plane);
    const auto norm = p.cond.normalized();
    b.conds[2 * k] = static_cast<float>(norm[0]);
    b.conds[2 * k + 1] = static_cast<float>(norm[1]);
  }
  return b;
}

Evaluation evaluate(const YNet& model, const std::vector<SamplePair>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("evaluate: empty dataset");
  Evaluation ev;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Batch b = make_batch(pairs, {i});
    const Tensor pred = model.predict(b.fields, b.conds);
    ev.loss += binary_cross_entropy(pred, b.targets);
    ev.accuracy += global_accuracy(pred, b.targets);
  }
  ev.loss /= static_cast<double>(pairs.size());
  ev.accuracy /= static_cast<double>(pairs.size());
  return ev;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("train: batch size must be >= 1");
  if (!(adam.lr >= 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) ||
      !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) || !(adam.eps > 0.0)) {
    throw std::invalid_argument("train: invalid Adam settings");
  }
}

TrainResult train(YNet& model, const std::vector<SamplePair>& train_pairs,
                  const std::vector<SamplePair>& val_pairs, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (train_pairs.empty()) throw std::invalid_argument("train: empty training split");
  if (val_pairs.empty()) throw std::invalid_argument("train: empty validation split");

  AdamState adam = AdamState::init(model.weights(), config.adam);
  Rng dropout_rng(derive_seed(config.seed, "dropout"));
  std::vector<std::size_t> order(train_pairs.size());
  TrainResult result;
  double best_loss = std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(config.seed, "shuffle", epoch));
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = std::min(static_cast<std::size_t>(uniform01(shuffle_rng) * static_cast<double>(i)), i - 1);
      std::swap(order[i - 1], order[j]);
    }
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += config.batch_size) {
      const std::vector<std::size_t> idx(order.begin() + b0,
                                         order.begin() + std::min(order.size(), b0 + config.batch_size));
      const Batch batch = make_batch(train_pairs, idx);
      const auto pass = model.forward(batch.fields, batch.conds, Mode::train, &dropout_rng);
      const auto back = model.backward(pass, batch.targets);
      adam_step(adam, model.weights(), back.grads);
      loss_sum += back.loss;
      ++batches;
    }
    EpochRecord rec;
    rec.train_loss = loss_sum / static_cast<double>(batches);
    const Evaluation val = evaluate(model, val_pairs);
    rec.val_loss = val.loss;
    rec.val_accuracy = val.accuracy;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(rec);
    if (val.loss < best_loss || epoch == 0) {
      best_loss = val.loss;
      result.best = model.weights();
      result.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(epoch, rec);
  }
  return result;
}

std::pair<std::vector<SamplePair>, std::vector<SamplePair>> split_by_condition(
    const std::vector<SamplePair>& pairs, std::size_t held_out) {
  std::vector<Condition> distinct;
  for (const auto& p : pairs) {
    if (std::find(distinct.begin(), distinct.end(), p.cond) == distinct.end()) distinct.push_back(p.cond);
  }
  if (held_out > distinct.size()) {
    throw std::invalid_argument("split: cannot hold out " + std::to_string(held_out) + " of " +
                                std::to_string(distinct.size()) + " conditions");
  }
  const std::vector<Condition> second(distinct.end() - static_cast<std::ptrdiff_t>(held_out), distinct.end());
  std::pair<std::vector<SamplePair>, std::vector<SamplePair>> out;
  for (const auto& p : pairs) {
    const bool held = std::find(second.begin(), second.end(), p.cond) != second.end();
    (held ? out.second : out.first).push_back(p);
  }
  return out;
}

std::size_t condition_count(const std::vector<SamplePair>& pairs) {
  std::vector<Condition> distinct;
  for (const auto& p : pairs) {
    if (std::find(distinct.begin(), distinct.end(), p.cond) == distinct.end()) distinct.push_back(p.cond);
  }
  return distinct.size();
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path.string());
  for (const auto& [k, v] : manifest) out << k << '=' << v << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

Manifest training_manifest(const TrainConfig& config, std::uint64_t data_hash) {
  auto num = [](double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
  };
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(data_hash));
  return {
      {"seed", std::to_string(config.seed)},
      {"epochs", std::to_string(config.epochs)},
      {"batch_size", std::to_string(config.batch_size)},
      {"lr", num(config.adam.lr)},
      {"beta1", num(config.adam.beta1)},
      {"beta2", num(config.adam.beta2)},
      {"eps", num(config.adam.eps)},
      {"data_hash", hash},
      // Full-scale accounting: 25 test conditions x 30 tracks x 58 patches.
      {"test_pairs_full_scale", "43500"},
  };
}

}  // namespace ynet
