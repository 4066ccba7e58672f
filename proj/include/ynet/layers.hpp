#pragma once

// Forward and backward passes for every layer the network uses. Image
// inputs may be a single sample [C,H,W] or a batch [N,C,H,W]; outputs keep
// the input's rank. Each forward returns the values its backward needs.

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "ynet/random.hpp"
#include "ynet/tensor.hpp"

namespace ynet {

enum class Mode { train, infer };

// ---------------------------------------------------------------- conv2d

template <typename T>
struct ConvCache {
  BasicTensor<T> input;
  BasicTensor<T> weight;
  std::size_t pad = 0;
  bool has_bias = false;
};

template <typename T>
struct ConvGrads {
  BasicTensor<T> dx;
  BasicTensor<T> dw;
  BasicTensor<T> db;  // empty when the forward had no bias
};

/// Stride-1 convolution with a square odd kernel w [Cout,Cin,K,K] and zero
/// padding `pad`. An empty `bias` means no bias term.
template <typename T>
std::pair<BasicTensor<T>, ConvCache<T>> conv2d(const BasicTensor<T>& x, const BasicTensor<T>& w,
                                               const BasicTensor<T>& bias, std::size_t pad);

/// Gradients of sum(y * dy) with respect to x, w and the bias.
template <typename T>
ConvGrads<T> conv2d_grad(const ConvCache<T>& cache, const BasicTensor<T>& dy);

// ------------------------------------------------------------- batchnorm

template <typename T>
struct BatchNormOptions {
  T momentum = T(0.1);
  T eps = T(1e-5);
};

/// Owning parameter set for standalone use; the network keeps the same four
/// tensors in its weight table.
template <typename T>
struct BatchNormState {
  BasicTensor<T> gamma;
  BasicTensor<T> beta;
  BasicTensor<T> running_mean;
  BasicTensor<T> running_var;
  BatchNormOptions<T> options;

  static BatchNormState identity(std::size_t channels);
};

template <typename T>
struct BatchNormCache {
  Mode mode = Mode::infer;
  Shape shape;
  BasicTensor<T> xhat;
  std::vector<T> inv_std;
  BasicTensor<T> gamma;
};

template <typename T>
struct BatchNormGrads {
  BasicTensor<T> dx;
  BasicTensor<T> dgamma;
  BasicTensor<T> dbeta;
};

/// Train mode normalizes with the batch statistics over N*H*W and blends
/// them into the running statistics; infer mode uses the running statistics.
template <typename T>
std::pair<BasicTensor<T>, BatchNormCache<T>> batchnorm(const BasicTensor<T>& x,
                                                       const BasicTensor<T>& gamma,
                                                       const BasicTensor<T>& beta,
                                                       BasicTensor<T>& running_mean,
                                                       BasicTensor<T>& running_var, Mode mode,
                                                       const BatchNormOptions<T>& options = {});

template <typename T>
std::pair<BasicTensor<T>, BatchNormCache<T>> batchnorm(const BasicTensor<T>& x,
                                                       BatchNormState<T>& state, Mode mode) {
  return batchnorm(x, state.gamma, state.beta, state.running_mean, state.running_var, mode,
                   state.options);
}

template <typename T>
BatchNormGrads<T> batchnorm_grad(const BatchNormCache<T>& cache, const BasicTensor<T>& dy);

// ---------------------------------------------------------- activations

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x);

/// `y` is the forward output.
template <typename T>
BasicTensor<T> relu_grad(const BasicTensor<T>& y, const BasicTensor<T>& dy);

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& x);

/// `y` is the forward output.
template <typename T>
BasicTensor<T> sigmoid_grad(const BasicTensor<T>& y, const BasicTensor<T>& dy);

// -------------------------------------------------------- pool / upsample

struct PoolCache {
  Shape input_shape;
  std::vector<std::uint32_t> argmax;  // flat input index per output element
};

/// 2x2 max pooling, stride 2. Ties go to the first element in row-major
/// window order.
template <typename T>
std::pair<BasicTensor<T>, PoolCache> maxpool2(const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> maxpool2_grad(const PoolCache& cache, const BasicTensor<T>& dy);

/// Nearest-neighbour 2x upsampling.
template <typename T>
BasicTensor<T> upsample2(const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> upsample2_grad(const BasicTensor<T>& dy);

// ----------------------------------------------------------------- dropout

template <typename T>
struct DropoutCache {
  BasicTensor<T> mask;  // 0 or 1/(1-rate); empty means identity
};

/// Inverted dropout. Infer mode (or rate 0) is the identity and draws nothing.
template <typename T>
std::pair<BasicTensor<T>, DropoutCache<T>> dropout(const BasicTensor<T>& x, double rate, Mode mode,
                                                   Rng& rng);

template <typename T>
BasicTensor<T> dropout_grad(const DropoutCache<T>& cache, const BasicTensor<T>& dy);

// ------------------------------------------------------------- gate merge

template <typename T>
struct GateGrads {
  BasicTensor<T> dfmaps;
  BasicTensor<T> dgate;
};

/// out[c,i,j] = gate[c] * fmaps[c,i,j]; batched as fmaps [N,C,H,W] with
/// gate [N,C].
template <typename T>
BasicTensor<T> gate_merge(const BasicTensor<T>& fmaps, const BasicTensor<T>& gate);

template <typename T>
GateGrads<T> gate_merge_grad(const BasicTensor<T>& fmaps, const BasicTensor<T>& gate,
                             const BasicTensor<T>& dy);

// -------------------------------------------------------- fully connected

template <typename T>
struct FcCache {
  BasicTensor<T> input;  // always stored as [N, n_in]
  BasicTensor<T> weight;
  bool batched = false;
};

template <typename T>
struct FcGrads {
  BasicTensor<T> dx;
  BasicTensor<T> dw;
  BasicTensor<T> db;
};

/// y = w x + b for x [n_in] or a batch [N, n_in].
template <typename T>
std::pair<BasicTensor<T>, FcCache<T>> fully_connected(const BasicTensor<T>& x,
                                                      const BasicTensor<T>& w,
                                                      const BasicTensor<T>& b);

template <typename T>
FcGrads<T> fully_connected_grad(const FcCache<T>& cache, const BasicTensor<T>& dy);

}  // namespace ynet
