#include "ynet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "ynet/gemm.hpp"

namespace ynet {

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ',';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

namespace {

void check_rank(const Shape& shape) {
  if (shape.empty() || shape.size() > 4) {
    throw ShapeError("tensor rank must be 1-4, got shape " + shape_string(shape));
  }
}

}  // namespace

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, T fill) : shape_(std::move(shape)) {
  check_rank(shape_);
  data_.assign(shape_numel(shape_), fill);
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  check_rank(shape_);
  if (data_.size() != shape_numel(shape_)) {
    throw ShapeError("tensor of shape " + shape_string(shape_) + " needs " +
                     std::to_string(shape_numel(shape_)) + " values, got " +
                     std::to_string(data_.size()));
  }
}

template <typename T>
BasicTensor<T> BasicTensor<T>::reshaped(Shape shape) const& {
  return BasicTensor(*this).reshaped(std::move(shape));
}

template <typename T>
BasicTensor<T> BasicTensor<T>::reshaped(Shape shape) && {
  if (shape_numel(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  return BasicTensor(std::move(shape), std::move(data_));
}

template <typename T>
void BasicTensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
BasicTensor<T> elementwise(const BasicTensor<T>& a, const BasicTensor<T>& b, ElementwiseOp op) {
  if (a.shape() != b.shape()) {
    throw ShapeError("elementwise: shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
  BasicTensor<T> out(a.shape());
  const T* x = a.data();
  const T* y = b.data();
  T* z = out.data();
  const std::size_t n = a.size();
  switch (op) {
    case ElementwiseOp::add:
      for (std::size_t i = 0; i < n; ++i) z[i] = x[i] + y[i];
      break;
    case ElementwiseOp::sub:
      for (std::size_t i = 0; i < n; ++i) z[i] = x[i] - y[i];
      break;
    case ElementwiseOp::mul:
      for (std::size_t i = 0; i < n; ++i) z[i] = x[i] * y[i];
      break;
  }
  return out;
}

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: incompatible shapes " + shape_string(a.shape()) + " x " +
                     shape_string(b.shape()));
  }
  BasicTensor<T> out({a.dim(0), b.dim(1)});
  kernels::gemm_nn(a.dim(0), b.dim(1), a.dim(1), a.data(), b.data(), out.data(), false);
  return out;
}

template <typename T>
BasicTensor<T> transpose(const BasicTensor<T>& a) {
  if (a.rank() != 2) throw ShapeError("transpose: expected rank 2, got " + shape_string(a.shape()));
  const std::size_t rows = a.dim(0);
  const std::size_t cols = a.dim(1);
  BasicTensor<T> out({cols, rows});
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) out[j * rows + i] = a[i * cols + j];
  }
  return out;
}

namespace {

// Views a [C,H,W] or [N,C,H,W] tensor as (outer, channels, plane).
struct ChannelLayout {
  std::size_t outer;
  std::size_t channels;
  std::size_t plane;
};

template <typename T>
ChannelLayout channel_layout(const BasicTensor<T>& x, const char* what) {
  if (x.rank() == 3) return {1, x.dim(0), x.dim(1) * x.dim(2)};
  if (x.rank() == 4) return {x.dim(0), x.dim(1), x.dim(2) * x.dim(3)};
  throw ShapeError(std::string(what) + ": expected [C,H,W] or [N,C,H,W], got " +
                   shape_string(x.shape()));
}

}  // namespace

template <typename T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  const ChannelLayout la = channel_layout(a, "concat_channels");
  const ChannelLayout lb = channel_layout(b, "concat_channels");
  const std::size_t ch_axis = a.rank() - 3;
  bool compatible = a.rank() == b.rank();
  for (std::size_t axis = 0; compatible && axis < a.rank(); ++axis) {
    if (axis != ch_axis && a.dim(axis) != b.dim(axis)) compatible = false;
  }
  if (!compatible) {
    throw ShapeError("concat_channels: mismatched shapes " + shape_string(a.shape()) + " and " +
                     shape_string(b.shape()));
  }
  Shape shape = a.shape();
  shape[ch_axis] = la.channels + lb.channels;
  BasicTensor<T> out(shape);
  const std::size_t chunk_a = la.channels * la.plane;
  const std::size_t chunk_b = lb.channels * lb.plane;
  for (std::size_t n = 0; n < la.outer; ++n) {
    T* dst = out.data() + n * (chunk_a + chunk_b);
    std::copy_n(a.data() + n * chunk_a, chunk_a, dst);
    std::copy_n(b.data() + n * chunk_b, chunk_b, dst + chunk_a);
  }
  return out;
}

template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> split_channels(const BasicTensor<T>& x,
                                                         std::size_t first) {
  const ChannelLayout l = channel_layout(x, "split_channels");
  if (first > l.channels) {
    throw ShapeError("split_channels: split point " + std::to_string(first) + " exceeds " +
                     std::to_string(l.channels) + " channels");
  }
  const std::size_t ch_axis = x.rank() - 3;
  Shape sa = x.shape();
  Shape sb = x.shape();
  sa[ch_axis] = first;
  sb[ch_axis] = l.channels - first;
  BasicTensor<T> a(sa);
  BasicTensor<T> b(sb);
  const std::size_t chunk_a = first * l.plane;
  const std::size_t chunk_b = (l.channels - first) * l.plane;
  for (std::size_t n = 0; n < l.outer; ++n) {
    const T* src = x.data() + n * (chunk_a + chunk_b);
    std::copy_n(src, chunk_a, a.data() + n * chunk_a);
    std::copy_n(src + chunk_a, chunk_b, b.data() + n * chunk_b);
  }
  return {std::move(a), std::move(b)};
}

template <typename T>
bool all_finite(const BasicTensor<T>& x) {
  return std::all_of(x.values().begin(), x.values().end(), [](T v) { return std::isfinite(v); });
}

#define YNET_INSTANTIATE_TENSOR(T)                                                       \
  template class BasicTensor<T>;                                                         \
  template BasicTensor<T> elementwise(const BasicTensor<T>&, const BasicTensor<T>&,      \
                                      ElementwiseOp);                                    \
  template BasicTensor<T> matmul(const BasicTensor<T>&, const BasicTensor<T>&);          \
  template BasicTensor<T> transpose(const BasicTensor<T>&);                              \
  template BasicTensor<T> concat_channels(const BasicTensor<T>&, const BasicTensor<T>&); \
  template std::pair<BasicTensor<T>, BasicTensor<T>> split_channels(                     \
      const BasicTensor<T>&, std::size_t);                                               \
  template bool all_finite(const BasicTensor<T>&);

YNET_INSTANTIATE_TENSOR(float)
YNET_INSTANTIATE_TENSOR(double)

}  // namespace ynet
