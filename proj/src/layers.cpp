#include "ynet/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ynet/gemm.hpp"

namespace ynet {

namespace {

struct ImageDims {
  std::size_t n, c, h, w;
  std::size_t plane() const { return h * w; }
  std::size_t sample() const { return c * h * w; }
};

template <typename T>
ImageDims image_dims(const BasicTensor<T>& x, const char* what) {
  if (x.rank() == 3) return {1, x.dim(0), x.dim(1), x.dim(2)};
  if (x.rank() == 4) return {x.dim(0), x.dim(1), x.dim(2), x.dim(3)};
  throw ShapeError(std::string(what) + ": expected [C,H,W] or [N,C,H,W], got " +
                   shape_string(x.shape()));
}

// Shape with the same rank as `like` (3 or 4) for the given dims.
template <typename T>
Shape image_shape(const BasicTensor<T>& like, std::size_t n, std::size_t c, std::size_t h,
                  std::size_t w) {
  if (like.rank() == 3) return {c, h, w};
  return {n, c, h, w};
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ShapeError(message);
}

// col[(ci*K + di)*K + dj, i*Wo + j] = x[ci, i + di - pad, j + dj - pad] (zero outside).
template <typename T>
void im2col(const T* x, std::size_t channels, std::size_t h, std::size_t w, std::size_t k,
            std::size_t pad, std::size_t ho, std::size_t wo, T* col) {
  for (std::size_t ci = 0; ci < channels; ++ci) {
    const T* plane = x + ci * h * w;
    for (std::size_t di = 0; di < k; ++di) {
      for (std::size_t dj = 0; dj < k; ++dj) {
        T* row = col + ((ci * k + di) * k + dj) * ho * wo;
        for (std::size_t i = 0; i < ho; ++i) {
          T* out = row + i * wo;
          const long long src_i = static_cast<long long>(i + di) - static_cast<long long>(pad);
          if (src_i < 0 || src_i >= static_cast<long long>(h)) {
            std::fill(out, out + wo, T(0));
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(src_i) * w;
          for (std::size_t j = 0; j < wo; ++j) {
            const long long src_j = static_cast<long long>(j + dj) - static_cast<long long>(pad);
            out[j] = (src_j < 0 || src_j >= static_cast<long long>(w))
                         ? T(0)
                         : src[static_cast<std::size_t>(src_j)];
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatters col back onto x, accumulating.
template <typename T>
void col2im(const T* col, std::size_t channels, std::size_t h, std::size_t w, std::size_t k,
            std::size_t pad, std::size_t ho, std::size_t wo, T* x) {
  for (std::size_t ci = 0; ci < channels; ++ci) {
    T* plane = x + ci * h * w;
    for (std::size_t di = 0; di < k; ++di) {
      for (std::size_t dj = 0; dj < k; ++dj) {
        const T* row = col + ((ci * k + di) * k + dj) * ho * wo;
        for (std::size_t i = 0; i < ho; ++i) {
          const long long dst_i = static_cast<long long>(i + di) - static_cast<long long>(pad);
          if (dst_i < 0 || dst_i >= static_cast<long long>(h)) continue;
          T* dst = plane + static_cast<std::size_t>(dst_i) * w;
          const T* in = row + i * wo;
          for (std::size_t j = 0; j < wo; ++j) {
            const long long dst_j = static_cast<long long>(j + dj) - static_cast<long long>(pad);
            if (dst_j < 0 || dst_j >= static_cast<long long>(w)) continue;
            dst[static_cast<std::size_t>(dst_j)] += in[j];
          }
        }
      }
    }
  }
}

struct ConvGeometry {
  ImageDims in;
  std::size_t cout, k, ho, wo;
};

template <typename T>
ConvGeometry conv_geometry(const BasicTensor<T>& x, const BasicTensor<T>& w, std::size_t pad) {
  const ImageDims d = image_dims(x, "conv2d");
  require(w.rank() == 4, "conv2d: weight must be [Cout,Cin,K,K], got " + shape_string(w.shape()));
  require(w.dim(1) == d.c, "conv2d: input has " + std::to_string(d.c) +
                               " channels but weight expects " + std::to_string(w.dim(1)));
  require(w.dim(2) == w.dim(3), "conv2d: kernel must be square, got " + shape_string(w.shape()));
  const std::size_t k = w.dim(2);
  require(d.h + 2 * pad >= k && d.w + 2 * pad >= k, "conv2d: kernel larger than padded input");
  return {d, w.dim(0), k, d.h + 2 * pad - k + 1, d.w + 2 * pad - k + 1};
}

}  // namespace

template <typename T>
std::pair<BasicTensor<T>, ConvCache<T>> conv2d(const BasicTensor<T>& x, const BasicTensor<T>& w,
                                               const BasicTensor<T>& bias, std::size_t pad) {
  const ConvGeometry g = conv_geometry(x, w, pad);
  const bool has_bias = bias.rank() != 0;
  if (has_bias) {
    require(bias.rank() == 1 && bias.dim(0) == g.cout,
            "conv2d: bias must be [" + std::to_string(g.cout) + "], got " +
                shape_string(bias.shape()));
  }
  const std::size_t rows = g.in.c * g.k * g.k;
  const std::size_t out_plane = g.ho * g.wo;
  const bool direct = g.k == 1 && pad == 0;
  std::vector<T> col(direct ? 0 : rows * out_plane);

  BasicTensor<T> y(image_shape(x, g.in.n, g.cout, g.ho, g.wo));
  for (std::size_t n = 0; n < g.in.n; ++n) {
    const T* xn = x.data() + n * g.in.sample();
    if (!direct) im2col(xn, g.in.c, g.in.h, g.in.w, g.k, pad, g.ho, g.wo, col.data());
    T* yn = y.data() + n * g.cout * out_plane;
    kernels::gemm_nn(g.cout, out_plane, rows, w.data(), direct ? xn : col.data(), yn, false);
    if (has_bias) {
      for (std::size_t co = 0; co < g.cout; ++co) {
        T* plane = yn + co * out_plane;
        const T bv = bias[co];
        for (std::size_t p = 0; p < out_plane; ++p) plane[p] += bv;
      }
    }
  }
  return {std::move(y), ConvCache<T>{x, w, pad, has_bias}};
}

template <typename T>
ConvGrads<T> conv2d_grad(const ConvCache<T>& cache, const BasicTensor<T>& dy) {
  const BasicTensor<T>& x = cache.input;
  const BasicTensor<T>& w = cache.weight;
  const ConvGeometry g = conv_geometry(x, w, cache.pad);
  const Shape expected = image_shape(x, g.in.n, g.cout, g.ho, g.wo);
  require(dy.shape() == expected, "conv2d_grad: dy has shape " + shape_string(dy.shape()) +
                                      ", expected " + shape_string(expected));
  const std::size_t rows = g.in.c * g.k * g.k;
  const std::size_t out_plane = g.ho * g.wo;
  const bool direct = g.k == 1 && cache.pad == 0;

  ConvGrads<T> grads{BasicTensor<T>::zeros_like(x), BasicTensor<T>::zeros_like(w), {}};
  if (cache.has_bias) grads.db = BasicTensor<T>({g.cout});

  // Weight viewed as [Cout, rows], transposed once for the input gradient.
  std::vector<T> wt(rows * g.cout);
  for (std::size_t co = 0; co < g.cout; ++co) {
    for (std::size_t r = 0; r < rows; ++r) wt[r * g.cout + co] = w[co * rows + r];
  }
  std::vector<T> col(rows * out_plane);
  std::vector<T> dcol(direct ? 0 : rows * out_plane);
  for (std::size_t n = 0; n < g.in.n; ++n) {
    const T* xn = x.data() + n * g.in.sample();
    const T* dyn = dy.data() + n * g.cout * out_plane;
    T* dxn = grads.dx.data() + n * g.in.sample();
    const T* cols = xn;
    if (!direct) {
      im2col(xn, g.in.c, g.in.h, g.in.w, g.k, cache.pad, g.ho, g.wo, col.data());
      cols = col.data();
    }
    kernels::gemm_nt(g.cout, rows, out_plane, dyn, cols, grads.dw.data(), n > 0);
    if (direct) {
      kernels::gemm_nn(rows, out_plane, g.cout, wt.data(), dyn, dxn, false);
    } else {
      kernels::gemm_nn(rows, out_plane, g.cout, wt.data(), dyn, dcol.data(), false);
      col2im(dcol.data(), g.in.c, g.in.h, g.in.w, g.k, cache.pad, g.ho, g.wo, dxn);
    }
    if (cache.has_bias) {
      for (std::size_t co = 0; co < g.cout; ++co) {
        const T* plane = dyn + co * out_plane;
        T sum = T(0);
        for (std::size_t p = 0; p < out_plane; ++p) sum += plane[p];
        grads.db[co] += sum;
      }
    }
  }
  return grads;
}

// ------------------------------------------------------------- batchnorm

template <typename T>
BatchNormState<T> BatchNormState<T>::identity(std::size_t channels) {
  return {BasicTensor<T>::full({channels}, T(1)), BasicTensor<T>({channels}),
          BasicTensor<T>({channels}), BasicTensor<T>::full({channels}, T(1)), {}};
}

template <typename T>
std::pair<BasicTensor<T>, BatchNormCache<T>> batchnorm(const BasicTensor<T>& x,
                                                       const BasicTensor<T>& gamma,
                                                       const BasicTensor<T>& beta,
                                                       BasicTensor<T>& running_mean,
                                                       BasicTensor<T>& running_var, Mode mode,
                                                       const BatchNormOptions<T>& options) {
  const ImageDims d = image_dims(x, "batchnorm");
  for (const BasicTensor<T>* p : {&gamma, &beta, static_cast<const BasicTensor<T>*>(&running_mean),
                                  static_cast<const BasicTensor<T>*>(&running_var)}) {
    require(p->rank() == 1 && p->dim(0) == d.c,
            "batchnorm: per-channel parameter has shape " + shape_string(p->shape()) +
                " for " + std::to_string(d.c) + " channels");
  }
  require(d.n >= 1 && d.plane() >= 1, "batchnorm: empty input");
  const std::size_t plane = d.plane();
  const T count = static_cast<T>(d.n * plane);

  BatchNormCache<T> cache;
  cache.mode = mode;
  cache.shape = x.shape();
  cache.xhat = BasicTensor<T>(x.shape());
  cache.inv_std.resize(d.c);
  cache.gamma = gamma;
  BasicTensor<T> y(x.shape());

  for (std::size_t c = 0; c < d.c; ++c) {
    T mean;
    T var;
    if (mode == Mode::train) {
      T sum = T(0);
      for (std::size_t n = 0; n < d.n; ++n) {
        const T* p = x.data() + n * d.sample() + c * plane;
        for (std::size_t i = 0; i < plane; ++i) sum += p[i];
      }
      mean = sum / count;
      T sq = T(0);
      for (std::size_t n = 0; n < d.n; ++n) {
        const T* p = x.data() + n * d.sample() + c * plane;
        for (std::size_t i = 0; i < plane; ++i) {
          const T dv = p[i] - mean;
          sq += dv * dv;
        }
      }
      var = sq / count;
      running_mean[c] = (T(1) - options.momentum) * running_mean[c] + options.momentum * mean;
      running_var[c] = (T(1) - options.momentum) * running_var[c] + options.momentum * var;
    } else {
      mean = running_mean[c];
      var = running_var[c];
    }
    const T inv_std = T(1) / std::sqrt(var + options.eps);
    cache.inv_std[c] = inv_std;
    for (std::size_t n = 0; n < d.n; ++n) {
      const std::size_t off = n * d.sample() + c * plane;
      const T* p = x.data() + off;
      T* xh = cache.xhat.data() + off;
      T* out = y.data() + off;
      for (std::size_t i = 0; i < plane; ++i) {
        xh[i] = (p[i] - mean) * inv_std;
        out[i] = gamma[c] * xh[i] + beta[c];
      }
    }
  }
  return {std::move(y), std::move(cache)};
}

template <typename T>
BatchNormGrads<T> batchnorm_grad(const BatchNormCache<T>& cache, const BasicTensor<T>& dy) {
  require(dy.shape() == cache.shape, "batchnorm_grad: dy has shape " + shape_string(dy.shape()) +
                                         ", expected " + shape_string(cache.shape));
  const ImageDims d = image_dims(dy, "batchnorm_grad");
  const std::size_t plane = d.plane();
  const T count = static_cast<T>(d.n * plane);
  BatchNormGrads<T> g{BasicTensor<T>(dy.shape()), BasicTensor<T>({d.c}), BasicTensor<T>({d.c})};
  for (std::size_t c = 0; c < d.c; ++c) {
    T sum_dy = T(0);
    T sum_dy_xhat = T(0);
    for (std::size_t n = 0; n < d.n; ++n) {
      const std::size_t off = n * d.sample() + c * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        sum_dy += dy[off + i];
        sum_dy_xhat += dy[off + i] * cache.xhat[off + i];
      }
    }
    g.dgamma[c] = sum_dy_xhat;
    g.dbeta[c] = sum_dy;
    const T scale = cache.gamma[c] * cache.inv_std[c];
    for (std::size_t n = 0; n < d.n; ++n) {
      const std::size_t off = n * d.sample() + c * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        if (cache.mode == Mode::train) {
          g.dx[off + i] = scale * (dy[off + i] - sum_dy / count -
                                   cache.xhat[off + i] * sum_dy_xhat / count);
        } else {
          g.dx[off + i] = scale * dy[off + i];
        }
      }
    }
  }
  return g;
}

// ------------------------------------------------------------ activations

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x) {
  BasicTensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
  return y;
}

template <typename T>
BasicTensor<T> relu_grad(const BasicTensor<T>& y, const BasicTensor<T>& dy) {
  require(y.shape() == dy.shape(), "relu_grad: shape mismatch");
  BasicTensor<T> dx(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = y[i] > T(0) ? dy[i] : T(0);
  return dx;
}

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& x) {
  BasicTensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    // Evaluated on the side that cannot overflow.
    if (x[i] >= T(0)) {
      y[i] = T(1) / (T(1) + std::exp(-x[i]));
    } else {
      const T e = std::exp(x[i]);
      y[i] = e / (T(1) + e);
    }
  }
  return y;
}

template <typename T>
BasicTensor<T> sigmoid_grad(const BasicTensor<T>& y, const BasicTensor<T>& dy) {
  require(y.shape() == dy.shape(), "sigmoid_grad: shape mismatch");
  BasicTensor<T> dx(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = dy[i] * y[i] * (T(1) - y[i]);
  return dx;
}

// ------------------------------------------------------- pool / upsample

template <typename T>
std::pair<BasicTensor<T>, PoolCache> maxpool2(const BasicTensor<T>& x) {
  const ImageDims d = image_dims(x, "maxpool2");
  require(d.h % 2 == 0 && d.w % 2 == 0,
          "maxpool2: spatial dims must be even, got " + shape_string(x.shape()));
  const std::size_t ho = d.h / 2;
  const std::size_t wo = d.w / 2;
  BasicTensor<T> y(image_shape(x, d.n, d.c, ho, wo));
  PoolCache cache{x.shape(), std::vector<std::uint32_t>(y.size())};
  std::size_t out = 0;
  for (std::size_t nc = 0; nc < d.n * d.c; ++nc) {
    const std::size_t base = nc * d.plane();
    for (std::size_t i = 0; i < ho; ++i) {
      for (std::size_t j = 0; j < wo; ++j, ++out) {
        const std::size_t top = base + 2 * i * d.w + 2 * j;
        const std::size_t candidates[4] = {top, top + 1, top + d.w, top + d.w + 1};
        std::size_t best = candidates[0];
        for (std::size_t q = 1; q < 4; ++q) {
          if (x[candidates[q]] > x[best]) best = candidates[q];
        }
        y[out] = x[best];
        cache.argmax[out] = static_cast<std::uint32_t>(best);
      }
    }
  }
  return {std::move(y), std::move(cache)};
}

template <typename T>
BasicTensor<T> maxpool2_grad(const PoolCache& cache, const BasicTensor<T>& dy) {
  require(dy.size() == cache.argmax.size(), "maxpool2_grad: dy does not match the forward output");
  BasicTensor<T> dx(cache.input_shape);
  for (std::size_t i = 0; i < dy.size(); ++i) dx[cache.argmax[i]] += dy[i];
  return dx;
}

template <typename T>
BasicTensor<T> upsample2(const BasicTensor<T>& x) {
  const ImageDims d = image_dims(x, "upsample2");
  const std::size_t wo = 2 * d.w;
  BasicTensor<T> y(image_shape(x, d.n, d.c, 2 * d.h, wo));
  for (std::size_t nc = 0; nc < d.n * d.c; ++nc) {
    const T* src = x.data() + nc * d.plane();
    T* dst = y.data() + nc * 4 * d.plane();
    for (std::size_t i = 0; i < d.h; ++i) {
      T* row = dst + 2 * i * wo;
      for (std::size_t j = 0; j < d.w; ++j) row[2 * j] = row[2 * j + 1] = src[i * d.w + j];
      std::copy_n(row, wo, row + wo);
    }
  }
  return y;
}

template <typename T>
BasicTensor<T> upsample2_grad(const BasicTensor<T>& dy) {
  const ImageDims d = image_dims(dy, "upsample2_grad");
  require(d.h % 2 == 0 && d.w % 2 == 0, "upsample2_grad: spatial dims must be even");
  const std::size_t ho = d.h / 2;
  const std::size_t wo = d.w / 2;
  BasicTensor<T> dx(image_shape(dy, d.n, d.c, ho, wo));
  for (std::size_t nc = 0; nc < d.n * d.c; ++nc) {
    const T* src = dy.data() + nc * d.plane();
    T* dst = dx.data() + nc * ho * wo;
    for (std::size_t i = 0; i < ho; ++i) {
      for (std::size_t j = 0; j < wo; ++j) {
        const T* top = src + 2 * i * d.w + 2 * j;
        dst[i * wo + j] = top[0] + top[1] + top[d.w] + top[d.w + 1];
      }
    }
  }
  return dx;
}

// ----------------------------------------------------------------- dropout

template <typename T>
std::pair<BasicTensor<T>, DropoutCache<T>> dropout(const BasicTensor<T>& x, double rate, Mode mode,
                                                   Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("dropout: rate must lie in [0,1), got " + std::to_string(rate));
  }
  if (mode == Mode::infer || rate == 0.0) return {x, DropoutCache<T>{}};
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  DropoutCache<T> cache{BasicTensor<T>(x.shape())};
  BasicTensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T m = uniform01(rng) < rate ? T(0) : keep_scale;
    cache.mask[i] = m;
    y[i] = x[i] * m;
  }
  return {std::move(y), std::move(cache)};
}

template <typename T>
BasicTensor<T> dropout_grad(const DropoutCache<T>& cache, const BasicTensor<T>& dy) {
  if (cache.mask.empty()) return dy;
  return mul(cache.mask, dy);
}

// -------------------------------------------------------------- gate merge

namespace {

template <typename T>
void check_gate(const BasicTensor<T>& fmaps, const BasicTensor<T>& gate) {
  const ImageDims d = image_dims(fmaps, "gate_merge");
  const Shape expected = fmaps.rank() == 3 ? Shape{d.c} : Shape{d.n, d.c};
  require(gate.shape() == expected, "gate_merge: gate has shape " + shape_string(gate.shape()) +
                                        ", expected " + shape_string(expected));
}

}  // namespace

template <typename T>
BasicTensor<T> gate_merge(const BasicTensor<T>& fmaps, const BasicTensor<T>& gate) {
  check_gate(fmaps, gate);
  const ImageDims d = image_dims(fmaps, "gate_merge");
  BasicTensor<T> y(fmaps.shape());
  for (std::size_t nc = 0; nc < d.n * d.c; ++nc) {
    const T gv = gate[nc];
    const std::size_t off = nc * d.plane();
    for (std::size_t i = 0; i < d.plane(); ++i) y[off + i] = gv * fmaps[off + i];
  }
  return y;
}

template <typename T>
GateGrads<T> gate_merge_grad(const BasicTensor<T>& fmaps, const BasicTensor<T>& gate,
                             const BasicTensor<T>& dy) {
  check_gate(fmaps, gate);
  require(dy.shape() == fmaps.shape(), "gate_merge_grad: dy shape mismatch");
  const ImageDims d = image_dims(fmaps, "gate_merge");
  GateGrads<T> g{BasicTensor<T>(fmaps.shape()), BasicTensor<T>(gate.shape())};
  for (std::size_t nc = 0; nc < d.n * d.c; ++nc) {
    const T gv = gate[nc];
    const std::size_t off = nc * d.plane();
    T sum = T(0);
    for (std::size_t i = 0; i < d.plane(); ++i) {
      g.dfmaps[off + i] = gv * dy[off + i];
      sum += fmaps[off + i] * dy[off + i];
    }
    g.dgate[nc] = sum;
  }
  return g;
}

// ---------------------------------------------------------- fully connected

template <typename T>
std::pair<BasicTensor<T>, FcCache<T>> fully_connected(const BasicTensor<T>& x,
                                                      const BasicTensor<T>& w,
                                                      const BasicTensor<T>& b) {
  require(w.rank() == 2, "fully_connected: weight must be [n_out,n_in], got " +
                             shape_string(w.shape()));
  const std::size_t n_out = w.dim(0);
  const std::size_t n_in = w.dim(1);
  require(b.rank() == 1 && b.dim(0) == n_out,
          "fully_connected: bias shape " + shape_string(b.shape()) + " does not match " +
              std::to_string(n_out) + " outputs");
  const bool batched = x.rank() == 2;
  require((x.rank() == 1 && x.dim(0) == n_in) || (batched && x.dim(1) == n_in),
          "fully_connected: input " + shape_string(x.shape()) + " does not match " +
              std::to_string(n_in) + " inputs");
  const std::size_t n = batched ? x.dim(0) : 1;
  BasicTensor<T> y({n, n_out});
  kernels::gemm_nt(n, n_out, n_in, x.data(), w.data(), y.data(), false);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t o = 0; o < n_out; ++o) y[s * n_out + o] += b[o];
  }
  FcCache<T> cache{batched ? x : x.reshaped({1, n_in}), w, batched};
  if (!batched) y = std::move(y).reshaped({n_out});
  return {std::move(y), std::move(cache)};
}

template <typename T>
FcGrads<T> fully_connected_grad(const FcCache<T>& cache, const BasicTensor<T>& dy) {
  const std::size_t n = cache.input.dim(0);
  const std::size_t n_in = cache.input.dim(1);
  const std::size_t n_out = cache.weight.dim(0);
  require(dy.size() == n * n_out && (dy.rank() == 2) == cache.batched,
          "fully_connected_grad: dy has shape " + shape_string(dy.shape()));
  FcGrads<T> g{BasicTensor<T>({n, n_in}), BasicTensor<T>({n_out, n_in}),
               BasicTensor<T>({n_out})};
  kernels::gemm_nn(n, n_in, n_out, dy.data(), cache.weight.data(), g.dx.data(), false);
  std::vector<T> dyt(n_out * n);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t o = 0; o < n_out; ++o) dyt[o * n + s] = dy[s * n_out + o];
  }
  kernels::gemm_nn(n_out, n_in, n, dyt.data(), cache.input.data(), g.dw.data(), false);
  for (std::size_t o = 0; o < n_out; ++o) {
    T sum = T(0);
    for (std::size_t s = 0; s < n; ++s) sum += dyt[o * n + s];
    g.db[o] = sum;
  }
  if (!cache.batched) g.dx = std::move(g.dx).reshaped({n_in});
  return g;
}

#define YNET_INSTANTIATE_LAYERS(T)                                                              \
  template std::pair<BasicTensor<T>, ConvCache<T>> conv2d(                                      \
      const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&, std::size_t);        \
  template ConvGrads<T> conv2d_grad(const ConvCache<T>&, const BasicTensor<T>&);                \
  template struct BatchNormState<T>;                                                            \
  template std::pair<BasicTensor<T>, BatchNormCache<T>> batchnorm(                              \
      const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&, BasicTensor<T>&,     \
      BasicTensor<T>&, Mode, const BatchNormOptions<T>&);                                       \
  template BatchNormGrads<T> batchnorm_grad(const BatchNormCache<T>&, const BasicTensor<T>&);   \
  template BasicTensor<T> relu(const BasicTensor<T>&);                                          \
  template BasicTensor<T> relu_grad(const BasicTensor<T>&, const BasicTensor<T>&);              \
  template BasicTensor<T> sigmoid(const BasicTensor<T>&);                                       \
  template BasicTensor<T> sigmoid_grad(const BasicTensor<T>&, const BasicTensor<T>&);           \
  template std::pair<BasicTensor<T>, PoolCache> maxpool2(const BasicTensor<T>&);                \
  template BasicTensor<T> maxpool2_grad(const PoolCache&, const BasicTensor<T>&);               \
  template BasicTensor<T> upsample2(const BasicTensor<T>&);                                     \
  template BasicTensor<T> upsample2_grad(const BasicTensor<T>&);                                \
  template std::pair<BasicTensor<T>, DropoutCache<T>> dropout(const BasicTensor<T>&, double,    \
                                                              Mode, Rng&);                      \
  template BasicTensor<T> dropout_grad(const DropoutCache<T>&, const BasicTensor<T>&);          \
  template BasicTensor<T> gate_merge(const BasicTensor<T>&, const BasicTensor<T>&);             \
  template GateGrads<T> gate_merge_grad(const BasicTensor<T>&, const BasicTensor<T>&,           \
                                        const BasicTensor<T>&);                                 \
  template std::pair<BasicTensor<T>, FcCache<T>> fully_connected(                               \
      const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&);                     \
  template FcGrads<T> fully_connected_grad(const FcCache<T>&, const BasicTensor<T>&);

YNET_INSTANTIATE_LAYERS(float)
YNET_INSTANTIATE_LAYERS(double)

}  // namespace ynet
