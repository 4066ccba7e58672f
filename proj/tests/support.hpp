#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "ynet/random.hpp"
#include "ynet/tensor.hpp"

namespace ynet::test {

template <typename T>
BasicTensor<T> random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  BasicTensor<T> t(shape);
  for (auto& v : t.values()) v = static_cast<T>(lo + (hi - lo) * uniform01(rng));
  return t;
}

/// Small integers in [-range, range]: sums of products stay exact in float,
/// so any summation order gives the same bits.
inline Tensor integer_tensor(const Shape& shape, Rng& rng, int range = 4) {
  Tensor t(shape);
  for (auto& v : t.values()) {
    v = static_cast<float>(static_cast<int>(uniform01(rng) * (2 * range + 1)) - range);
  }
  return t;
}

template <typename T>
T dot(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  T s = T(0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// |a - b| / max(|a|, |b|, floor).
inline double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Largest relative error between `analytic` and central differences of
/// `f` with respect to every element of `x` (perturbed in place).
inline double max_fd_error(Tensor64& x, const Tensor64& analytic, const std::function<double()>& f,
                           double step = 1e-3) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double up = f();
    x[i] = saved - step;
    const double down = f();
    x[i] = saved;
    worst = std::max(worst, rel_err((up - down) / (2.0 * step), analytic[i]));
  }
  return worst;
}

}  // namespace ynet::test
