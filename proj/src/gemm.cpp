#include "ynet/gemm.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ynet {

namespace {
int g_threads = 0;
}

void set_num_threads(int threads) {
  g_threads = std::max(threads, 0);
#ifdef _OPENMP
  omp_set_num_threads(g_threads > 0 ? g_threads : omp_get_num_procs());
#endif
}

int num_threads() {
#ifdef _OPENMP
  return g_threads > 0 ? g_threads : omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace ynet

namespace ynet::kernels {

namespace {

// Register tile: kRows rows of C by one 128-byte-per-row strip of columns.
constexpr std::size_t kRows = 8;
template <typename T>
constexpr std::size_t kCols = 128 / sizeof(T);

// Work below this many multiply-adds stays on the calling thread.
constexpr std::size_t kParallelThreshold = 1 << 16;

typedef float VecF __attribute__((vector_size(64)));
typedef double VecD __attribute__((vector_size(64)));

template <typename T>
struct VecOf;
template <>
struct VecOf<float> {
  using type = VecF;
};
template <>
struct VecOf<double> {
  using type = VecD;
};
template <typename T>
using Vec = typename VecOf<T>::type;

template <typename T>
constexpr std::size_t kLanes = 64 / sizeof(T);

template <typename T>
inline Vec<T> load(const T* p) {
  Vec<T> v;
  __builtin_memcpy(&v, p, sizeof(v));
  return v;
}

template <typename T>
inline void store(T* p, const Vec<T>& v) {
  __builtin_memcpy(p, &v, sizeof(v));
}

template <typename T>
void tile_nn_full(std::size_t n, std::size_t k, const T* a, const T* b, T* c, std::size_t row0,
                  std::size_t col0, bool accumulate) {
  constexpr std::size_t L = kLanes<T>;
  constexpr std::size_t V = kCols<T> / L;
  Vec<T> acc[kRows][V];
#pragma GCC unroll 8
  for (std::size_t i = 0; i < kRows; ++i) {
#pragma GCC unroll 4
    for (std::size_t v = 0; v < V; ++v) {
      acc[i][v] = accumulate ? load(c + (row0 + i) * n + col0 + v * L) : Vec<T>{};
    }
  }
  const T* arow = a + row0 * k;
  for (std::size_t p = 0; p < k; ++p) {
    const T* brow = b + p * n + col0;
    Vec<T> bv[V];
#pragma GCC unroll 4
    for (std::size_t v = 0; v < V; ++v) bv[v] = load(brow + v * L);
#pragma GCC unroll 8
    for (std::size_t i = 0; i < kRows; ++i) {
      const T av = arow[i * k + p];
#pragma GCC unroll 4
      for (std::size_t v = 0; v < V; ++v) acc[i][v] += av * bv[v];
    }
  }
#pragma GCC unroll 8
  for (std::size_t i = 0; i < kRows; ++i) {
#pragma GCC unroll 4
    for (std::size_t v = 0; v < V; ++v) store(c + (row0 + i) * n + col0 + v * L, acc[i][v]);
  }
}

template <typename T>
void tile_nn_edge(std::size_t n, std::size_t k, const T* a, const T* b, T* c, std::size_t row0,
                  std::size_t rows, std::size_t col0, std::size_t cols, bool accumulate) {
  constexpr std::size_t NC = kCols<T>;
  T acc[NC];
  for (std::size_t i = row0; i < row0 + rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) acc[j] = accumulate ? c[i * n + col0 + j] : T(0);
    const T* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      const T* brow = b + p * n + col0;
      for (std::size_t j = 0; j < cols; ++j) acc[j] += av * brow[j];
    }
    for (std::size_t j = 0; j < cols; ++j) c[i * n + col0 + j] = acc[j];
  }
}

// Lane j of a partial-sum vector accumulates every term p with p % L == j;
// the lanes are then summed in order. Both nt paths share this layout, so
// an element's value does not depend on which path computed it.
template <typename T>
T reduce_lanes(const Vec<T>& v) {
  T sum = T(0);
  for (std::size_t j = 0; j < kLanes<T>; ++j) sum += v[j];
  return sum;
}

template <typename T>
Vec<T> load_tail(const T* p, std::size_t count) {
  Vec<T> v{};
  for (std::size_t j = 0; j < count; ++j) v[j] = p[j];
  return v;
}

template <typename T>
T dot(const T* x, const T* y, std::size_t len) {
  constexpr std::size_t L = kLanes<T>;
  Vec<T> part{};
  std::size_t p = 0;
  for (; p + L <= len; p += L) part += load(x + p) * load(y + p);
  if (p < len) part += load_tail(x + p, len - p) * load_tail(y + p, len - p);
  return reduce_lanes<T>(part);
}

constexpr std::size_t kDotBlock = 4;

template <typename T>
void tile_nt_full(std::size_t n, std::size_t k, const T* a, const T* b, T* c, std::size_t row0,
                  std::size_t col0, bool accumulate) {
  constexpr std::size_t L = kLanes<T>;
  Vec<T> acc[kDotBlock][kDotBlock] = {};
  std::size_t p = 0;
  for (; p + L <= k; p += L) {
    Vec<T> av[kDotBlock];
    Vec<T> bv[kDotBlock];
#pragma GCC unroll 4
    for (std::size_t i = 0; i < kDotBlock; ++i) av[i] = load(a + (row0 + i) * k + p);
#pragma GCC unroll 4
    for (std::size_t j = 0; j < kDotBlock; ++j) bv[j] = load(b + (col0 + j) * k + p);
#pragma GCC unroll 4
    for (std::size_t i = 0; i < kDotBlock; ++i) {
#pragma GCC unroll 4
      for (std::size_t j = 0; j < kDotBlock; ++j) acc[i][j] += av[i] * bv[j];
    }
  }
  if (p < k) {
    for (std::size_t i = 0; i < kDotBlock; ++i) {
      const Vec<T> at = load_tail(a + (row0 + i) * k + p, k - p);
      for (std::size_t j = 0; j < kDotBlock; ++j) {
        acc[i][j] += at * load_tail(b + (col0 + j) * k + p, k - p);
      }
    }
  }
  for (std::size_t i = 0; i < kDotBlock; ++i) {
    for (std::size_t j = 0; j < kDotBlock; ++j) {
      const T d = reduce_lanes<T>(acc[i][j]);
      T& out = c[(row0 + i) * n + col0 + j];
      out = accumulate ? out + d : d;
    }
  }
}

}  // namespace

template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
             bool accumulate) {
  if (m == 0 || n == 0) return;
  if (k == 0) {
    if (!accumulate) std::fill(c, c + m * n, T(0));
    return;
  }
  constexpr std::size_t NC = kCols<T>;
  const std::size_t col_tiles = (n + NC - 1) / NC;
  const std::size_t row_tiles = (m + kRows - 1) / kRows;
  const long long tiles = static_cast<long long>(col_tiles * row_tiles);
  const bool parallel = m * n * k >= kParallelThreshold;
  // Column strips outermost so one strip of B stays cache-resident while
  // every row tile of A streams past it.
#pragma omp parallel for schedule(static) if (parallel)
  for (long long t = 0; t < tiles; ++t) {
    const std::size_t ct = static_cast<std::size_t>(t) / row_tiles;
    const std::size_t rt = static_cast<std::size_t>(t) % row_tiles;
    const std::size_t row0 = rt * kRows;
    const std::size_t col0 = ct * NC;
    const std::size_t rows = std::min(kRows, m - row0);
    const std::size_t cols = std::min(NC, n - col0);
    if (rows == kRows && cols == NC) {
      tile_nn_full(n, k, a, b, c, row0, col0, accumulate);
    } else {
      tile_nn_edge(n, k, a, b, c, row0, rows, col0, cols, accumulate);
    }
  }
}

template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
             bool accumulate) {
  if (m == 0 || n == 0) return;
  const std::size_t row_tiles = (m + kDotBlock - 1) / kDotBlock;
  const std::size_t col_tiles = (n + kDotBlock - 1) / kDotBlock;
  const long long tiles = static_cast<long long>(row_tiles * col_tiles);
  const bool parallel = m * n * k >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (parallel)
  for (long long t = 0; t < tiles; ++t) {
    const std::size_t row0 = static_cast<std::size_t>(t) / col_tiles * kDotBlock;
    const std::size_t col0 = static_cast<std::size_t>(t) % col_tiles * kDotBlock;
    if (row0 + kDotBlock <= m && col0 + kDotBlock <= n) {
      tile_nt_full(n, k, a, b, c, row0, col0, accumulate);
      continue;
    }
    for (std::size_t i = row0; i < std::min(row0 + kDotBlock, m); ++i) {
      for (std::size_t j = col0; j < std::min(col0 + kDotBlock, n); ++j) {
        const T d = dot(a + i * k, b + j * k, k);
        c[i * n + j] = accumulate ? c[i * n + j] + d : d;
      }
    }
  }
}

template void gemm_nn<float>(std::size_t, std::size_t, std::size_t, const float*, const float*,
                             float*, bool);
template void gemm_nn<double>(std::size_t, std::size_t, std::size_t, const double*,
                              const double*, double*, bool);
template void gemm_nt<float>(std::size_t, std::size_t, std::size_t, const float*, const float*,
                             float*, bool);
template void gemm_nt<double>(std::size_t, std::size_t, std::size_t, const double*,
                              const double*, double*, bool);

}  // namespace ynet::kernels
