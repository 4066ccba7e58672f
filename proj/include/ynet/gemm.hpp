#pragma once

#include <cstddef>

// Raw matrix kernels shared by matmul, convolution and the fully connected
// layer. All matrices are dense row-major with the leading dimension equal
// to the column count. Every output element accumulates its k-terms in
// ascending order, independent of blocking and of the thread count.

namespace ynet::kernels {

/// C[m,n] (+)= sum_k A[m,k] * B[k,n]
template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
             bool accumulate);

/// C[m,n] (+)= sum_k A[m,k] * B[n,k]
template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
             bool accumulate);

}  // namespace ynet::kernels

namespace ynet {

/// Caps the worker threads used by the kernels (0 restores the default).
void set_num_threads(int threads);
int num_threads();

}  // namespace ynet
