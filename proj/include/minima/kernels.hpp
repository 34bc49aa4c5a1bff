#pragma once

// Dense double-precision kernels used by the network and the metrics.
//
// Every kernel has a portable scalar reference implementation. On x86-64 an
// AVX2+FMA variant is compiled into the same binary and selected at runtime
// when the CPU reports both features. Setting MINIMA_KERNELS=scalar in the
// environment forces the reference path.
//
// All matrices are row-major with explicit leading dimensions.

#include <cstddef>
#include <string_view>

namespace minima::kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
    Isa isa;
    std::string_view name;

    // C[m x n] = beta * C + A[m x k] * B[k x n]; beta is 0 or 1.
    void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                    const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate);

    // C[k x n] = beta * C + A[m x k]^T * B[m x n]; beta is 0 or 1.
    void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                    const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate);

    double (*dot)(const double* x, const double* y, std::size_t n);

    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

    // Adds bias[j] to every row of the m x n matrix and applies max(0, .) in place
    // when relu is set.
    void (*bias_activate)(double* z, std::size_t m, std::size_t n, std::size_t ldz, const double* bias,
                          bool relu);

    // grad[i] = 0 wherever the ReLU output act[i] is not positive (subgradient at 0 is 0).
    void (*relu_backward)(const double* act, double* grad, std::size_t n);

    // Column sums of an m x n matrix: out[j] = sum_i a[i, j] (overwrites out).
    void (*column_sums)(const double* a, std::size_t m, std::size_t n, std::size_t lda, double* out);

    bool (*all_finite)(const double* x, std::size_t n);
};

const KernelTable& scalar_table() noexcept;

/// Returns nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2_table() noexcept;

/// Kernel table chosen for this process (first call decides, then cached).
const KernelTable& active() noexcept;

bool cpu_supports_avx2() noexcept;

}  // namespace minima::kernels
