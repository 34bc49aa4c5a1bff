// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after cpu_supports_avx2() returned true.

#include "minima/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace minima::kernels {
namespace {

// Summation order per output element matches the scalar reference: C is loaded
// first and products are accumulated in increasing p.

// 4 rows x 8 columns of C.
inline void nn_block_4x8(std::size_t k, const double* a, std::size_t lda, const double* b, std::size_t ldb,
                         double* c, std::size_t ldc, bool accumulate) {
    __m256d c00, c01, c10, c11, c20, c21, c30, c31;
    if (accumulate) {
        c00 = _mm256_loadu_pd(c);
        c01 = _mm256_loadu_pd(c + 4);
        c10 = _mm256_loadu_pd(c + ldc);
        c11 = _mm256_loadu_pd(c + ldc + 4);
        c20 = _mm256_loadu_pd(c + 2 * ldc);
        c21 = _mm256_loadu_pd(c + 2 * ldc + 4);
        c30 = _mm256_loadu_pd(c + 3 * ldc);
        c31 = _mm256_loadu_pd(c + 3 * ldc + 4);
    } else {
        c00 = c01 = c10 = c11 = c20 = c21 = c30 = c31 = _mm256_setzero_pd();
    }
    const double* a0 = a;
    const double* a1 = a + lda;
    const double* a2 = a + 2 * lda;
    const double* a3 = a + 3 * lda;
    for (std::size_t p = 0; p < k; ++p) {
        const double* brow = b + p * ldb;
        const __m256d b0 = _mm256_loadu_pd(brow);
        const __m256d b1 = _mm256_loadu_pd(brow + 4);
        __m256d av = _mm256_broadcast_sd(a0 + p);
        c00 = _mm256_fmadd_pd(av, b0, c00);
        c01 = _mm256_fmadd_pd(av, b1, c01);
        av = _mm256_broadcast_sd(a1 + p);
        c10 = _mm256_fmadd_pd(av, b0, c10);
        c11 = _mm256_fmadd_pd(av, b1, c11);
        av = _mm256_broadcast_sd(a2 + p);
        c20 = _mm256_fmadd_pd(av, b0, c20);
        c21 = _mm256_fmadd_pd(av, b1, c21);
        av = _mm256_broadcast_sd(a3 + p);
        c30 = _mm256_fmadd_pd(av, b0, c30);
        c31 = _mm256_fmadd_pd(av, b1, c31);
    }
    _mm256_storeu_pd(c, c00);
    _mm256_storeu_pd(c + 4, c01);
    _mm256_storeu_pd(c + ldc, c10);
    _mm256_storeu_pd(c + ldc + 4, c11);
    _mm256_storeu_pd(c + 2 * ldc, c20);
    _mm256_storeu_pd(c + 2 * ldc + 4, c21);
    _mm256_storeu_pd(c + 3 * ldc, c30);
    _mm256_storeu_pd(c + 3 * ldc + 4, c31);
}

// One row of C, columns [0, n). Vector body over 4-wide chunks, scalar FMA tail.
inline void nn_row(std::size_t n, std::size_t k, const double* arow, const double* b, std::size_t ldb,
                   double* crow, bool accumulate) {
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        __m256d acc = accumulate ? _mm256_loadu_pd(crow + j) : _mm256_setzero_pd();
        for (std::size_t p = 0; p < k; ++p) {
            acc = _mm256_fmadd_pd(_mm256_broadcast_sd(arow + p), _mm256_loadu_pd(b + p * ldb + j), acc);
        }
        _mm256_storeu_pd(crow + j, acc);
    }
    for (; j < n; ++j) {
        double acc = accumulate ? crow[j] : 0.0;
        for (std::size_t p = 0; p < k; ++p) acc = std::fma(arow[p], b[p * ldb + j], acc);
        crow[j] = acc;
    }
}

double dot_avx2(const double* x, const double* y, std::size_t n);

void gemm_nn_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                  const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
    if (n == 1 && ldb == 1) {
        // Matrix-vector product: one dot product per row.
        for (std::size_t i = 0; i < m; ++i) {
            const double d = dot_avx2(a + i * lda, b, k);
            c[i * ldc] = accumulate ? c[i * ldc] + d : d;
        }
        return;
    }
    const std::size_t n8 = n - n % 8;
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        for (std::size_t j = 0; j < n8; j += 8) {
            nn_block_4x8(k, a + i * lda, lda, b + j, ldb, c + i * ldc + j, ldc, accumulate);
        }
        if (n8 < n) {
            for (std::size_t r = 0; r < 4; ++r) {
                nn_row(n - n8, k, a + (i + r) * lda, b + n8, ldb, c + (i + r) * ldc + n8, accumulate);
            }
        }
    }
    for (; i < m; ++i) nn_row(n, k, a + i * lda, b, ldb, c + i * ldc, accumulate);
}

// C[k x n] (+)= A^T B. Blocks of 4 rows of C (4 columns of A) x 8 columns.
inline void tn_block_4x8(std::size_t m, const double* a, std::size_t lda, const double* b, std::size_t ldb,
                         double* c, std::size_t ldc, bool accumulate) {
    __m256d c00, c01, c10, c11, c20, c21, c30, c31;
    if (accumulate) {
        c00 = _mm256_loadu_pd(c);
        c01 = _mm256_loadu_pd(c + 4);
        c10 = _mm256_loadu_pd(c + ldc);
        c11 = _mm256_loadu_pd(c + ldc + 4);
        c20 = _mm256_loadu_pd(c + 2 * ldc);
        c21 = _mm256_loadu_pd(c + 2 * ldc + 4);
        c30 = _mm256_loadu_pd(c + 3 * ldc);
        c31 = _mm256_loadu_pd(c + 3 * ldc + 4);
    } else {
        c00 = c01 = c10 = c11 = c20 = c21 = c30 = c31 = _mm256_setzero_pd();
    }
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * lda;
        const double* brow = b + i * ldb;
        const __m256d b0 = _mm256_loadu_pd(brow);
        const __m256d b1 = _mm256_loadu_pd(brow + 4);
        __m256d av = _mm256_broadcast_sd(arow);
        c00 = _mm256_fmadd_pd(av, b0, c00);
        c01 = _mm256_fmadd_pd(av, b1, c01);
        av = _mm256_broadcast_sd(arow + 1);
        c10 = _mm256_fmadd_pd(av, b0, c10);
        c11 = _mm256_fmadd_pd(av, b1, c11);
        av = _mm256_broadcast_sd(arow + 2);
        c20 = _mm256_fmadd_pd(av, b0, c20);
        c21 = _mm256_fmadd_pd(av, b1, c21);
        av = _mm256_broadcast_sd(arow + 3);
        c30 = _mm256_fmadd_pd(av, b0, c30);
        c31 = _mm256_fmadd_pd(av, b1, c31);
    }
    _mm256_storeu_pd(c, c00);
    _mm256_storeu_pd(c + 4, c01);
    _mm256_storeu_pd(c + ldc, c10);
    _mm256_storeu_pd(c + ldc + 4, c11);
    _mm256_storeu_pd(c + 2 * ldc, c20);
    _mm256_storeu_pd(c + 2 * ldc + 4, c21);
    _mm256_storeu_pd(c + 3 * ldc, c30);
    _mm256_storeu_pd(c + 3 * ldc + 4, c31);
}

// Single row p of C = A^T B, columns [0, n).
inline void tn_row(std::size_t m, std::size_t n, const double* acol, std::size_t lda, const double* b,
                   std::size_t ldb, double* crow, bool accumulate) {
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        __m256d acc = accumulate ? _mm256_loadu_pd(crow + j) : _mm256_setzero_pd();
        for (std::size_t i = 0; i < m; ++i) {
            acc = _mm256_fmadd_pd(_mm256_broadcast_sd(acol + i * lda), _mm256_loadu_pd(b + i * ldb + j), acc);
        }
        _mm256_storeu_pd(crow + j, acc);
    }
    for (; j < n; ++j) {
        double acc = accumulate ? crow[j] : 0.0;
        for (std::size_t i = 0; i < m; ++i) acc = std::fma(acol[i * lda], b[i * ldb + j], acc);
        crow[j] = acc;
    }
}

void tn_panel(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda, const double* b,
              std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
    const std::size_t n8 = n - n % 8;
    std::size_t p = 0;
    for (; p + 4 <= k; p += 4) {
        for (std::size_t j = 0; j < n8; j += 8) {
            tn_block_4x8(m, a + p, lda, b + j, ldb, c + p * ldc + j, ldc, accumulate);
        }
        if (n8 < n) {
            for (std::size_t r = 0; r < 4; ++r) {
                tn_row(m, n - n8, a + p + r, lda, b + n8, ldb, c + (p + r) * ldc + n8, accumulate);
            }
        }
    }
    for (; p < k; ++p) tn_row(m, n, a + p, lda, b, ldb, c + p * ldc, accumulate);
}

// Row panels sized so the A and B slices of a panel stay in L1. Each element
// of C still accumulates over i in ascending order.
void gemm_tn_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                  const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
    if (n == 1) {
        // C[k x 1] += sum_i b[i] * A[i, :], one vectorized axpy per row.
        if (!accumulate) {
            for (std::size_t p = 0; p < k; ++p) c[p * ldc] = 0.0;
        }
        if (ldc == 1) {
            for (std::size_t i = 0; i < m; ++i) {
                const __m256d bv = _mm256_set1_pd(b[i * ldb]);
                const double* arow = a + i * lda;
                std::size_t p = 0;
                for (; p + 4 <= k; p += 4) {
                    _mm256_storeu_pd(c + p, _mm256_fmadd_pd(bv, _mm256_loadu_pd(arow + p), _mm256_loadu_pd(c + p)));
                }
                for (; p < k; ++p) c[p] = std::fma(b[i * ldb], arow[p], c[p]);
            }
            return;
        }
    }
    constexpr std::size_t kPanelBytes = 32 * 1024;
    const std::size_t rows = std::max<std::size_t>(16, kPanelBytes / (sizeof(double) * (k + n)));
    std::size_t i0 = 0;
    do {
        const std::size_t len = std::min(rows, m - i0);
        tn_panel(len, n, k, a + i0 * lda, lda, b + i0 * ldb, ldb, c, ldc, accumulate || i0 > 0);
        i0 += len;
    } while (i0 < m);
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s = std::fma(x[i], y[i], s);
    return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void bias_activate_avx2(double* z, std::size_t m, std::size_t n, std::size_t ldz, const double* bias,
                        bool relu) {
    const __m256d zero = _mm256_setzero_pd();
    for (std::size_t i = 0; i < m; ++i) {
        double* row = z + i * ldz;
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) {
            __m256d v = _mm256_add_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(bias + j));
            // max(0, v) returns v when v is NaN, matching the scalar path.
            if (relu) v = _mm256_max_pd(zero, v);
            _mm256_storeu_pd(row + j, v);
        }
        for (; j < n; ++j) {
            const double v = row[j] + bias[j];
            row[j] = (relu && v < 0.0) ? 0.0 : v;
        }
    }
}

void relu_backward_avx2(const double* act, double* grad, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(act + i), zero, _CMP_GT_OQ);
        _mm256_storeu_pd(grad + i, _mm256_and_pd(mask, _mm256_loadu_pd(grad + i)));
    }
    for (; i < n; ++i) {
        if (!(act[i] > 0.0)) grad[i] = 0.0;
    }
}

void column_sums_avx2(const double* a, std::size_t m, std::size_t n, std::size_t lda, double* out) {
    std::fill(out, out + n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = a + i * lda;
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) {
            _mm256_storeu_pd(out + j, _mm256_add_pd(_mm256_loadu_pd(out + j), _mm256_loadu_pd(row + j)));
        }
        for (; j < n; ++j) out[j] += row[j];
    }
}

// x - x is 0 for finite x and NaN otherwise; any NaN lane survives the sum.
bool all_finite_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        acc = _mm256_add_pd(acc, _mm256_sub_pd(v, v));
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += x[i] - x[i];
    return hsum(acc) + tail == 0.0;
}

const KernelTable kAvx2Table{Isa::Avx2,         "avx2",           gemm_nn_avx2,
                             gemm_tn_avx2,      dot_avx2,         axpy_avx2,
                             bias_activate_avx2, relu_backward_avx2, column_sums_avx2,
                             all_finite_avx2};

}  // namespace

const KernelTable* avx2_table_unchecked() noexcept { return &kAvx2Table; }

}  // namespace minima::kernels

#else

namespace minima::kernels {
const KernelTable* avx2_table_unchecked() noexcept { return nullptr; }
}  // namespace minima::kernels

#endif
