#include "minima/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace minima::kernels {
namespace {

void gemm_nn_scalar(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                    const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * ldc;
        if (!accumulate) std::fill(crow, crow + n, 0.0);
        const double* arow = a + i * lda;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b + p * ldb;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void gemm_tn_scalar(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                    const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
    if (!accumulate) {
        for (std::size_t p = 0; p < k; ++p) std::fill(c + p * ldc, c + p * ldc + n, 0.0);
    }
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * lda;
        const double* brow = b + i * ldb;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            double* crow = c + p * ldc;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void bias_activate_scalar(double* z, std::size_t m, std::size_t n, std::size_t ldz, const double* bias,
                          bool relu) {
    for (std::size_t i = 0; i < m; ++i) {
        double* row = z + i * ldz;
        for (std::size_t j = 0; j < n; ++j) {
            const double v = row[j] + bias[j];
            row[j] = (relu && v < 0.0) ? 0.0 : v;
        }
    }
}

void relu_backward_scalar(const double* act, double* grad, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!(act[i] > 0.0)) grad[i] = 0.0;
    }
}

void column_sums_scalar(const double* a, std::size_t m, std::size_t n, std::size_t lda, double* out) {
    std::fill(out, out + n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = a + i * lda;
        for (std::size_t j = 0; j < n; ++j) out[j] += row[j];
    }
}

bool all_finite_scalar(const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(x[i])) return false;
    }
    return true;
}

}  // namespace

const KernelTable& scalar_table() noexcept {
    static const KernelTable table{Isa::Scalar,        "scalar",           gemm_nn_scalar,
                                   gemm_tn_scalar,     dot_scalar,         axpy_scalar,
                                   bias_activate_scalar, relu_backward_scalar, column_sums_scalar,
                                   all_finite_scalar};
    return table;
}

}  // namespace minima::kernels
