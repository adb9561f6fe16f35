// Scalar reference kernels. Built with -ffp-contract=off so the exact IEEE
// operation sequence is pinned; the SIMD variants mirror it (fma only where
// noted) and the equivalence tests rely on that.

#include <cmath>
#include <cstring>

#include "hfnerf/kernels.hpp"

namespace hfnerf::kern {

namespace {

void s_gemm_nn(int m, int n, int k, const double* a, const double* b, double* c,
               bool accumulate) {
    for (int i = 0; i < m; ++i) {
        double* ci = c + static_cast<std::size_t>(i) * n;
        if (!accumulate) std::memset(ci, 0, sizeof(double) * static_cast<std::size_t>(n));
        const double* ai = a + static_cast<std::size_t>(i) * k;
        for (int kk = 0; kk < k; ++kk) {
            const double av = ai[kk];
            const double* bk = b + static_cast<std::size_t>(kk) * n;
            for (int j = 0; j < n; ++j) ci[j] += av * bk[j];
        }
    }
}

void s_gemm_tn(int m, int n, int k, const double* a, int lda, const double* b, double* c,
               bool accumulate) {
    if (!accumulate) {
        std::memset(c, 0, sizeof(double) * static_cast<std::size_t>(m) * n);
    }
    for (int l = 0; l < k; ++l) {
        const double* al = a + static_cast<std::size_t>(l) * lda;
        const double* bl = b + static_cast<std::size_t>(l) * n;
        for (int i = 0; i < m; ++i) {
            const double av = al[i];
            double* ci = c + static_cast<std::size_t>(i) * n;
            for (int j = 0; j < n; ++j) ci[j] += av * bl[j];
        }
    }
}

void s_add(std::int64_t n, const double* a, const double* b, double* c) {
    for (std::int64_t i = 0; i < n; ++i) c[i] = a[i] + b[i];
}

void s_mul(std::int64_t n, const double* a, const double* b, double* c) {
    for (std::int64_t i = 0; i < n; ++i) c[i] = a[i] * b[i];
}

void s_mul_acc(std::int64_t n, const double* a, const double* b, double* c) {
    for (std::int64_t i = 0; i < n; ++i) c[i] += a[i] * b[i];
}

void s_axpy(std::int64_t n, double alpha, const double* x, double* y) {
    for (std::int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void s_scale(std::int64_t n, double alpha, const double* x, double* y) {
    for (std::int64_t i = 0; i < n; ++i) y[i] = alpha * x[i];
}

void s_relu(std::int64_t n, const double* x, double* y) {
    for (std::int64_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void s_relu_mask_acc(std::int64_t n, const double* out, const double* g, double* dx) {
    for (std::int64_t i = 0; i < n; ++i) dx[i] += out[i] > 0.0 ? g[i] : 0.0;
}

void s_bias_row_acc(int m, int n, const double* bias, double* c) {
    for (int i = 0; i < m; ++i) {
        double* ci = c + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) ci[j] += bias[j];
    }
}

void s_col_sum_acc(int m, int n, const double* a, int lda, double* out) {
    for (int i = 0; i < m; ++i) {
        const double* ai = a + static_cast<std::size_t>(i) * lda;
        for (int j = 0; j < n; ++j) out[j] += ai[j];
    }
}

double s_sum(std::int64_t n, const double* x) {
    double s = 0.0;
    for (std::int64_t i = 0; i < n; ++i) s += x[i];
    return s;
}

double s_sq_diff_sum(std::int64_t n, const double* a, const double* b) {
    double s = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void s_adam_update(std::int64_t n, double* p, double* m, double* v, const double* g, double lr,
                   double beta1, double beta2, double eps, double bc1, double bc2) {
    const double c1 = 1.0 - beta1;
    const double c2 = 1.0 - beta2;
    for (std::int64_t i = 0; i < n; ++i) {
        // fma here matches the fmadd the SIMD variants use for the moment updates
        m[i] = std::fma(beta1, m[i], c1 * g[i]);
        const double g2 = g[i] * g[i];
        v[i] = std::fma(beta2, v[i], c2 * g2);
        const double num = m[i] * bc1;
        const double den = std::sqrt(v[i] * bc2) + eps;
        const double step = lr * (num / den);
        p[i] = p[i] - step;
    }
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable t = {
        s_gemm_nn,  s_gemm_tn,       s_add,          s_mul, s_mul_acc,     s_axpy,
        s_scale,    s_relu,          s_relu_mask_acc, s_bias_row_acc, s_col_sum_acc, s_sum,
        s_sq_diff_sum, s_adam_update, "scalar",
    };
    return t;
}

}  // namespace hfnerf::kern
