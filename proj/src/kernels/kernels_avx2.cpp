// AVX2+FMA kernel variants. Per output element the operation sequence matches
// the scalar reference except where reductions reassociate (gemm accumulators,
// sum); elementwise kernels are bitwise-identical to scalar.

#include "hfnerf/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstring>

namespace hfnerf::kern {

namespace {

// 4x8 register-blocked microkernel: 8 ymm accumulators, k innermost.
void a2_gemm_nn(int m, int n, int k, const double* a, const double* b, double* c,
                bool accumulate) {
    int j0 = 0;
    for (; j0 + 8 <= n; j0 += 8) {
        int i = 0;
        for (; i + 4 <= m; i += 4) {
            __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
            __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
            __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd();
            __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd();
            const double* a0 = a + static_cast<std::size_t>(i) * k;
            const double* a1 = a0 + k;
            const double* a2 = a1 + k;
            const double* a3 = a2 + k;
            for (int kk = 0; kk < k; ++kk) {
                const double* bk = b + static_cast<std::size_t>(kk) * n + j0;
                const __m256d b0 = _mm256_loadu_pd(bk);
                const __m256d b1 = _mm256_loadu_pd(bk + 4);
                __m256d av;
                av = _mm256_set1_pd(a0[kk]);
                c00 = _mm256_fmadd_pd(av, b0, c00);
                c01 = _mm256_fmadd_pd(av, b1, c01);
                av = _mm256_set1_pd(a1[kk]);
                c10 = _mm256_fmadd_pd(av, b0, c10);
                c11 = _mm256_fmadd_pd(av, b1, c11);
                av = _mm256_set1_pd(a2[kk]);
                c20 = _mm256_fmadd_pd(av, b0, c20);
                c21 = _mm256_fmadd_pd(av, b1, c21);
                av = _mm256_set1_pd(a3[kk]);
                c30 = _mm256_fmadd_pd(av, b0, c30);
                c31 = _mm256_fmadd_pd(av, b1, c31);
            }
            double* ci = c + static_cast<std::size_t>(i) * n + j0;
            if (accumulate) {
                c00 = _mm256_add_pd(_mm256_loadu_pd(ci), c00);
                c01 = _mm256_add_pd(_mm256_loadu_pd(ci + 4), c01);
                c10 = _mm256_add_pd(_mm256_loadu_pd(ci + n), c10);
                c11 = _mm256_add_pd(_mm256_loadu_pd(ci + n + 4), c11);
                c20 = _mm256_add_pd(_mm256_loadu_pd(ci + 2 * n), c20);
                c21 = _mm256_add_pd(_mm256_loadu_pd(ci + 2 * n + 4), c21);
                c30 = _mm256_add_pd(_mm256_loadu_pd(ci + 3 * n), c30);
                c31 = _mm256_add_pd(_mm256_loadu_pd(ci + 3 * n + 4), c31);
            }
            _mm256_storeu_pd(ci, c00);
            _mm256_storeu_pd(ci + 4, c01);
            _mm256_storeu_pd(ci + n, c10);
            _mm256_storeu_pd(ci + n + 4, c11);
            _mm256_storeu_pd(ci + 2 * n, c20);
            _mm256_storeu_pd(ci + 2 * n + 4, c21);
            _mm256_storeu_pd(ci + 3 * n, c30);
            _mm256_storeu_pd(ci + 3 * n + 4, c31);
        }
        for (; i < m; ++i) {
            __m256d c0 = _mm256_setzero_pd(), c1 = _mm256_setzero_pd();
            const double* ai = a + static_cast<std::size_t>(i) * k;
            for (int kk = 0; kk < k; ++kk) {
                const double* bk = b + static_cast<std::size_t>(kk) * n + j0;
                const __m256d av = _mm256_set1_pd(ai[kk]);
                c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bk), c0);
                c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bk + 4), c1);
            }
            double* ci = c + static_cast<std::size_t>(i) * n + j0;
            if (accumulate) {
                c0 = _mm256_add_pd(_mm256_loadu_pd(ci), c0);
                c1 = _mm256_add_pd(_mm256_loadu_pd(ci + 4), c1);
            }
            _mm256_storeu_pd(ci, c0);
            _mm256_storeu_pd(ci + 4, c1);
        }
    }
    // column tail: fma chain per element, same ascending-k order
    for (; j0 < n; ++j0) {
        for (int i = 0; i < m; ++i) {
            const double* ai = a + static_cast<std::size_t>(i) * k;
            double s = 0.0;
            for (int kk = 0; kk < k; ++kk)
                s = std::fma(ai[kk], b[static_cast<std::size_t>(kk) * n + j0], s);
            double* ci = c + static_cast<std::size_t>(i) * n + j0;
            *ci = accumulate ? *ci + s : s;
        }
    }
}

void a2_gemm_tn(int m, int n, int k, const double* a, int lda, const double* b, double* c,
                bool accumulate) {
    if (!accumulate) {
        std::memset(c, 0, sizeof(double) * static_cast<std::size_t>(m) * n);
    }
    for (int l = 0; l < k; ++l) {
        const double* al = a + static_cast<std::size_t>(l) * lda;
        const double* bl = b + static_cast<std::size_t>(l) * n;
        for (int i = 0; i < m; ++i) {
            const __m256d av = _mm256_set1_pd(al[i]);
            double* ci = c + static_cast<std::size_t>(i) * n;
            int j = 0;
            for (; j + 4 <= n; j += 4) {
                _mm256_storeu_pd(ci + j,
                                 _mm256_fmadd_pd(av, _mm256_loadu_pd(bl + j),
                                                 _mm256_loadu_pd(ci + j)));
            }
            for (; j < n; ++j) ci[j] = std::fma(al[i], bl[j], ci[j]);
        }
    }
}

void a2_add(std::int64_t n, const double* a, const double* b, double* c) {
    std::int64_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(c + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) c[i] = a[i] + b[i];
}

void a2_mul(std::int64_t n, const double* a, const double* b, double* c) {
    std::int64_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(c + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) c[i] = a[i] * b[i];
}

// unfused mul+add, matching the scalar reference bitwise
void a2_mul_acc(std::int64_t n, const double* a, const double* b, double* c) {
    std::int64_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(c + i, _mm256_add_pd(_mm256_loadu_pd(c + i),
                                              _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                                            _mm256_loadu_pd(b + i))));
    for (; i < n; ++i) c[i] += a[i] * b[i];
}

void a2_axpy(std::int64_t n, double alpha, const double* x, double* y) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::int64_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i),
                                              _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void a2_scale(std::int64_t n, double alpha, const double* x, double* y) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::int64_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] = alpha * x[i];
}

void a2_relu(std::int64_t n, const double* x, double* y) {
    const __m256d zero = _mm256_setzero_pd();
    std::int64_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void a2_relu_mask_acc(std::int64_t n, const double* out, const double* g, double* dx) {
    const __m256d zero = _mm256_setzero_pd();
    std::int64_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(out + i), zero, _CMP_GT_OQ);
        const __m256d gsel = _mm256_and_pd(mask, _mm256_loadu_pd(g + i));
        _mm256_storeu_pd(dx + i, _mm256_add_pd(_mm256_loadu_pd(dx + i), gsel));
    }
    for (; i < n; ++i) dx[i] += out[i] > 0.0 ? g[i] : 0.0;
}

void a2_bias_row_acc(int m, int n, const double* bias, double* c) {
    for (int i = 0; i < m; ++i) {
        double* ci = c + static_cast<std::size_t>(i) * n;
        int j = 0;
        for (; j + 4 <= n; j += 4)
            _mm256_storeu_pd(ci + j, _mm256_add_pd(_mm256_loadu_pd(ci + j), _mm256_loadu_pd(bias + j)));
        for (; j < n; ++j) ci[j] += bias[j];
    }
}

void a2_col_sum_acc(int m, int n, const double* a, int lda, double* out) {
    for (int i = 0; i < m; ++i) {
        const double* ai = a + static_cast<std::size_t>(i) * lda;
        int j = 0;
        for (; j + 4 <= n; j += 4)
            _mm256_storeu_pd(out + j, _mm256_add_pd(_mm256_loadu_pd(out + j), _mm256_loadu_pd(ai + j)));
        for (; j < n; ++j) out[j] += ai[j];
    }
}

double a2_sum(std::int64_t n, const double* x) {
    __m256d acc = _mm256_setzero_pd();
    std::int64_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double lanes[4];
    _mm256_storeu_pd(lanes, acc);
    double s = ((lanes[0] + lanes[1]) + lanes[2]) + lanes[3];
    for (; i < n; ++i) s += x[i];
    return s;
}

double a2_sq_diff_sum(std::int64_t n, const double* a, const double* b) {
    __m256d acc = _mm256_setzero_pd();
    std::int64_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double lanes[4];
    _mm256_storeu_pd(lanes, acc);
    double s = ((lanes[0] + lanes[1]) + lanes[2]) + lanes[3];
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s = std::fma(d, d, s);
    }
    return s;
}

void a2_adam_update(std::int64_t n, double* p, double* m, double* v, const double* g, double lr,
                    double beta1, double beta2, double eps, double bc1, double bc2) {
    const __m256d vb1 = _mm256_set1_pd(beta1), vc1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d vb2 = _mm256_set1_pd(beta2), vc2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d vlr = _mm256_set1_pd(lr), veps = _mm256_set1_pd(eps);
    const __m256d vbc1 = _mm256_set1_pd(bc1), vbc2 = _mm256_set1_pd(bc2);
    std::int64_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d gi = _mm256_loadu_pd(g + i);
        const __m256d mi = _mm256_fmadd_pd(vb1, _mm256_loadu_pd(m + i), _mm256_mul_pd(vc1, gi));
        const __m256d g2 = _mm256_mul_pd(gi, gi);
        const __m256d vi = _mm256_fmadd_pd(vb2, _mm256_loadu_pd(v + i), _mm256_mul_pd(vc2, g2));
        _mm256_storeu_pd(m + i, mi);
        _mm256_storeu_pd(v + i, vi);
        const __m256d num = _mm256_mul_pd(mi, vbc1);
        const __m256d den = _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vi, vbc2)), veps);
        const __m256d step = _mm256_mul_pd(vlr, _mm256_div_pd(num, den));
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
    }
    const double c1 = 1.0 - beta1, c2 = 1.0 - beta2;
    for (; i < n; ++i) {
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

const KernelTable& avx2_kernels() {
    static const KernelTable t = {
        a2_gemm_nn,  a2_gemm_tn,       a2_add,          a2_mul, a2_mul_acc,     a2_axpy,
        a2_scale,    a2_relu,          a2_relu_mask_acc, a2_bias_row_acc, a2_col_sum_acc, a2_sum,
        a2_sq_diff_sum, a2_adam_update, "avx2",
    };
    return t;
}

}  // namespace hfnerf::kern

#endif  // x86_64
