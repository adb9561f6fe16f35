// AVX-512F kernel variants. Masked loads/stores handle tails so every element
// of an elementwise kernel goes through the same instruction sequence; gemm
// accumulates each output element along ascending k regardless of blocking.

#include "hfnerf/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstring>

namespace hfnerf::kern {

namespace {

inline __mmask8 tail_mask(std::int64_t rem) {
    return static_cast<__mmask8>((1u << rem) - 1u);
}

// 4x16 register-blocked microkernel: 8 zmm accumulators.
void a5_gemm_nn(int m, int n, int k, const double* a, const double* b, double* c,
                bool accumulate) {
    int j0 = 0;
    for (; j0 + 16 <= n; j0 += 16) {
        int i = 0;
        for (; i + 4 <= m; i += 4) {
            __m512d c00 = _mm512_setzero_pd(), c01 = _mm512_setzero_pd();
            __m512d c10 = _mm512_setzero_pd(), c11 = _mm512_setzero_pd();
            __m512d c20 = _mm512_setzero_pd(), c21 = _mm512_setzero_pd();
            __m512d c30 = _mm512_setzero_pd(), c31 = _mm512_setzero_pd();
            const double* a0 = a + static_cast<std::size_t>(i) * k;
            const double* a1 = a0 + k;
            const double* a2 = a1 + k;
            const double* a3 = a2 + k;
            for (int kk = 0; kk < k; ++kk) {
                const double* bk = b + static_cast<std::size_t>(kk) * n + j0;
                const __m512d b0 = _mm512_loadu_pd(bk);
                const __m512d b1 = _mm512_loadu_pd(bk + 8);
                __m512d av;
                av = _mm512_set1_pd(a0[kk]);
                c00 = _mm512_fmadd_pd(av, b0, c00);
                c01 = _mm512_fmadd_pd(av, b1, c01);
                av = _mm512_set1_pd(a1[kk]);
                c10 = _mm512_fmadd_pd(av, b0, c10);
                c11 = _mm512_fmadd_pd(av, b1, c11);
                av = _mm512_set1_pd(a2[kk]);
                c20 = _mm512_fmadd_pd(av, b0, c20);
                c21 = _mm512_fmadd_pd(av, b1, c21);
                av = _mm512_set1_pd(a3[kk]);
                c30 = _mm512_fmadd_pd(av, b0, c30);
                c31 = _mm512_fmadd_pd(av, b1, c31);
            }
            double* ci = c + static_cast<std::size_t>(i) * n + j0;
            if (accumulate) {
                c00 = _mm512_add_pd(_mm512_loadu_pd(ci), c00);
                c01 = _mm512_add_pd(_mm512_loadu_pd(ci + 8), c01);
                c10 = _mm512_add_pd(_mm512_loadu_pd(ci + n), c10);
                c11 = _mm512_add_pd(_mm512_loadu_pd(ci + n + 8), c11);
                c20 = _mm512_add_pd(_mm512_loadu_pd(ci + 2 * n), c20);
                c21 = _mm512_add_pd(_mm512_loadu_pd(ci + 2 * n + 8), c21);
                c30 = _mm512_add_pd(_mm512_loadu_pd(ci + 3 * n), c30);
                c31 = _mm512_add_pd(_mm512_loadu_pd(ci + 3 * n + 8), c31);
            }
            _mm512_storeu_pd(ci, c00);
            _mm512_storeu_pd(ci + 8, c01);
            _mm512_storeu_pd(ci + n, c10);
            _mm512_storeu_pd(ci + n + 8, c11);
            _mm512_storeu_pd(ci + 2 * n, c20);
            _mm512_storeu_pd(ci + 2 * n + 8, c21);
            _mm512_storeu_pd(ci + 3 * n, c30);
            _mm512_storeu_pd(ci + 3 * n + 8, c31);
        }
        for (; i < m; ++i) {
            __m512d c0 = _mm512_setzero_pd(), c1 = _mm512_setzero_pd();
            const double* ai = a + static_cast<std::size_t>(i) * k;
            for (int kk = 0; kk < k; ++kk) {
                const double* bk = b + static_cast<std::size_t>(kk) * n + j0;
                const __m512d av = _mm512_set1_pd(ai[kk]);
                c0 = _mm512_fmadd_pd(av, _mm512_loadu_pd(bk), c0);
                c1 = _mm512_fmadd_pd(av, _mm512_loadu_pd(bk + 8), c1);
            }
            double* ci = c + static_cast<std::size_t>(i) * n + j0;
            if (accumulate) {
                c0 = _mm512_add_pd(_mm512_loadu_pd(ci), c0);
                c1 = _mm512_add_pd(_mm512_loadu_pd(ci + 8), c1);
            }
            _mm512_storeu_pd(ci, c0);
            _mm512_storeu_pd(ci + 8, c1);
        }
    }
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

void a5_gemm_tn(int m, int n, int k, const double* a, int lda, const double* b, double* c,
                bool accumulate) {
    if (!accumulate) {
        std::memset(c, 0, sizeof(double) * static_cast<std::size_t>(m) * n);
    }
    for (int l = 0; l < k; ++l) {
        const double* al = a + static_cast<std::size_t>(l) * lda;
        const double* bl = b + static_cast<std::size_t>(l) * n;
        for (int i = 0; i < m; ++i) {
            const __m512d av = _mm512_set1_pd(al[i]);
            double* ci = c + static_cast<std::size_t>(i) * n;
            int j = 0;
            for (; j + 8 <= n; j += 8) {
                _mm512_storeu_pd(ci + j,
                                 _mm512_fmadd_pd(av, _mm512_loadu_pd(bl + j),
                                                 _mm512_loadu_pd(ci + j)));
            }
            for (; j < n; ++j) ci[j] = std::fma(al[i], bl[j], ci[j]);
        }
    }
}

void a5_add(std::int64_t n, const double* a, const double* b, double* c) {
    std::int64_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm512_storeu_pd(c + i, _mm512_add_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i)));
    if (i < n) {
        const __mmask8 mk = tail_mask(n - i);
        _mm512_mask_storeu_pd(c + i, mk,
                              _mm512_add_pd(_mm512_maskz_loadu_pd(mk, a + i),
                                            _mm512_maskz_loadu_pd(mk, b + i)));
    }
}

void a5_mul(std::int64_t n, const double* a, const double* b, double* c) {
    std::int64_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm512_storeu_pd(c + i, _mm512_mul_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i)));
    if (i < n) {
        const __mmask8 mk = tail_mask(n - i);
        _mm512_mask_storeu_pd(c + i, mk,
                              _mm512_mul_pd(_mm512_maskz_loadu_pd(mk, a + i),
                                            _mm512_maskz_loadu_pd(mk, b + i)));
    }
}

// unfused mul+add, matching the scalar reference bitwise
void a5_mul_acc(std::int64_t n, const double* a, const double* b, double* c) {
    std::int64_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm512_storeu_pd(c + i, _mm512_add_pd(_mm512_loadu_pd(c + i),
                                              _mm512_mul_pd(_mm512_loadu_pd(a + i),
                                                            _mm512_loadu_pd(b + i))));
    if (i < n) {
        const __mmask8 mk = tail_mask(n - i);
        _mm512_mask_storeu_pd(c + i, mk,
                              _mm512_add_pd(_mm512_maskz_loadu_pd(mk, c + i),
                                            _mm512_mul_pd(_mm512_maskz_loadu_pd(mk, a + i),
                                                          _mm512_maskz_loadu_pd(mk, b + i))));
    }
}

void a5_axpy(std::int64_t n, double alpha, const double* x, double* y) {
    const __m512d va = _mm512_set1_pd(alpha);
    std::int64_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm512_storeu_pd(y + i, _mm512_add_pd(_mm512_loadu_pd(y + i),
                                              _mm512_mul_pd(va, _mm512_loadu_pd(x + i))));
    if (i < n) {
        const __mmask8 mk = tail_mask(n - i);
        _mm512_mask_storeu_pd(y + i, mk,
                              _mm512_add_pd(_mm512_maskz_loadu_pd(mk, y + i),
                                            _mm512_mul_pd(va, _mm512_maskz_loadu_pd(mk, x + i))));
    }
}

void a5_scale(std::int64_t n, double alpha, const double* x, double* y) {
    const __m512d va = _mm512_set1_pd(alpha);
    std::int64_t i = 0;
    for (; i + 8 <= n; i += 8) _mm512_storeu_pd(y + i, _mm512_mul_pd(va, _mm512_loadu_pd(x + i)));
    if (i < n) {
        const __mmask8 mk = tail_mask(n - i);
        _mm512_mask_storeu_pd(y + i, mk, _mm512_mul_pd(va, _mm512_maskz_loadu_pd(mk, x + i)));
    }
}

void a5_relu(std::int64_t n, const double* x, double* y) {
    const __m512d zero = _mm512_setzero_pd();
    std::int64_t i = 0;
    for (; i + 8 <= n; i += 8) _mm512_storeu_pd(y + i, _mm512_max_pd(_mm512_loadu_pd(x + i), zero));
    if (i < n) {
        const __mmask8 mk = tail_mask(n - i);
        _mm512_mask_storeu_pd(y + i, mk, _mm512_max_pd(_mm512_maskz_loadu_pd(mk, x + i), zero));
    }
}

void a5_relu_mask_acc(std::int64_t n, const double* out, const double* g, double* dx) {
    const __m512d zero = _mm512_setzero_pd();
    std::int64_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __mmask8 pos = _mm512_cmp_pd_mask(_mm512_loadu_pd(out + i), zero, _CMP_GT_OQ);
        const __m512d gsel = _mm512_maskz_mov_pd(pos, _mm512_loadu_pd(g + i));
        _mm512_storeu_pd(dx + i, _mm512_add_pd(_mm512_loadu_pd(dx + i), gsel));
    }
    for (; i < n; ++i) dx[i] += out[i] > 0.0 ? g[i] : 0.0;
}

void a5_bias_row_acc(int m, int n, const double* bias, double* c) {
    for (int i = 0; i < m; ++i) {
        double* ci = c + static_cast<std::size_t>(i) * n;
        int j = 0;
        for (; j + 8 <= n; j += 8)
            _mm512_storeu_pd(ci + j, _mm512_add_pd(_mm512_loadu_pd(ci + j), _mm512_loadu_pd(bias + j)));
        for (; j < n; ++j) ci[j] += bias[j];
    }
}

void a5_col_sum_acc(int m, int n, const double* a, int lda, double* out) {
    for (int i = 0; i < m; ++i) {
        const double* ai = a + static_cast<std::size_t>(i) * lda;
        int j = 0;
        for (; j + 8 <= n; j += 8)
            _mm512_storeu_pd(out + j, _mm512_add_pd(_mm512_loadu_pd(out + j), _mm512_loadu_pd(ai + j)));
        for (; j < n; ++j) out[j] += ai[j];
    }
}

double a5_sum(std::int64_t n, const double* x) {
    __m512d acc = _mm512_setzero_pd();
    std::int64_t i = 0;
    for (; i + 8 <= n; i += 8) acc = _mm512_add_pd(acc, _mm512_loadu_pd(x + i));
    double s = _mm512_reduce_add_pd(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

double a5_sq_diff_sum(std::int64_t n, const double* a, const double* b) {
    __m512d acc = _mm512_setzero_pd();
    std::int64_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m512d d = _mm512_sub_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i));
        acc = _mm512_fmadd_pd(d, d, acc);
    }
    double s = _mm512_reduce_add_pd(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s = std::fma(d, d, s);
    }
    return s;
}

void a5_adam_update(std::int64_t n, double* p, double* m, double* v, const double* g, double lr,
                    double beta1, double beta2, double eps, double bc1, double bc2) {
    const __m512d vb1 = _mm512_set1_pd(beta1), vc1 = _mm512_set1_pd(1.0 - beta1);
    const __m512d vb2 = _mm512_set1_pd(beta2), vc2 = _mm512_set1_pd(1.0 - beta2);
    const __m512d vlr = _mm512_set1_pd(lr), veps = _mm512_set1_pd(eps);
    const __m512d vbc1 = _mm512_set1_pd(bc1), vbc2 = _mm512_set1_pd(bc2);
    std::int64_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m512d gi = _mm512_loadu_pd(g + i);
        const __m512d mi = _mm512_fmadd_pd(vb1, _mm512_loadu_pd(m + i), _mm512_mul_pd(vc1, gi));
        const __m512d g2 = _mm512_mul_pd(gi, gi);
        const __m512d vi = _mm512_fmadd_pd(vb2, _mm512_loadu_pd(v + i), _mm512_mul_pd(vc2, g2));
        _mm512_storeu_pd(m + i, mi);
        _mm512_storeu_pd(v + i, vi);
        const __m512d num = _mm512_mul_pd(mi, vbc1);
        const __m512d den = _mm512_add_pd(_mm512_sqrt_pd(_mm512_mul_pd(vi, vbc2)), veps);
        const __m512d step = _mm512_mul_pd(vlr, _mm512_div_pd(num, den));
        _mm512_storeu_pd(p + i, _mm512_sub_pd(_mm512_loadu_pd(p + i), step));
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

const KernelTable& avx512_kernels() {
    static const KernelTable t = {
        a5_gemm_nn,  a5_gemm_tn,       a5_add,          a5_mul, a5_mul_acc,     a5_axpy,
        a5_scale,    a5_relu,          a5_relu_mask_acc, a5_bias_row_acc, a5_col_sum_acc, a5_sum,
        a5_sq_diff_sum, a5_adam_update, "avx512",
    };
    return t;
}

}  // namespace hfnerf::kern

#endif  // x86_64
