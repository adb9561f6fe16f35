// NEON (AArch64) kernel variants, 2-lane f64. Same per-element contract as the
// other backends: elementwise bitwise-identical to scalar, gemm accumulates
// along ascending k.

#include "hfnerf/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>
#include <cstring>

namespace hfnerf::kern {

namespace {

// 4x4 register blocking: 8 accumulators of 2 lanes each.
void ne_gemm_nn(int m, int n, int k, const double* a, const double* b, double* c,
                bool accumulate) {
    int j0 = 0;
    for (; j0 + 4 <= n; j0 += 4) {
        int i = 0;
        for (; i + 4 <= m; i += 4) {
            float64x2_t c00 = vdupq_n_f64(0.0), c01 = vdupq_n_f64(0.0);
            float64x2_t c10 = vdupq_n_f64(0.0), c11 = vdupq_n_f64(0.0);
            float64x2_t c20 = vdupq_n_f64(0.0), c21 = vdupq_n_f64(0.0);
            float64x2_t c30 = vdupq_n_f64(0.0), c31 = vdupq_n_f64(0.0);
            const double* a0 = a + static_cast<std::size_t>(i) * k;
            const double* a1 = a0 + k;
            const double* a2 = a1 + k;
            const double* a3 = a2 + k;
            for (int kk = 0; kk < k; ++kk) {
                const double* bk = b + static_cast<std::size_t>(kk) * n + j0;
                const float64x2_t b0 = vld1q_f64(bk);
                const float64x2_t b1 = vld1q_f64(bk + 2);
                float64x2_t av;
                av = vdupq_n_f64(a0[kk]);
                c00 = vfmaq_f64(c00, av, b0);
                c01 = vfmaq_f64(c01, av, b1);
                av = vdupq_n_f64(a1[kk]);
                c10 = vfmaq_f64(c10, av, b0);
                c11 = vfmaq_f64(c11, av, b1);
                av = vdupq_n_f64(a2[kk]);
                c20 = vfmaq_f64(c20, av, b0);
                c21 = vfmaq_f64(c21, av, b1);
                av = vdupq_n_f64(a3[kk]);
                c30 = vfmaq_f64(c30, av, b0);
                c31 = vfmaq_f64(c31, av, b1);
            }
            double* ci = c + static_cast<std::size_t>(i) * n + j0;
            if (accumulate) {
                c00 = vaddq_f64(vld1q_f64(ci), c00);
                c01 = vaddq_f64(vld1q_f64(ci + 2), c01);
                c10 = vaddq_f64(vld1q_f64(ci + n), c10);
                c11 = vaddq_f64(vld1q_f64(ci + n + 2), c11);
                c20 = vaddq_f64(vld1q_f64(ci + 2 * n), c20);
                c21 = vaddq_f64(vld1q_f64(ci + 2 * n + 2), c21);
                c30 = vaddq_f64(vld1q_f64(ci + 3 * n), c30);
                c31 = vaddq_f64(vld1q_f64(ci + 3 * n + 2), c31);
            }
            vst1q_f64(ci, c00);
            vst1q_f64(ci + 2, c01);
            vst1q_f64(ci + n, c10);
            vst1q_f64(ci + n + 2, c11);
            vst1q_f64(ci + 2 * n, c20);
            vst1q_f64(ci + 2 * n + 2, c21);
            vst1q_f64(ci + 3 * n, c30);
            vst1q_f64(ci + 3 * n + 2, c31);
        }
        for (; i < m; ++i) {
            float64x2_t c0 = vdupq_n_f64(0.0), c1 = vdupq_n_f64(0.0);
            const double* ai = a + static_cast<std::size_t>(i) * k;
            for (int kk = 0; kk < k; ++kk) {
                const double* bk = b + static_cast<std::size_t>(kk) * n + j0;
                const float64x2_t av = vdupq_n_f64(ai[kk]);
                c0 = vfmaq_f64(c0, av, vld1q_f64(bk));
                c1 = vfmaq_f64(c1, av, vld1q_f64(bk + 2));
            }
            double* ci = c + static_cast<std::size_t>(i) * n + j0;
            if (accumulate) {
                c0 = vaddq_f64(vld1q_f64(ci), c0);
                c1 = vaddq_f64(vld1q_f64(ci + 2), c1);
            }
            vst1q_f64(ci, c0);
            vst1q_f64(ci + 2, c1);
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

void ne_gemm_tn(int m, int n, int k, const double* a, int lda, const double* b, double* c,
                bool accumulate) {
    if (!accumulate) {
        std::memset(c, 0, sizeof(double) * static_cast<std::size_t>(m) * n);
    }
    for (int l = 0; l < k; ++l) {
        const double* al = a + static_cast<std::size_t>(l) * lda;
        const double* bl = b + static_cast<std::size_t>(l) * n;
        for (int i = 0; i < m; ++i) {
            const float64x2_t av = vdupq_n_f64(al[i]);
            double* ci = c + static_cast<std::size_t>(i) * n;
            int j = 0;
            for (; j + 2 <= n; j += 2)
                vst1q_f64(ci + j, vfmaq_f64(vld1q_f64(ci + j), av, vld1q_f64(bl + j)));
            for (; j < n; ++j) ci[j] = std::fma(al[i], bl[j], ci[j]);
        }
    }
}

void ne_add(std::int64_t n, const double* a, const double* b, double* c) {
    std::int64_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(c + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i) c[i] = a[i] + b[i];
}

void ne_mul(std::int64_t n, const double* a, const double* b, double* c) {
    std::int64_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(c + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i) c[i] = a[i] * b[i];
}

// unfused mul+add, matching the scalar reference bitwise
void ne_mul_acc(std::int64_t n, const double* a, const double* b, double* c) {
    std::int64_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(c + i, vaddq_f64(vld1q_f64(c + i), vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i))));
    for (; i < n; ++i) c[i] += a[i] * b[i];
}

void ne_axpy(std::int64_t n, double alpha, const double* x, double* y) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::int64_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void ne_scale(std::int64_t n, double alpha, const double* x, double* y) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::int64_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vmulq_f64(va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] = alpha * x[i];
}

void ne_relu(std::int64_t n, const double* x, double* y) {
    const float64x2_t zero = vdupq_n_f64(0.0);
    std::int64_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vmaxq_f64(vld1q_f64(x + i), zero));
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void ne_relu_mask_acc(std::int64_t n, const double* out, const double* g, double* dx) {
    const float64x2_t zero = vdupq_n_f64(0.0);
    std::int64_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const uint64x2_t mask = vcgtq_f64(vld1q_f64(out + i), zero);
        const float64x2_t gsel = vreinterpretq_f64_u64(
            vandq_u64(mask, vreinterpretq_u64_f64(vld1q_f64(g + i))));
        vst1q_f64(dx + i, vaddq_f64(vld1q_f64(dx + i), gsel));
    }
    for (; i < n; ++i) dx[i] += out[i] > 0.0 ? g[i] : 0.0;
}

void ne_bias_row_acc(int m, int n, const double* bias, double* c) {
    for (int i = 0; i < m; ++i) {
        double* ci = c + static_cast<std::size_t>(i) * n;
        int j = 0;
        for (; j + 2 <= n; j += 2)
            vst1q_f64(ci + j, vaddq_f64(vld1q_f64(ci + j), vld1q_f64(bias + j)));
        for (; j < n; ++j) ci[j] += bias[j];
    }
}

void ne_col_sum_acc(int m, int n, const double* a, int lda, double* out) {
    for (int i = 0; i < m; ++i) {
        const double* ai = a + static_cast<std::size_t>(i) * lda;
        int j = 0;
        for (; j + 2 <= n; j += 2)
            vst1q_f64(out + j, vaddq_f64(vld1q_f64(out + j), vld1q_f64(ai + j)));
        for (; j < n; ++j) out[j] += ai[j];
    }
}

double ne_sum(std::int64_t n, const double* x) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::int64_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
    double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < n; ++i) s += x[i];
    return s;
}

double ne_sq_diff_sum(std::int64_t n, const double* a, const double* b) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::int64_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc = vfmaq_f64(acc, d, d);
    }
    double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s = std::fma(d, d, s);
    }
    return s;
}

void ne_adam_update(std::int64_t n, double* p, double* m, double* v, const double* g, double lr,
                    double beta1, double beta2, double eps, double bc1, double bc2) {
    const float64x2_t vb1 = vdupq_n_f64(beta1), vc1d = vdupq_n_f64(1.0 - beta1);
    const float64x2_t vb2 = vdupq_n_f64(beta2), vc2d = vdupq_n_f64(1.0 - beta2);
    const float64x2_t vlr = vdupq_n_f64(lr), veps = vdupq_n_f64(eps);
    const float64x2_t vbc1 = vdupq_n_f64(bc1), vbc2 = vdupq_n_f64(bc2);
    std::int64_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t gi = vld1q_f64(g + i);
        const float64x2_t mi = vfmaq_f64(vmulq_f64(vc1d, gi), vb1, vld1q_f64(m + i));
        const float64x2_t g2 = vmulq_f64(gi, gi);
        const float64x2_t vi = vfmaq_f64(vmulq_f64(vc2d, g2), vb2, vld1q_f64(v + i));
        vst1q_f64(m + i, mi);
        vst1q_f64(v + i, vi);
        const float64x2_t num = vmulq_f64(mi, vbc1);
        const float64x2_t den = vaddq_f64(vsqrtq_f64(vmulq_f64(vi, vbc2)), veps);
        const float64x2_t step = vmulq_f64(vlr, vdivq_f64(num, den));
        vst1q_f64(p + i, vsubq_f64(vld1q_f64(p + i), step));
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

const KernelTable& neon_kernels() {
    static const KernelTable t = {
        ne_gemm_nn,  ne_gemm_tn,       ne_add,          ne_mul, ne_mul_acc,     ne_axpy,
        ne_scale,    ne_relu,          ne_relu_mask_acc, ne_bias_row_acc, ne_col_sum_acc, ne_sum,
        ne_sq_diff_sum, ne_adam_update, "neon",
    };
    return t;
}

}  // namespace hfnerf::kern

#endif  // __aarch64__
