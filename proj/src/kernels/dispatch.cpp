#include "hfnerf/kernels.hpp"

#include <stdexcept>

namespace hfnerf::kern {

const KernelTable& scalar_kernels();
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_kernels();
const KernelTable& avx512_kernels();
#endif
#if defined(__aarch64__)
const KernelTable& neon_kernels();
#endif

bool available(Backend b) {
    switch (b) {
        case Backend::scalar:
            return true;
#if defined(__x86_64__) || defined(_M_X64)
        case Backend::avx2:
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
        case Backend::avx512:
            return __builtin_cpu_supports("avx512f");
#endif
#if defined(__aarch64__)
        case Backend::neon:
            return true;
#endif
        default:
            return false;
    }
}

Backend detect_best() {
    if (available(Backend::avx512)) return Backend::avx512;
    if (available(Backend::avx2)) return Backend::avx2;
    if (available(Backend::neon)) return Backend::neon;
    return Backend::scalar;
}

std::string backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::avx512: return "avx512";
        case Backend::neon: return "neon";
    }
    return "unknown";
}

const KernelTable& table(Backend b) {
    if (!available(b)) {
        throw std::runtime_error("kernel backend not available on this cpu: " + backend_name(b));
    }
    switch (b) {
#if defined(__x86_64__) || defined(_M_X64)
        case Backend::avx2: return avx2_kernels();
        case Backend::avx512: return avx512_kernels();
#endif
#if defined(__aarch64__)
        case Backend::neon: return neon_kernels();
#endif
        default: return scalar_kernels();
    }
}

namespace {
Backend& active_backend() {
    static Backend b = detect_best();
    return b;
}
const KernelTable*& active_ptr() {
    static const KernelTable* t = &table(active_backend());
    return t;
}
}  // namespace

void select(Backend b) {
    active_ptr() = &table(b);  // throws before mutating state if unavailable
    active_backend() = b;
}

Backend active() { return active_backend(); }

const KernelTable& active_table() { return *active_ptr(); }

// Front ends. Reductions whose combine order would depend on the partition
// (sum, sq_diff_sum) run on one thread; everything else splits into chunks
// that each own a disjoint slice of the output.

void gemm_nn(int m, int n, int k, const double* a, const double* b, double* c, bool accumulate) {
    const KernelTable& t = active_table();
    parallel_for(0, m, [&](std::int64_t i0, std::int64_t i1) {
        t.gemm_nn(static_cast<int>(i1 - i0), n, k, a + i0 * k, b, c + i0 * n, accumulate);
    });
}

void gemm_tn(int m, int n, int k, const double* a, int lda, const double* b, double* c,
             bool accumulate) {
    const KernelTable& t = active_table();
    // split over output rows (columns of a); each chunk reduces the full k range
    parallel_for(0, m, [&](std::int64_t i0, std::int64_t i1) {
        t.gemm_tn(static_cast<int>(i1 - i0), n, k, a + i0, lda, b, c + i0 * n, accumulate);
    });
}

void add(std::int64_t n, const double* a, const double* b, double* c) {
    const KernelTable& t = active_table();
    parallel_for(0, n, [&](std::int64_t i0, std::int64_t i1) {
        t.add(i1 - i0, a + i0, b + i0, c + i0);
    });
}

void mul(std::int64_t n, const double* a, const double* b, double* c) {
    const KernelTable& t = active_table();
    parallel_for(0, n, [&](std::int64_t i0, std::int64_t i1) {
        t.mul(i1 - i0, a + i0, b + i0, c + i0);
    });
}

void mul_acc(std::int64_t n, const double* a, const double* b, double* c) {
    const KernelTable& t = active_table();
    parallel_for(0, n, [&](std::int64_t i0, std::int64_t i1) {
        t.mul_acc(i1 - i0, a + i0, b + i0, c + i0);
    });
}

void axpy(std::int64_t n, double alpha, const double* x, double* y) {
    const KernelTable& t = active_table();
    parallel_for(0, n, [&](std::int64_t i0, std::int64_t i1) {
        t.axpy(i1 - i0, alpha, x + i0, y + i0);
    });
}

void scale(std::int64_t n, double alpha, const double* x, double* y) {
    const KernelTable& t = active_table();
    parallel_for(0, n, [&](std::int64_t i0, std::int64_t i1) {
        t.scale(i1 - i0, alpha, x + i0, y + i0);
    });
}

void relu(std::int64_t n, const double* x, double* y) {
    const KernelTable& t = active_table();
    parallel_for(0, n, [&](std::int64_t i0, std::int64_t i1) {
        t.relu(i1 - i0, x + i0, y + i0);
    });
}

void relu_mask_acc(std::int64_t n, const double* out, const double* g, double* dx) {
    const KernelTable& t = active_table();
    parallel_for(0, n, [&](std::int64_t i0, std::int64_t i1) {
        t.relu_mask_acc(i1 - i0, out + i0, g + i0, dx + i0);
    });
}

void bias_row_acc(int m, int n, const double* bias, double* c) {
    const KernelTable& t = active_table();
    parallel_for(0, m, [&](std::int64_t i0, std::int64_t i1) {
        t.bias_row_acc(static_cast<int>(i1 - i0), n, bias, c + i0 * n);
    });
}

void col_sum_acc(int m, int n, const double* a, int lda, double* out) {
    const KernelTable& t = active_table();
    // split over columns; each chunk owns a slice of out
    parallel_for(0, n, [&](std::int64_t j0, std::int64_t j1) {
        t.col_sum_acc(m, static_cast<int>(j1 - j0), a + j0, lda, out + j0);
    });
}

double sum(std::int64_t n, const double* x) { return active_table().sum(n, x); }

double sq_diff_sum(std::int64_t n, const double* a, const double* b) {
    return active_table().sq_diff_sum(n, a, b);
}

void adam_update(std::int64_t n, double* p, double* m, double* v, const double* g, double lr,
                 double beta1, double beta2, double eps, double bc1, double bc2) {
    const KernelTable& t = active_table();
    parallel_for(0, n, [&](std::int64_t i0, std::int64_t i1) {
        t.adam_update(i1 - i0, p + i0, m + i0, v + i0, g + i0, lr, beta1, beta2, eps, bc1, bc2);
    });
}

}  // namespace hfnerf::kern
