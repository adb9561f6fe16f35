#pragma once

#include <cstdint>
#include <string>

#include "hfnerf/threading.hpp"

namespace hfnerf::kern {

// Numeric inner loops behind the tensor engine. Every kernel has a scalar
// reference implementation plus SIMD variants selected at runtime; all
// variants are equivalence-tested against the scalar one.
//
// Determinism contract: for a given backend, every output element is produced
// by a fixed sequence of IEEE operations that depends only on the operand
// shapes, never on row blocking, tail handling of *other* elements, or the
// configured thread count. Reductions (gemm, sum) reassociate differently
// across backends, so cross-backend comparisons need a tolerance; elementwise
// kernels match the scalar reference bitwise.

enum class Backend {
    scalar,
    avx2,
    avx512,
    neon,
};

struct KernelTable {
    // c (m x n) = or += a (m x k) * b (k x n); all row-major, tightly packed.
    // Per output element the k summation order is fixed and ascending.
    void (*gemm_nn)(int m, int n, int k, const double* a, const double* b, double* c,
                    bool accumulate);
    // c (m x n) += a^T * b with a (k x m, row stride lda) and b (k x n).
    // Used for weight gradients: k is the batch dimension.
    void (*gemm_tn)(int m, int n, int k, const double* a, int lda, const double* b, double* c,
                    bool accumulate);
    void (*add)(std::int64_t n, const double* a, const double* b, double* c);   // c = a + b
    void (*mul)(std::int64_t n, const double* a, const double* b, double* c);   // c = a * b
    void (*mul_acc)(std::int64_t n, const double* a, const double* b, double* c);  // c += a * b
    void (*axpy)(std::int64_t n, double alpha, const double* x, double* y);     // y += alpha * x
    void (*scale)(std::int64_t n, double alpha, const double* x, double* y);    // y = alpha * x
    void (*relu)(std::int64_t n, const double* x, double* y);                   // y = max(x, 0)
    // dx += g where out > 0 (adds a selected value so the vector form matches bitwise)
    void (*relu_mask_acc)(std::int64_t n, const double* out, const double* g, double* dx);
    void (*bias_row_acc)(int m, int n, const double* bias, double* c);          // c[i,:] += bias
    void (*col_sum_acc)(int m, int n, const double* a, int lda, double* out);   // out[j] += sum_i a[i,j]
    double (*sum)(std::int64_t n, const double* x);
    double (*sq_diff_sum)(std::int64_t n, const double* a, const double* b);
    // Adam with precomputed bias-correction factors bc1 = 1/(1-beta1^t), bc2 = 1/(1-beta2^t).
    void (*adam_update)(std::int64_t n, double* p, double* m, double* v, const double* g,
                        double lr, double beta1, double beta2, double eps, double bc1, double bc2);
    const char* name;
};

const KernelTable& table(Backend b);   // throws std::runtime_error if unavailable
bool available(Backend b);
Backend detect_best();                 // best backend this CPU supports
void select(Backend b);                // throws if unavailable
Backend active();                      // defaults to detect_best() on first use
const KernelTable& active_table();
std::string backend_name(Backend b);

// Thread-parallel front ends. These partition the row/element ranges with
// parallel_for and call the active backend per chunk; results are identical
// for any thread count.
void gemm_nn(int m, int n, int k, const double* a, const double* b, double* c, bool accumulate);
void gemm_tn(int m, int n, int k, const double* a, int lda, const double* b, double* c,
             bool accumulate);
void add(std::int64_t n, const double* a, const double* b, double* c);
void mul(std::int64_t n, const double* a, const double* b, double* c);
void mul_acc(std::int64_t n, const double* a, const double* b, double* c);
void axpy(std::int64_t n, double alpha, const double* x, double* y);
void scale(std::int64_t n, double alpha, const double* x, double* y);
void relu(std::int64_t n, const double* x, double* y);
void relu_mask_acc(std::int64_t n, const double* out, const double* g, double* dx);
void bias_row_acc(int m, int n, const double* bias, double* c);
void col_sum_acc(int m, int n, const double* a, int lda, double* out);
double sum(std::int64_t n, const double* x);
double sq_diff_sum(std::int64_t n, const double* a, const double* b);
void adam_update(std::int64_t n, double* p, double* m, double* v, const double* g, double lr,
                 double beta1, double beta2, double eps, double bc1, double bc2);

}  // namespace hfnerf::kern
