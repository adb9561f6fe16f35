#pragma once

#include <cstdint>
#include <vector>

#include "hfnerf/rng.hpp"
#include "hfnerf/tensor.hpp"

namespace hfnerf::ad {

// Differentiable op set. All ops validate shapes up front and report both
// operand shapes on mismatch. When a tape is in scope and any input requires
// grad, the op records its adjoint; otherwise it is a plain forward computation.

Tensor matmul(const Tensor& a, const Tensor& b);  // [m,k] x [k,n] -> [m,n]
// x [m,k] * w [k,n] + bias [n] per row. Fused so the pre-bias activations are
// never materialized; gradient-equivalent to add(matmul(x, w), bias).
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias);
Tensor add(const Tensor& a, const Tensor& b);  // same shape, or b a rank-1 bias over the last axis
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise, same shape
Tensor concat(const Tensor& a, const Tensor& b);  // along the last axis; leading dims equal
// columns [c0, c1) of a rank-2 tensor -> [rows, c1-c0]
Tensor slice_cols(const Tensor& a, int c0, int c1);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor softplus(const Tensor& x);
Tensor sin(const Tensor& x);
Tensor cos(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor neg(const Tensor& x);

Tensor sum(const Tensor& x);   // -> [1]
Tensor mean(const Tensor& x);  // -> [1]
// mean of elementwise squared difference -> [1]
Tensor squared_error(const Tensor& pred, const Tensor& target);

// Uniform Glorot init: w ~ U(+-sqrt(6/(fan_in+fan_out))), shape [fan_in, fan_out].
Tensor glorot(int fan_in, int fan_out, Rng& rng, bool requires_grad = true);

// For dims [d0, d1, ..., dn] returns {w1, b1, ..., wn, bn} with wi [d(i-1), di]
// Glorot-uniform and bi zero, all trainable. Deterministic per seed.
std::vector<Tensor> init_parameters(const std::vector<int>& layer_dims, std::uint64_t seed);

}  // namespace hfnerf::ad
