#include "hfnerf/ops.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hfnerf/kernels.hpp"

namespace hfnerf::ad {

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                                " vs " + shape_str(b.shape()));
}

void require_rank2(const char* op, const Tensor& t) {
    if (t.rank() != 2) {
        throw std::invalid_argument(std::string(op) + ": expected rank-2 operand, got " +
                                    shape_str(t.shape()));
    }
}

bool wants_grad(const Tensor& t) { return t.requires_grad(); }

// marks the output trainable-reachable and registers everything for grad zeroing
void finish_op(Tensor& out, std::initializer_list<Tensor> inputs, std::function<void()> adjoint) {
    out.set_requires_grad(true);
    for (const auto& t : inputs) note_for_grad(t);
    note_for_grad(out);
    record_op(std::move(adjoint));
}

// elementwise unary op scaffold: fwd(x_i) and dfdx(x_i, y_i) * g accumulation
template <typename F, typename D>
Tensor unary_op(const char* /*name*/, const Tensor& x, F fwd, D dfdx) {
    Tensor out = Tensor::zeros(x.shape());
    const std::int64_t n = x.size();
    const double* xv = x.values().data();
    double* ov = out.values().data();
    for (std::int64_t i = 0; i < n; ++i) ov[i] = fwd(xv[i]);
    if (grad_enabled() && wants_grad(x)) {
        finish_op(out, {x}, [xd = x.data(), od = out.data(), dfdx] {
            const std::int64_t m = static_cast<std::int64_t>(xd->values.size());
            const double* xv2 = xd->values.data();
            const double* yv = od->values.data();
            const double* g = od->grad.data();
            double* gx = xd->grad.data();
            for (std::int64_t i = 0; i < m; ++i) gx[i] += g[i] * dfdx(xv2[i], yv[i]);
        });
    }
    return out;
}

std::vector<double> transposed(const std::vector<double>& a, int rows, int cols) {
    std::vector<double> t(a.size());
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            t[static_cast<std::size_t>(j) * rows + i] = a[static_cast<std::size_t>(i) * cols + j];
    return t;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank2("matmul", a);
    require_rank2("matmul", b);
    if (a.dim(1) != b.dim(0)) shape_error("matmul", a, b);
    const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor out = Tensor::zeros({m, n});
    kern::gemm_nn(m, n, k, a.values().data(), b.values().data(), out.values().data(), false);
    if (grad_enabled() && (wants_grad(a) || wants_grad(b))) {
        finish_op(out, {a, b}, [ad = a.data(), bd = b.data(), od = out.data(), m, k, n] {
            const double* g = od->grad.data();
            if (ad->requires_grad) {
                // dA += G * B^T
                const auto bt = transposed(bd->values, k, n);
                kern::gemm_nn(m, k, n, g, bt.data(), ad->grad.data(), true);
            }
            if (bd->requires_grad) {
                // dB += A^T * G
                kern::gemm_tn(k, n, m, ad->values.data(), k, g, bd->grad.data(), true);
            }
        });
    }
    return out;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias) {
    require_rank2("linear", x);
    require_rank2("linear", w);
    if (x.dim(1) != w.dim(0)) shape_error("linear", x, w);
    if (bias.rank() != 1 || bias.dim(0) != w.dim(1)) shape_error("linear", w, bias);
    const int m = x.dim(0), k = x.dim(1), n = w.dim(1);
    Tensor out = Tensor::zeros({m, n});
    kern::gemm_nn(m, n, k, x.values().data(), w.values().data(), out.values().data(), false);
    kern::bias_row_acc(m, n, bias.values().data(), out.values().data());
    if (grad_enabled() && (wants_grad(x) || wants_grad(w) || wants_grad(bias))) {
        finish_op(out, {x, w, bias},
                  [xd = x.data(), wd = w.data(), bd = bias.data(), od = out.data(), m, k, n] {
                      const double* g = od->grad.data();
                      if (xd->requires_grad) {
                          const auto wt = transposed(wd->values, k, n);
                          kern::gemm_nn(m, k, n, g, wt.data(), xd->grad.data(), true);
                      }
                      if (wd->requires_grad) {
                          kern::gemm_tn(k, n, m, xd->values.data(), k, g, wd->grad.data(), true);
                      }
                      if (bd->requires_grad) {
                          kern::col_sum_acc(m, n, g, n, bd->grad.data());
                      }
                  });
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    const bool bias_like = b.rank() == 1 && a.rank() == 2 && a.dim(1) == b.dim(0);
    if (!bias_like && a.shape() != b.shape()) shape_error("add", a, b);
    Tensor out = Tensor::zeros(a.shape());
    if (bias_like) {
        out.values() = a.values();
        kern::bias_row_acc(a.dim(0), a.dim(1), b.values().data(), out.values().data());
    } else {
        kern::add(a.size(), a.values().data(), b.values().data(), out.values().data());
    }
    if (grad_enabled() && (wants_grad(a) || wants_grad(b))) {
        finish_op(out, {a, b}, [ad = a.data(), bd = b.data(), od = out.data(), bias_like] {
            const std::int64_t n = static_cast<std::int64_t>(od->values.size());
            const double* g = od->grad.data();
            if (ad->requires_grad) kern::axpy(n, 1.0, g, ad->grad.data());
            if (bd->requires_grad) {
                if (bias_like) {
                    const int cols = static_cast<int>(bd->values.size());
                    kern::col_sum_acc(static_cast<int>(n / cols), cols, g, cols, bd->grad.data());
                } else {
                    kern::axpy(n, 1.0, g, bd->grad.data());
                }
            }
        });
    }
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) shape_error("mul", a, b);
    Tensor out = Tensor::zeros(a.shape());
    kern::mul(a.size(), a.values().data(), b.values().data(), out.values().data());
    if (grad_enabled() && (wants_grad(a) || wants_grad(b))) {
        finish_op(out, {a, b}, [ad = a.data(), bd = b.data(), od = out.data()] {
            const std::int64_t n = static_cast<std::int64_t>(od->values.size());
            const double* g = od->grad.data();
            if (ad->requires_grad) kern::mul_acc(n, g, bd->values.data(), ad->grad.data());
            if (bd->requires_grad) kern::mul_acc(n, g, ad->values.data(), bd->grad.data());
        });
    }
    return out;
}

Tensor concat(const Tensor& a, const Tensor& b) {
    if (a.rank() != b.rank() || a.rank() < 1 || a.rank() > 2) shape_error("concat", a, b);
    if (a.rank() == 2 && a.dim(0) != b.dim(0)) shape_error("concat", a, b);
    const int rows = a.rank() == 2 ? a.dim(0) : 1;
    const int ca = a.rank() == 2 ? a.dim(1) : a.dim(0);
    const int cb = b.rank() == 2 ? b.dim(1) : b.dim(0);
    Tensor out = a.rank() == 2 ? Tensor::zeros({rows, ca + cb}) : Tensor::zeros({ca + cb});
    const double* av = a.values().data();
    const double* bv = b.values().data();
    double* ov = out.values().data();
    for (int r = 0; r < rows; ++r) {
        double* orow = ov + static_cast<std::size_t>(r) * (ca + cb);
        std::copy(av + static_cast<std::size_t>(r) * ca, av + static_cast<std::size_t>(r + 1) * ca,
                  orow);
        std::copy(bv + static_cast<std::size_t>(r) * cb, bv + static_cast<std::size_t>(r + 1) * cb,
                  orow + ca);
    }
    if (grad_enabled() && (wants_grad(a) || wants_grad(b))) {
        finish_op(out, {a, b}, [ad = a.data(), bd = b.data(), od = out.data(), rows, ca, cb] {
            const double* g = od->grad.data();
            for (int r = 0; r < rows; ++r) {
                const double* grow = g + static_cast<std::size_t>(r) * (ca + cb);
                if (ad->requires_grad) {
                    double* ga = ad->grad.data() + static_cast<std::size_t>(r) * ca;
                    for (int j = 0; j < ca; ++j) ga[j] += grow[j];
                }
                if (bd->requires_grad) {
                    double* gb = bd->grad.data() + static_cast<std::size_t>(r) * cb;
                    for (int j = 0; j < cb; ++j) gb[j] += grow[ca + j];
                }
            }
        });
    }
    return out;
}

Tensor slice_cols(const Tensor& a, int c0, int c1) {
    if (a.rank() != 2 || c0 < 0 || c1 > a.dim(1) || c0 >= c1) {
        throw std::invalid_argument("slice_cols: columns [" + std::to_string(c0) + ", " +
                                    std::to_string(c1) + ") out of " + shape_str(a.shape()));
    }
    const int rows = a.dim(0), cols = a.dim(1), w = c1 - c0;
    Tensor out = Tensor::zeros({rows, w});
    const double* av = a.values().data();
    double* ov = out.values().data();
    for (int r = 0; r < rows; ++r) {
        const double* arow = av + static_cast<std::size_t>(r) * cols + c0;
        std::copy(arow, arow + w, ov + static_cast<std::size_t>(r) * w);
    }
    if (grad_enabled() && wants_grad(a)) {
        finish_op(out, {a}, [ad = a.data(), od = out.data(), rows, cols, c0, w] {
            const double* g = od->grad.data();
            for (int r = 0; r < rows; ++r) {
                double* ga = ad->grad.data() + static_cast<std::size_t>(r) * cols + c0;
                const double* grow = g + static_cast<std::size_t>(r) * w;
                for (int j = 0; j < w; ++j) ga[j] += grow[j];
            }
        });
    }
    return out;
}

Tensor relu(const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape());
    kern::relu(x.size(), x.values().data(), out.values().data());
    if (grad_enabled() && wants_grad(x)) {
        finish_op(out, {x}, [xd = x.data(), od = out.data()] {
            kern::relu_mask_acc(static_cast<std::int64_t>(od->values.size()), od->values.data(),
                                od->grad.data(), xd->grad.data());
        });
    }
    return out;
}

Tensor sigmoid(const Tensor& x) {
    return unary_op(
        "sigmoid", x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
        [](double, double y) { return y * (1.0 - y); });
}

Tensor softplus(const Tensor& x) {
    // max(x,0) + log1p(e^-|x|) is exact and never overflows
    return unary_op(
        "softplus", x,
        [](double v) { return (v > 0.0 ? v : 0.0) + std::log1p(std::exp(-std::abs(v))); },
        [](double v, double) { return 1.0 / (1.0 + std::exp(-v)); });
}

Tensor sin(const Tensor& x) {
    return unary_op(
        "sin", x, [](double v) { return std::sin(v); },
        [](double v, double) { return std::cos(v); });
}

Tensor cos(const Tensor& x) {
    return unary_op(
        "cos", x, [](double v) { return std::cos(v); },
        [](double v, double) { return -std::sin(v); });
}

Tensor exp(const Tensor& x) {
    return unary_op(
        "exp", x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor neg(const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape());
    kern::scale(x.size(), -1.0, x.values().data(), out.values().data());
    if (grad_enabled() && wants_grad(x)) {
        finish_op(out, {x}, [xd = x.data(), od = out.data()] {
            kern::axpy(static_cast<std::int64_t>(od->values.size()), -1.0, od->grad.data(),
                       xd->grad.data());
        });
    }
    return out;
}

Tensor sum(const Tensor& x) {
    Tensor out = Tensor::scalar(kern::sum(x.size(), x.values().data()));
    if (grad_enabled() && wants_grad(x)) {
        finish_op(out, {x}, [xd = x.data(), od = out.data()] {
            const double g = od->grad[0];
            for (double& gi : xd->grad) gi += g;
        });
    }
    return out;
}

Tensor mean(const Tensor& x) {
    if (x.size() == 0) throw std::invalid_argument("mean: empty tensor");
    const double inv_n = 1.0 / static_cast<double>(x.size());
    Tensor out = Tensor::scalar(kern::sum(x.size(), x.values().data()) * inv_n);
    if (grad_enabled() && wants_grad(x)) {
        finish_op(out, {x}, [xd = x.data(), od = out.data(), inv_n] {
            const double g = od->grad[0] * inv_n;
            for (double& gi : xd->grad) gi += g;
        });
    }
    return out;
}

Tensor squared_error(const Tensor& pred, const Tensor& target) {
    if (pred.shape() != target.shape()) shape_error("squared_error", pred, target);
    if (pred.size() == 0) throw std::invalid_argument("squared_error: empty tensors");
    const double inv_n = 1.0 / static_cast<double>(pred.size());
    Tensor out = Tensor::scalar(
        kern::sq_diff_sum(pred.size(), pred.values().data(), target.values().data()) * inv_n);
    if (grad_enabled() && (wants_grad(pred) || wants_grad(target))) {
        finish_op(out, {pred, target}, [pd = pred.data(), td = target.data(), od = out.data(),
                                        inv_n] {
            const double c = 2.0 * od->grad[0] * inv_n;
            const std::int64_t n = static_cast<std::int64_t>(pd->values.size());
            const double* pv = pd->values.data();
            const double* tv = td->values.data();
            for (std::int64_t i = 0; i < n; ++i) {
                const double d = c * (pv[i] - tv[i]);
                if (pd->requires_grad) pd->grad[i] += d;
                if (td->requires_grad) td->grad[i] -= d;
            }
        });
    }
    return out;
}

Tensor glorot(int fan_in, int fan_out, Rng& rng, bool requires_grad) {
    if (fan_in <= 0 || fan_out <= 0) {
        throw std::invalid_argument("glorot: non-positive dims " + std::to_string(fan_in) + "x" +
                                    std::to_string(fan_out));
    }
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Tensor w = Tensor::zeros({fan_in, fan_out}, requires_grad);
    for (double& v : w.values()) v = rng.uniform(-bound, bound);
    return w;
}

std::vector<Tensor> init_parameters(const std::vector<int>& layer_dims, std::uint64_t seed) {
    if (layer_dims.size() < 2) {
        throw std::invalid_argument("init_parameters: need at least two dims");
    }
    Rng rng(splitmix64(seed));
    std::vector<Tensor> params;
    for (std::size_t i = 0; i + 1 < layer_dims.size(); ++i) {
        params.push_back(glorot(layer_dims[i], layer_dims[i + 1], rng));
        params.push_back(Tensor::zeros({layer_dims[i + 1]}, true));
    }
    return params;
}

}  // namespace hfnerf::ad
