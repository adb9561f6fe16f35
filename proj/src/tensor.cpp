#include "hfnerf/tensor.hpp"

#include <cstdint>
#include <stdexcept>
#include <unordered_set>

namespace hfnerf::ad {

namespace {

std::int64_t shape_product(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (int d : shape) {
        if (d < 0) throw std::invalid_argument("tensor: negative dimension in " + shape_str(shape));
        n *= d;
    }
    return n;
}

thread_local Tape* g_current_tape = nullptr;

}  // namespace

std::string shape_str(const std::vector<int>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
    auto d = std::make_shared<TensorData>();
    const std::int64_t n = shape_product(shape);
    d->shape = std::move(shape);
    d->values.assign(static_cast<std::size_t>(n), 0.0);
    d->requires_grad = requires_grad;
    return Tensor(std::move(d));
}

Tensor Tensor::from_values(std::vector<int> shape, std::vector<double> values,
                           bool requires_grad) {
    const std::int64_t n = shape_product(shape);
    if (n != static_cast<std::int64_t>(values.size())) {
        throw std::invalid_argument("tensor: " + std::to_string(values.size()) +
                                    " values do not fill shape " + shape_str(shape));
    }
    auto d = std::make_shared<TensorData>();
    d->shape = std::move(shape);
    d->values = std::move(values);
    d->requires_grad = requires_grad;
    return Tensor(std::move(d));
}

Tensor Tensor::scalar(double v, bool requires_grad) {
    return from_values({1}, {v}, requires_grad);
}

void Tape::clear() {
    entries_.clear();
    noted_.clear();
}

void Tape::backward(const Tensor& loss) {
    if (!loss.defined() || loss.size() != 1) {
        throw std::invalid_argument("backward: loss must be a scalar, got shape " +
                                    (loss.defined() ? shape_str(loss.shape()) : "<undefined>"));
    }
    if (entries_.empty()) {
        throw std::logic_error("backward: tape is empty");
    }
    std::unordered_set<TensorData*> seen;
    for (const auto& t : noted_) {
        if (seen.insert(t.get()).second) {
            t->grad.assign(t->values.size(), 0.0);
        }
    }
    TensorData* l = loss.data().get();
    if (l->grad.size() != l->values.size()) l->grad.assign(l->values.size(), 0.0);
    l->grad[0] = 1.0;
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) (*it)();
    clear();
}

Tape* current_tape() { return g_current_tape; }

TapeScope::TapeScope() : prev_(g_current_tape) { g_current_tape = &tape_; }

TapeScope::~TapeScope() { g_current_tape = prev_; }

bool grad_enabled() { return g_current_tape != nullptr; }

void note_for_grad(const Tensor& t) {
    if (g_current_tape && t.requires_grad()) g_current_tape->note(t.data());
}

void record_op(std::function<void()> adjoint) {
    if (g_current_tape) g_current_tape->record(std::move(adjoint));
}

void backward(const Tensor& loss) {
    if (!g_current_tape) throw std::logic_error("backward: no tape in scope");
    g_current_tape->backward(loss);
}

}  // namespace hfnerf::ad
