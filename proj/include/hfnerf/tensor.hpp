#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace hfnerf::ad {

// Dense row-major tensor of doubles. Tensor is a cheap shared handle; ops
// capture these handles on the tape so buffers outlive the expressions that
// made them. grad stays unallocated until backward touches the tensor.
struct TensorData {
    std::vector<int> shape;
    std::vector<double> values;
    std::vector<double> grad;
    bool requires_grad = false;
};

class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::shared_ptr<TensorData> d) : d_(std::move(d)) {}

    static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
    static Tensor from_values(std::vector<int> shape, std::vector<double> values,
                              bool requires_grad = false);
    static Tensor scalar(double v, bool requires_grad = false);

    bool defined() const { return d_ != nullptr; }
    const std::vector<int>& shape() const { return d_->shape; }
    std::int64_t size() const { return static_cast<std::int64_t>(d_->values.size()); }
    int rank() const { return static_cast<int>(d_->shape.size()); }
    int dim(int i) const { return d_->shape[static_cast<std::size_t>(i)]; }

    std::vector<double>& values() { return d_->values; }
    const std::vector<double>& values() const { return d_->values; }
    std::vector<double>& grad() { return d_->grad; }
    const std::vector<double>& grad() const { return d_->grad; }

    bool requires_grad() const { return d_->requires_grad; }
    void set_requires_grad(bool b) { d_->requires_grad = b; }

    const std::shared_ptr<TensorData>& data() const { return d_; }

private:
    std::shared_ptr<TensorData> d_;
};

std::string shape_str(const std::vector<int>& shape);

// Define-by-run tape. Ops push adjoint closures while a TapeScope is alive;
// backward replays them in reverse, then clears the record. Thread-local, so
// tape construction is single-threaded by construction and tape-free forward
// evaluation can run concurrently on shared frozen parameters.
class Tape {
public:
    void record(std::function<void()> adjoint) { entries_.push_back(std::move(adjoint)); }
    // registers a tensor whose grad must be zeroed before adjoints run
    void note(const std::shared_ptr<TensorData>& t) { noted_.push_back(t); }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }
    void clear();
    // zero/alloc noted grads, seed d(loss)/d(loss) = 1, replay adjoints in
    // reverse, clear. loss must be scalar.
    void backward(const Tensor& loss);

private:
    std::vector<std::function<void()>> entries_;
    std::vector<std::shared_ptr<TensorData>> noted_;
};

Tape* current_tape();

// Installs a fresh tape for the current thread for its lifetime.
class TapeScope {
public:
    TapeScope();
    ~TapeScope();
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;
    Tape& tape() { return tape_; }

private:
    Tape tape_;
    Tape* prev_;
};

// true when a tape is installed; ops record only in that case
bool grad_enabled();

// Convenience used by op implementations: note + record on the current tape.
void note_for_grad(const Tensor& t);
void record_op(std::function<void()> adjoint);

// Runs backward on the current tape. Errors if no tape, empty tape, or
// non-scalar loss.
void backward(const Tensor& loss);

}  // namespace hfnerf::ad
