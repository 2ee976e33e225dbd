#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hsprobe/numcore/tensor.hpp"

namespace hsprobe {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
// owning tape is alive.
class Var {
public:
    Var() = default;

    const Tensor& value() const;
    std::size_t id() const noexcept { return id_; }
    Tape* tape() const noexcept { return tape_; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

// Records primitive ops in execution order. backward() replays them in exact
// reverse order, accumulating gradients additively into shared inputs.
// A tape is single-owner and must not be shared across threads.
class Tape {
public:
    // Receives the gradient flowing into the op's output and the output value.
    using BackwardFn = std::function<void(Tape&, const Tensor& grad_out, const Tensor& out)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Trainable leaf referencing an external tensor; `t` must outlive the tape.
    Var param(const Tensor& t);
    // Non-differentiable leaf referencing an external tensor.
    Var view(const Tensor& t);
    // Non-differentiable leaf holding its own copy.
    Var constant(Tensor t);

    // Appends an op. Throws kNonFinite if `value` has NaN/Inf.
    Var record(const char* op, Tensor value, std::span<const Var> inputs, BackwardFn backward);

    // `visited`, when given, receives the ids of ops whose backward ran, in
    // the order they ran.
    void backward(Var scalar_output, std::vector<std::size_t>* visited = nullptr);

    const Tensor& value(Var v) const;
    // Gradient of the last backward() output with respect to v; zero-filled
    // when v did not influence the output.
    Tensor grad(Var v) const;

    bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }

    // Used by backward closures: accumulator for input `v`, or nullptr when
    // v needs no gradient.
    Tensor* grad_slot(Var v);

    std::size_t size() const noexcept { return nodes_.size(); }
    // Op names in recording order.
    std::vector<std::string> op_names() const;

private:
    struct Node {
        const char* op = "";
        Tensor owned;
        const Tensor* ref = nullptr;
        std::optional<Tensor> grad;
        bool requires_grad = false;
        BackwardFn backward;
    };

    std::vector<Node> nodes_;
};

// Differentiable primitives. Shapes are rank 2 unless noted; biases are rank 1.
namespace ad {

Var matmul(Var a, Var b);                       // [m,k] x [k,n]
Var add(Var a, Var b);                          // same shape
Var add_bias(Var a, Var bias);                  // [m,n] + [n] broadcast over rows
Var scale(Var a, double s);
Var transpose(Var a);
Var slice_cols(Var a, std::size_t begin, std::size_t width);
Var concat_cols(std::span<const Var> parts);
Var softmax_rows(Var a);
Var mul_const(Var a, const Tensor& mask);       // elementwise by a constant
Var mean_rows(Var a);                           // [m,n] -> [1,n]
Var sigmoid(Var a);
Var bce(Var p, double label);                   // [1,1] -> [1,1], clamped
Var mean_all(std::span<const Var> scalars);     // mean of [1,1] values
Var dot_const(Var a, const Tensor& weights);    // sum(a * weights) -> [1,1]

}  // namespace ad

}  // namespace hsprobe
