#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rmk/ops.hpp"
#include "rmk/tensor.hpp"

namespace rmk {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
/// owning tape is alive.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Tensor& value() const;
};

/// Per-leaf gradients returned by Tape::backward.
class Gradients {
   public:
    const Tensor& operator[](Var leaf) const;
    bool contains(Var leaf) const;

   private:
    friend class Tape;
    std::vector<std::optional<Tensor>> grads_;
};

/// Reverse-mode record of executed ops. Not copyable or movable so that Var
/// handles stay valid.
class Tape {
   public:
    /// Receives the output gradient; returns one gradient per parent (an
    /// entry may be left unset when that parent does not need one).
    using BackwardFn =
        std::function<std::vector<std::optional<Tensor>>(const Tensor& grad_out,
                                                         std::span<const bool> needs)>;

    explicit Tape(bool record_gradients = true) : recording_(record_gradients) {}
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var leaf(Tensor value, bool requires_grad = true);
    Var constant(Tensor value);

    Var record(Tensor value, std::vector<Var> parents, BackwardFn backward);

    const Tensor& value(Var v) const;
    bool requires_grad(Var v) const;
    bool recording() const { return recording_; }
    std::size_t size() const { return nodes_.size(); }

    /// Accumulates d(loss)/d(leaf) for every leaf that requires a gradient.
    /// Leaves the loss does not depend on receive zeros.
    Gradients backward(Var loss) const;

   private:
    struct Node {
        Tensor value;
        std::vector<std::size_t> parents;
        BackwardFn backward;
        bool requires_grad = false;
        bool is_leaf = false;
    };
    void check_owner(Var v) const;

    bool recording_;
    std::deque<Node> nodes_;  // deque keeps value references stable
};

// Differentiable ops. Each mirrors the plain kernel of the same name in
// rmk::ops.
namespace ag {

Var conv2d(Var input, Var kernel, const ops::Conv2dGeometry& geometry,
           std::optional<Var> bias = std::nullopt);
Var rot90(Var input, ops::Rotation direction);
Var avg_pool(Var input, const ops::PoolGeometry& geometry);
Var sigmoid(Var input);
Var concat_channels(std::span<const Var> parts);
Var slice_channels(Var input, std::int64_t begin, std::int64_t count);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var affine(Var x, double scale, double shift = 0.0);
Var square(Var x);
Var sqrt(Var x);
Var rsqrt(Var x);
Var smooth_l1(Var x, double beta = 1.0);
Var sum(Var x);
Var mean(Var x);
Var matvec(Var w, Var x);
Var reshape(Var x, const Shape& shape);

}  // namespace ag

using ScalarFn = std::function<Var(Tape&, Var)>;

struct GradcheckResult {
    double max_relative_error = 0.0;
    std::int64_t worst_index = -1;
    std::int64_t coordinates_checked = 0;
};

/// Compares the taped gradient of fn at `input` with central differences:
/// max over coordinates of |analytic - numeric| / max(1, |analytic|).
/// `max_coordinates` > 0 checks an evenly strided subset.
GradcheckResult gradcheck(const ScalarFn& fn, const Tensor& input, double eps,
                          std::int64_t max_coordinates = 0);

}  // namespace rmk
