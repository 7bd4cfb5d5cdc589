#include "rmk/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace rmk {

const Tensor& Var::value() const {
    if (!tape) throw ContractError("Var is not bound to a tape");
    return tape->value(*this);
}

const Tensor& Gradients::operator[](Var leaf) const {
    if (!contains(leaf)) {
        throw ContractError("no gradient recorded for node " + std::to_string(leaf.id) +
                            " (not a requires-grad leaf)");
    }
    return *grads_[leaf.id];
}

bool Gradients::contains(Var leaf) const {
    return leaf.id < grads_.size() && grads_[leaf.id].has_value();
}

void Tape::check_owner(Var v) const {
    if (v.tape != this || v.id >= nodes_.size()) {
        throw ContractError("Var does not belong to this tape");
    }
}

Var Tape::leaf(Tensor value, bool requires_grad) {
    Node node;
    node.value = std::move(value);
    node.requires_grad = requires_grad && recording_;
    node.is_leaf = true;
    nodes_.push_back(std::move(node));
    return {this, nodes_.size() - 1};
}

Var Tape::constant(Tensor value) { return leaf(std::move(value), false); }

Var Tape::record(Tensor value, std::vector<Var> parents, BackwardFn backward) {
    Node node;
    node.value = std::move(value);
    for (Var p : parents) {
        check_owner(p);
        node.parents.push_back(p.id);
        node.requires_grad = node.requires_grad || nodes_[p.id].requires_grad;
    }
    if (recording_ && node.requires_grad) node.backward = std::move(backward);
    nodes_.push_back(std::move(node));
    return {this, nodes_.size() - 1};
}

const Tensor& Tape::value(Var v) const {
    check_owner(v);
    return nodes_[v.id].value;
}

bool Tape::requires_grad(Var v) const {
    check_owner(v);
    return nodes_[v.id].requires_grad;
}

Gradients Tape::backward(Var loss) const {
    check_owner(loss);
    const Tensor& loss_value = nodes_[loss.id].value;
    if (loss_value.numel() != 1) {
        throw ContractError("backward: loss must be a single element, got " +
                            shape_string(loss_value.shape()));
    }
    std::vector<std::optional<Tensor>> grads(nodes_.size());
    grads[loss.id] = Tensor::full(loss_value.shape(), 1.0, loss_value.dtype());

    for (std::size_t i = loss.id + 1; i-- > 0;) {
        const Node& node = nodes_[i];
        if (!grads[i] || !node.backward) continue;
        // std::vector<bool> is not contiguous, so spans need a plain array.
        auto needs = std::make_unique<bool[]>(node.parents.size());
        for (std::size_t k = 0; k < node.parents.size(); ++k) {
            needs[k] = nodes_[node.parents[k]].requires_grad;
        }
        auto parent_grads =
            node.backward(*grads[i], std::span<const bool>(needs.get(), node.parents.size()));
        for (std::size_t k = 0; k < node.parents.size(); ++k) {
            if (!needs[k] || k >= parent_grads.size() || !parent_grads[k]) continue;
            auto& slot = grads[node.parents[k]];
            slot = slot ? ops::add(*slot, *parent_grads[k]) : std::move(*parent_grads[k]);
        }
    }

    Gradients result;
    result.grads_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& node = nodes_[i];
        if (!node.is_leaf || !node.requires_grad) continue;
        result.grads_[i] = grads[i] ? std::move(*grads[i])
                                    : Tensor::zeros(node.value.shape(), node.value.dtype());
    }
    return result;
}

namespace ag {
namespace {

using Grads = std::vector<std::optional<Tensor>>;

Tape& tape_of(Var v) {
    if (!v.tape) throw ContractError("Var is not bound to a tape");
    return *v.tape;
}

}  // namespace

Var conv2d(Var input, Var kernel, const ops::Conv2dGeometry& geometry, std::optional<Var> bias) {
    Tape& tape = tape_of(input);
    const Tensor* b = bias ? &bias->value() : nullptr;
    Tensor out = ops::conv2d(input.value(), kernel.value(), geometry, b);
    std::vector<Var> parents{input, kernel};
    if (bias) parents.push_back(*bias);
    return tape.record(std::move(out), parents,
                       [input, kernel, geometry](const Tensor& g, std::span<const bool> needs) {
                           Grads out(needs.size());
                           if (needs[0]) {
                               out[0] = ops::conv2d_backward_input(g, kernel.value(),
                                                                   input.value().shape(), geometry);
                           }
                           if (needs[1]) {
                               out[1] = ops::conv2d_backward_kernel(g, input.value(),
                                                                    kernel.value().shape(), geometry);
                           }
                           if (needs.size() > 2 && needs[2]) out[2] = ops::conv2d_backward_bias(g);
                           return out;
                       });
}

Var rot90(Var input, ops::Rotation direction) {
    return tape_of(input).record(ops::rot90(input.value(), direction), {input},
                                 [direction](const Tensor& g, std::span<const bool>) {
                                     return Grads{ops::rot90(g, ops::inverse(direction))};
                                 });
}

Var avg_pool(Var input, const ops::PoolGeometry& geometry) {
    return tape_of(input).record(ops::avg_pool(input.value(), geometry), {input},
                                 [input, geometry](const Tensor& g, std::span<const bool>) {
                                     return Grads{ops::avg_pool_backward(g, input.value().shape(),
                                                                         geometry)};
                                 });
}

Var sigmoid(Var input) {
    Tensor y = ops::sigmoid(input.value());
    return tape_of(input).record(y, {input}, [y](const Tensor& g, std::span<const bool>) {
        return Grads{ops::mul(g, ops::mul(y, ops::affine(y, -1.0, 1.0)))};
    });
}

Var concat_channels(std::span<const Var> parts) {
    if (parts.empty()) throw ShapeError("concat_channels: no parts");
    std::vector<Tensor> values;
    values.reserve(parts.size());
    for (Var p : parts) values.push_back(p.value());
    std::vector<std::int64_t> widths;
    for (const auto& v : values) widths.push_back(v.ndim() == 4 ? v.dim(1) : 0);
    Tensor out = ops::concat_channels(values);
    return tape_of(parts.front())
        .record(std::move(out), std::vector<Var>(parts.begin(), parts.end()),
                [widths](const Tensor& g, std::span<const bool> needs) {
                    Grads out(needs.size());
                    std::int64_t offset = 0;
                    for (std::size_t k = 0; k < widths.size(); ++k) {
                        if (needs[k]) out[k] = ops::slice_channels(g, offset, widths[k]);
                        offset += widths[k];
                    }
                    return out;
                });
}

Var slice_channels(Var input, std::int64_t begin, std::int64_t count) {
    Tensor out = ops::slice_channels(input.value(), begin, count);
    return tape_of(input).record(
        std::move(out), {input}, [input, begin, count](const Tensor& g, std::span<const bool>) {
            const Tensor& x = input.value();
            std::vector<Tensor> parts;
            if (begin > 0) parts.push_back(Tensor::zeros({x.dim(0), begin, x.dim(2), x.dim(3)}, x.dtype()));
            parts.push_back(g);
            const auto rest = x.dim(1) - begin - count;
            if (rest > 0) parts.push_back(Tensor::zeros({x.dim(0), rest, x.dim(2), x.dim(3)}, x.dtype()));
            return Grads{ops::concat_channels(parts)};
        });
}

Var add(Var a, Var b) {
    return tape_of(a).record(ops::add(a.value(), b.value()), {a, b},
                             [](const Tensor& g, std::span<const bool>) { return Grads{g, g}; });
}

Var sub(Var a, Var b) {
    return tape_of(a).record(ops::sub(a.value(), b.value()), {a, b},
                             [](const Tensor& g, std::span<const bool> needs) {
                                 Grads out(2);
                                 out[0] = g;
                                 if (needs[1]) out[1] = ops::neg(g);
                                 return out;
                             });
}

Var mul(Var a, Var b) {
    return tape_of(a).record(
        ops::mul(a.value(), b.value()), {a, b}, [a, b](const Tensor& g, std::span<const bool> needs) {
            Grads out(2);
            const Tensor& av = a.value();
            const Tensor& bv = b.value();
            if (needs[0]) out[0] = ops::mul(g, bv);
            if (needs[1]) {
                Tensor gb = ops::mul(g, av);
                out[1] = bv.shape() == av.shape() ? gb : ops::sum(gb).reshape(bv.shape());
            }
            return out;
        });
}

Var affine(Var x, double scale, double shift) {
    return tape_of(x).record(ops::affine(x.value(), scale, shift), {x},
                             [scale](const Tensor& g, std::span<const bool>) {
                                 return Grads{ops::affine(g, scale)};
                             });
}

Var square(Var x) {
    return tape_of(x).record(ops::square(x.value()), {x}, [x](const Tensor& g, std::span<const bool>) {
        return Grads{ops::mul(g, ops::affine(x.value(), 2.0))};
    });
}

Var sqrt(Var x) {
    Tensor y = ops::sqrt(x.value());
    return tape_of(x).record(y, {x}, [x](const Tensor& g, std::span<const bool>) {
        return Grads{ops::mul(g, ops::affine(ops::rsqrt(x.value()), 0.5))};
    });
}

Var rsqrt(Var x) {
    Tensor y = ops::rsqrt(x.value());
    return tape_of(x).record(y, {x}, [y](const Tensor& g, std::span<const bool>) {
        // d/dx x^-1/2 = -1/2 x^-3/2 = -1/2 y^3
        Tensor y3 = ops::mul(ops::square(y), y);
        return Grads{ops::mul(g, ops::affine(y3, -0.5))};
    });
}

Var smooth_l1(Var x, double beta) {
    return tape_of(x).record(ops::smooth_l1(x.value(), beta), {x},
                             [x, beta](const Tensor& g, std::span<const bool>) {
                                 return Grads{ops::mul(g, ops::smooth_l1_grad(x.value(), beta))};
                             });
}

Var sum(Var x) {
    return tape_of(x).record(ops::sum(x.value()), {x}, [x](const Tensor& g, std::span<const bool>) {
        const Tensor& xv = x.value();
        return Grads{Tensor::full(xv.shape(), g.scalar(), xv.dtype())};
    });
}

Var mean(Var x) {
    const auto n = static_cast<double>(x.value().numel());
    return affine(sum(x), 1.0 / n);
}

Var matvec(Var w, Var x) {
    return tape_of(w).record(
        ops::matvec(w.value(), x.value()), {w, x},
        [w, x](const Tensor& g, std::span<const bool> needs) {
            const Tensor& wv = w.value();
            const Tensor& xv = x.value();
            const auto rows = wv.dim(0), cols = wv.dim(1);
            Grads out(2);
            if (needs[0]) {
                Tensor gw = Tensor::zeros(wv.shape(), wv.dtype());
                for (std::int64_t r = 0; r < rows; ++r) {
                    for (std::int64_t c = 0; c < cols; ++c) gw.set_item(r * cols + c, g.item(r) * xv.item(c));
                }
                out[0] = std::move(gw);
            }
            if (needs[1]) {
                Tensor gx = Tensor::zeros(xv.shape(), xv.dtype());
                for (std::int64_t c = 0; c < cols; ++c) {
                    double acc = 0.0;
                    for (std::int64_t r = 0; r < rows; ++r) acc += wv.item(r * cols + c) * g.item(r);
                    gx.set_item(c, acc);
                }
                out[1] = std::move(gx);
            }
            return out;
        });
}

Var reshape(Var x, const Shape& shape) {
    return tape_of(x).record(x.value().reshape(shape), {x},
                             [x](const Tensor& g, std::span<const bool>) {
                                 return Grads{g.reshape(x.value().shape())};
                             });
}

}  // namespace ag

GradcheckResult gradcheck(const ScalarFn& fn, const Tensor& input, double eps,
                          std::int64_t max_coordinates) {
    if (!(eps > 0.0)) throw ContractError("gradcheck: eps must be positive");

    Tensor analytic;
    {
        Tape tape;
        Var x = tape.leaf(input);
        Var y = fn(tape, x);
        analytic = tape.backward(y)[x];
    }

    auto evaluate = [&](const Tensor& at) {
        Tape tape(false);
        Var y = fn(tape, tape.constant(at));
        return y.value().scalar();
    };

    const std::int64_t n = input.numel();
    const std::int64_t stride =
        max_coordinates > 0 && max_coordinates < n ? (n + max_coordinates - 1) / max_coordinates : 1;

    GradcheckResult result;
    Tensor probe = input;
    for (std::int64_t i = 0; i < n; i += stride) {
        const double x0 = input.item(i);
        probe.set_item(i, x0 + eps);
        const double hi_x = probe.item(i);
        const double f_hi = evaluate(probe);
        probe.set_item(i, x0 - eps);
        const double lo_x = probe.item(i);
        const double f_lo = evaluate(probe);
        probe.set_item(i, x0);

        const double numeric = (f_hi - f_lo) / (hi_x - lo_x);
        const double a = analytic.item(i);
        const double err = std::abs(a - numeric) / std::max(1.0, std::abs(a));
        if (result.worst_index < 0 || err > result.max_relative_error) {
            result.max_relative_error = err;
            result.worst_index = i;
        }
        ++result.coordinates_checked;
    }
    return result;
}

}  // namespace rmk
