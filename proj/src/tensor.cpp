#include "rmk/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace rmk {

const char* dtype_name(DType dtype) { return dtype == DType::F32 ? "f32" : "f64"; }

std::string shape_string(const Shape& shape) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ", ";
        os << shape[i];
    }
    os << ')';
    return os.str();
}

std::int64_t shape_numel(const Shape& shape) {
    std::int64_t n = 1;
    for (auto e : shape) n *= e;
    return n;
}

Tensor::Tensor() : shape_{1}, data_(std::vector<float>(1, 0.0f)) {}

void Tensor::init_shape(const Shape& shape, std::int64_t payload) {
    if (shape.empty()) throw ShapeError("tensor needs at least one dimension");
    for (auto e : shape) {
        if (e < 1) throw ShapeError("tensor extents must be >= 1, got " + shape_string(shape));
    }
    if (shape_numel(shape) != payload) {
        throw ShapeError("shape " + shape_string(shape) + " does not match payload of " +
                         std::to_string(payload) + " values");
    }
    shape_ = shape;
}

Tensor Tensor::zeros(const Shape& shape, DType dtype) { return full(shape, 0.0, dtype); }

Tensor Tensor::full(const Shape& shape, double value, DType dtype) {
    const auto n = static_cast<std::size_t>(std::max<std::int64_t>(shape_numel(shape), 0));
    return dispatch(dtype, [&](auto tag) {
        using T = decltype(tag);
        return from_vector<T>(shape, std::vector<T>(n, static_cast<T>(value)));
    });
}

Tensor Tensor::from_values(const Shape& shape, const std::vector<double>& values, DType dtype) {
    return dispatch(dtype, [&](auto tag) {
        using T = decltype(tag);
        return from_vector<T>(shape, std::vector<T>(values.begin(), values.end()));
    });
}

std::int64_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) {
        throw ShapeError("axis " + std::to_string(axis) + " out of range for " +
                         shape_string(shape_));
    }
    return shape_[axis];
}

std::int64_t Tensor::numel() const { return shape_numel(shape_); }

double Tensor::item(std::int64_t i) const {
    return std::visit([i](const auto& v) { return static_cast<double>(v.at(i)); }, data_);
}

void Tensor::set_item(std::int64_t i, double value) {
    std::visit(
        [i, value](auto& v) {
            using T = typename std::decay_t<decltype(v)>::value_type;
            v.at(i) = static_cast<T>(value);
        },
        data_);
}

double Tensor::scalar() const {
    if (numel() != 1) {
        throw ContractError("scalar() on tensor of shape " + shape_string(shape_));
    }
    return item(0);
}

std::int64_t Tensor::offset4(std::int64_t n, std::int64_t c, std::int64_t h,
                             std::int64_t w) const {
    if (shape_.size() != 4) throw ShapeError("4-D access on " + shape_string(shape_));
    return ((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w;
}

double Tensor::at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const {
    return item(offset4(n, c, h, w));
}

void Tensor::set(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w, double value) {
    set_item(offset4(n, c, h, w), value);
}

Tensor Tensor::to(DType target) const {
    if (target == dtype()) return *this;
    return dispatch(target, [&](auto tag) {
        using T = decltype(tag);
        return std::visit(
            [&](const auto& v) { return from_vector<T>(shape_, std::vector<T>(v.begin(), v.end())); },
            data_);
    });
}

Tensor Tensor::reshape(const Shape& shape) const {
    if (shape_numel(shape) != numel()) {
        throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    }
    Tensor t = *this;
    t.init_shape(shape, numel());
    return t;
}

std::vector<double> Tensor::to_doubles() const {
    return std::visit([](const auto& v) { return std::vector<double>(v.begin(), v.end()); },
                      data_);
}

bool Tensor::all_finite() const {
    return std::visit(
        [](const auto& v) {
            return std::all_of(v.begin(), v.end(), [](auto x) { return std::isfinite(x); });
        },
        data_);
}

bool bit_equal(const Tensor& a, const Tensor& b) {
    if (a.dtype() != b.dtype() || a.shape_ != b.shape_) return false;
    return std::visit(
        [&](const auto& va) {
            using V = std::decay_t<decltype(va)>;
            const auto& vb = std::get<V>(b.data_);
            return std::memcmp(va.data(), vb.data(), va.size() * sizeof(typename V::value_type)) ==
                   0;
        },
        a.data_);
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "max_abs_diff");
    double worst = 0.0;
    for (std::int64_t i = 0; i < a.numel(); ++i) {
        worst = std::max(worst, std::abs(a.item(i) - b.item(i)));
    }
    return worst;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
    }
}

void require_same_dtype(const Tensor& a, const Tensor& b, const char* op) {
    if (a.dtype() != b.dtype()) {
        throw ContractError(std::string(op) + ": dtype mismatch " + dtype_name(a.dtype()) +
                            " vs " + dtype_name(b.dtype()));
    }
}

void require_ndim(const Tensor& t, std::size_t ndim, const char* op) {
    if (t.ndim() != ndim) {
        throw ShapeError(std::string(op) + ": expected " + std::to_string(ndim) +
                         "-D input, got " + shape_string(t.shape()));
    }
}

}  // namespace rmk
