#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "rmk/errors.hpp"

namespace rmk {

enum class DType : std::uint8_t { F32 = 0, F64 = 1 };

const char* dtype_name(DType dtype);

template <typename T>
constexpr DType dtype_of() {
    static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
    return std::is_same_v<T, float> ? DType::F32 : DType::F64;
}

// Calls fn(T{}) with T the scalar type behind `dtype`.
template <typename Fn>
decltype(auto) dispatch(DType dtype, Fn&& fn) {
    if (dtype == DType::F32) return fn(float{});
    return fn(double{});
}

using Shape = std::vector<std::int64_t>;

std::string shape_string(const Shape& shape);
std::int64_t shape_numel(const Shape& shape);

/// Dense row-major array of float or double. 4-D data is laid out as
/// (batch, channels, height, width).
class Tensor {
   public:
    Tensor();

    static Tensor zeros(const Shape& shape, DType dtype = DType::F32);
    static Tensor full(const Shape& shape, double value, DType dtype = DType::F32);
    static Tensor from_values(const Shape& shape, const std::vector<double>& values,
                              DType dtype = DType::F32);

    template <typename T>
    static Tensor from_vector(const Shape& shape, std::vector<T> values) {
        Tensor t;
        t.init_shape(shape, static_cast<std::int64_t>(values.size()));
        t.data_ = std::move(values);
        return t;
    }

    const Shape& shape() const { return shape_; }
    std::size_t ndim() const { return shape_.size(); }
    std::int64_t dim(std::size_t axis) const;
    std::int64_t numel() const;
    DType dtype() const { return static_cast<DType>(data_.index()); }

    template <typename T>
    std::span<const T> data() const {
        check_type<T>();
        return std::get<std::vector<T>>(data_);
    }

    template <typename T>
    std::span<T> mutable_data() {
        check_type<T>();
        return std::get<std::vector<T>>(data_);
    }

    double item(std::int64_t flat_index) const;
    void set_item(std::int64_t flat_index, double value);
    /// Reads a single-element tensor.
    double scalar() const;

    // 4-D accessors.
    double at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const;
    void set(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w, double value);

    Tensor to(DType dtype) const;
    Tensor reshape(const Shape& shape) const;
    std::vector<double> to_doubles() const;

    bool all_finite() const;

    /// Bit-exact equality of dtype, shape and payload.
    friend bool bit_equal(const Tensor& a, const Tensor& b);

   private:
    template <typename T>
    void check_type() const {
        if (dtype() != dtype_of<T>()) {
            throw ContractError(std::string("tensor dtype is ") + dtype_name(dtype()) +
                                ", requested " + dtype_name(dtype_of<T>()));
        }
    }
    void init_shape(const Shape& shape, std::int64_t payload);
    std::int64_t offset4(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const;

    Shape shape_;
    std::variant<std::vector<float>, std::vector<double>> data_;
};

double max_abs_diff(const Tensor& a, const Tensor& b);

void require_same_shape(const Tensor& a, const Tensor& b, const char* op);
void require_same_dtype(const Tensor& a, const Tensor& b, const char* op);
void require_ndim(const Tensor& t, std::size_t ndim, const char* op);

}  // namespace rmk
