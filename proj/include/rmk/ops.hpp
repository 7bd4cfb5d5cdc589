#pragma once

#include <cstdint>
#include <span>

#include "rmk/tensor.hpp"

// Forward kernels and their adjoints on plain tensors. The taped
// (differentiable) wrappers live in autograd.hpp.
namespace rmk::ops {

struct Conv2dGeometry {
    std::int64_t stride_h = 1;
    std::int64_t stride_w = 1;
    std::int64_t pad_h = 0;
    std::int64_t pad_w = 0;
    std::int64_t groups = 1;
};

/// Symmetric "same" padding for an odd kernel: pad = (k - 1) / 2 per axis.
Conv2dGeometry same_padding(std::int64_t kernel_h, std::int64_t kernel_w, std::int64_t stride = 1,
                            std::int64_t groups = 1);

std::int64_t conv_out_extent(std::int64_t in, std::int64_t kernel, std::int64_t stride,
                             std::int64_t pad);

/// Cross-correlation. kernel is (out_c, in_c / groups, kh, kw); bias is (out_c)
/// or nullptr.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Conv2dGeometry& geometry,
              const Tensor* bias = nullptr);
Tensor conv2d_backward_input(const Tensor& grad_out, const Tensor& kernel, const Shape& input_shape,
                             const Conv2dGeometry& geometry);
Tensor conv2d_backward_kernel(const Tensor& grad_out, const Tensor& input, const Shape& kernel_shape,
                              const Conv2dGeometry& geometry);
/// Sum of grad_out over batch and space, per channel.
Tensor conv2d_backward_bias(const Tensor& grad_out);

enum class Rotation { Ccw, Cw };
Rotation inverse(Rotation r);

/// Quarter turn of the two trailing (spatial) axes. Ccw sends input cell
/// (r, c) to output cell (W - 1 - c, r).
Tensor rot90(const Tensor& input, Rotation direction);

struct PoolGeometry {
    std::int64_t window_h = 1;
    std::int64_t window_w = 1;
    std::int64_t stride_h = 1;
    std::int64_t stride_w = 1;
    std::int64_t pad_h = 0;
    std::int64_t pad_w = 0;
};

/// Mean over a zero-padded window; the divisor always counts padded cells.
Tensor avg_pool(const Tensor& input, const PoolGeometry& geometry);
Tensor avg_pool_backward(const Tensor& grad_out, const Shape& input_shape,
                         const PoolGeometry& geometry);

/// Logistic function, saturated to the representable open interval (0, 1).
Tensor sigmoid(const Tensor& input);

Tensor concat_channels(std::span<const Tensor> parts);
Tensor slice_channels(const Tensor& input, std::int64_t begin, std::int64_t count);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// Elementwise product; b may also be a single-element tensor.
Tensor mul(const Tensor& a, const Tensor& b);
/// scale * x + shift.
Tensor affine(const Tensor& x, double scale, double shift = 0.0);
Tensor neg(const Tensor& x);
Tensor square(const Tensor& x);
Tensor sqrt(const Tensor& x);
Tensor rsqrt(const Tensor& x);
Tensor smooth_l1(const Tensor& x, double beta = 1.0);
Tensor smooth_l1_grad(const Tensor& x, double beta = 1.0);
Tensor sum(const Tensor& x);

/// y = W x with W (rows, cols) and x (cols).
Tensor matvec(const Tensor& w, const Tensor& x);

}  // namespace rmk::ops
