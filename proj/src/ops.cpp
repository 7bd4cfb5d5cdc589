#include "rmk/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rmk::ops {
namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
    return a >= 0 ? (a + b - 1) / b : -((-a) / b);
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    return a >= 0 ? a / b : -((-a + b - 1) / b);
}

// Range of output indices o with o * stride - pad + k inside [0, extent).
struct Span1 {
    std::int64_t lo;
    std::int64_t hi;  // inclusive
};

Span1 valid_outputs(std::int64_t extent, std::int64_t out_extent, std::int64_t stride,
                    std::int64_t pad, std::int64_t k) {
    return {std::max<std::int64_t>(0, ceil_div(pad - k, stride)),
            std::min<std::int64_t>(out_extent - 1, floor_div(extent - 1 + pad - k, stride))};
}

Tensor checked(Tensor t, const char* op) {
    if (!t.all_finite()) throw NumericError(std::string(op) + ": produced a non-finite value");
    return t;
}

template <typename T, typename Fn>
Tensor map(const Tensor& x, Fn fn) {
    auto in = x.data<T>();
    std::vector<T> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = fn(in[i]);
    return Tensor::from_vector<T>(x.shape(), std::move(out));
}

template <typename Fn>
Tensor unary(const Tensor& x, const char* name, Fn fn) {
    return checked(dispatch(x.dtype(),
                            [&](auto tag) {
                                using T = decltype(tag);
                                return map<T>(x, [&](T v) { return static_cast<T>(fn(v)); });
                            }),
                   name);
}

template <typename Fn>
Tensor binary(const Tensor& a, const Tensor& b, const char* name, Fn fn) {
    require_same_shape(a, b, name);
    require_same_dtype(a, b, name);
    return checked(dispatch(a.dtype(),
                            [&](auto tag) {
                                using T = decltype(tag);
                                auto pa = a.data<T>();
                                auto pb = b.data<T>();
                                std::vector<T> out(pa.size());
                                for (std::size_t i = 0; i < pa.size(); ++i) out[i] = fn(pa[i], pb[i]);
                                return Tensor::from_vector<T>(a.shape(), std::move(out));
                            }),
                   name);
}

struct ConvDims {
    std::int64_t n, c, h, w;
    std::int64_t oc, icg, kh, kw;
    std::int64_t oh, ow;
    std::int64_t ocg;
};

ConvDims conv_dims(const Shape& input, const Shape& kernel, const Conv2dGeometry& g) {
    if (input.size() != 4) throw ShapeError("conv2d: input must be 4-D, got " + shape_string(input));
    if (kernel.size() != 4) {
        throw ShapeError("conv2d: kernel must be 4-D, got " + shape_string(kernel));
    }
    if (g.groups < 1 || g.stride_h < 1 || g.stride_w < 1 || g.pad_h < 0 || g.pad_w < 0) {
        throw ShapeError("conv2d: invalid geometry");
    }
    ConvDims d{};
    d.n = input[0];
    d.c = input[1];
    d.h = input[2];
    d.w = input[3];
    d.oc = kernel[0];
    d.icg = kernel[1];
    d.kh = kernel[2];
    d.kw = kernel[3];
    if (d.c % g.groups != 0 || d.oc % g.groups != 0) {
        throw ShapeError("conv2d: channels " + std::to_string(d.c) + "/" + std::to_string(d.oc) +
                         " not divisible by groups " + std::to_string(g.groups));
    }
    if (d.icg != d.c / g.groups) {
        throw ShapeError("conv2d: kernel " + shape_string(kernel) + " does not match input " +
                         shape_string(input) + " with groups " + std::to_string(g.groups));
    }
    d.oh = conv_out_extent(d.h, d.kh, g.stride_h, g.pad_h);
    d.ow = conv_out_extent(d.w, d.kw, g.stride_w, g.pad_w);
    if (d.oh < 1 || d.ow < 1) {
        throw ShapeError("conv2d: zero-sized output for input " + shape_string(input) +
                         " and kernel " + shape_string(kernel));
    }
    d.ocg = d.oc / g.groups;
    return d;
}

template <typename T>
Tensor conv2d_impl(const Tensor& input, const Tensor& kernel, const Conv2dGeometry& g,
                   const Tensor* bias) {
    const auto d = conv_dims(input.shape(), kernel.shape(), g);
    auto in = input.data<T>();
    auto k = kernel.data<T>();
    std::vector<T> out(static_cast<std::size_t>(d.n * d.oc * d.oh * d.ow), T(0));
    std::span<const T> b;
    if (bias) {
        if (bias->shape() != Shape{d.oc}) {
            throw ShapeError("conv2d: bias " + shape_string(bias->shape()) + " for " +
                             std::to_string(d.oc) + " output channels");
        }
        b = bias->data<T>();
    }
    for (std::int64_t n = 0; n < d.n; ++n) {
        for (std::int64_t oc = 0; oc < d.oc; ++oc) {
            const std::int64_t group = oc / d.ocg;
            T* plane = out.data() + (n * d.oc + oc) * d.oh * d.ow;
            if (bias) std::fill(plane, plane + d.oh * d.ow, b[oc]);
            for (std::int64_t icg = 0; icg < d.icg; ++icg) {
                const std::int64_t ic = group * d.icg + icg;
                const T* src = in.data() + (n * d.c + ic) * d.h * d.w;
                for (std::int64_t kh = 0; kh < d.kh; ++kh) {
                    const auto rows = valid_outputs(d.h, d.oh, g.stride_h, g.pad_h, kh);
                    for (std::int64_t kw = 0; kw < d.kw; ++kw) {
                        const T wv = k[((oc * d.icg + icg) * d.kh + kh) * d.kw + kw];
                        if (wv == T(0)) continue;
                        const auto cols = valid_outputs(d.w, d.ow, g.stride_w, g.pad_w, kw);
                        for (std::int64_t oh = rows.lo; oh <= rows.hi; ++oh) {
                            const T* srow = src + (oh * g.stride_h - g.pad_h + kh) * d.w;
                            T* drow = plane + oh * d.ow;
                            for (std::int64_t ow = cols.lo; ow <= cols.hi; ++ow) {
                                drow[ow] += wv * srow[ow * g.stride_w - g.pad_w + kw];
                            }
                        }
                    }
                }
            }
        }
    }
    return Tensor::from_vector<T>({d.n, d.oc, d.oh, d.ow}, std::move(out));
}

template <typename T>
Tensor conv2d_backward_input_impl(const Tensor& grad_out, const Tensor& kernel,
                                  const Shape& input_shape, const Conv2dGeometry& g) {
    const auto d = conv_dims(input_shape, kernel.shape(), g);
    if (grad_out.shape() != Shape{d.n, d.oc, d.oh, d.ow}) {
        throw ShapeError("conv2d backward: unexpected gradient shape " +
                         shape_string(grad_out.shape()));
    }
    auto go = grad_out.data<T>();
    auto k = kernel.data<T>();
    std::vector<T> gin(static_cast<std::size_t>(d.n * d.c * d.h * d.w), T(0));
    for (std::int64_t n = 0; n < d.n; ++n) {
        for (std::int64_t oc = 0; oc < d.oc; ++oc) {
            const std::int64_t group = oc / d.ocg;
            const T* gplane = go.data() + (n * d.oc + oc) * d.oh * d.ow;
            for (std::int64_t icg = 0; icg < d.icg; ++icg) {
                const std::int64_t ic = group * d.icg + icg;
                T* dst = gin.data() + (n * d.c + ic) * d.h * d.w;
                for (std::int64_t kh = 0; kh < d.kh; ++kh) {
                    const auto rows = valid_outputs(d.h, d.oh, g.stride_h, g.pad_h, kh);
                    for (std::int64_t kw = 0; kw < d.kw; ++kw) {
                        const T wv = k[((oc * d.icg + icg) * d.kh + kh) * d.kw + kw];
                        if (wv == T(0)) continue;
                        const auto cols = valid_outputs(d.w, d.ow, g.stride_w, g.pad_w, kw);
                        for (std::int64_t oh = rows.lo; oh <= rows.hi; ++oh) {
                            T* drow = dst + (oh * g.stride_h - g.pad_h + kh) * d.w;
                            const T* grow = gplane + oh * d.ow;
                            for (std::int64_t ow = cols.lo; ow <= cols.hi; ++ow) {
                                drow[ow * g.stride_w - g.pad_w + kw] += wv * grow[ow];
                            }
                        }
                    }
                }
            }
        }
    }
    return Tensor::from_vector<T>(input_shape, std::move(gin));
}

template <typename T>
Tensor conv2d_backward_kernel_impl(const Tensor& grad_out, const Tensor& input,
                                   const Shape& kernel_shape, const Conv2dGeometry& g) {
    const auto d = conv_dims(input.shape(), kernel_shape, g);
    auto go = grad_out.data<T>();
    auto in = input.data<T>();
    std::vector<T> gk(static_cast<std::size_t>(shape_numel(kernel_shape)), T(0));
    for (std::int64_t oc = 0; oc < d.oc; ++oc) {
        const std::int64_t group = oc / d.ocg;
        for (std::int64_t icg = 0; icg < d.icg; ++icg) {
            const std::int64_t ic = group * d.icg + icg;
            for (std::int64_t kh = 0; kh < d.kh; ++kh) {
                const auto rows = valid_outputs(d.h, d.oh, g.stride_h, g.pad_h, kh);
                for (std::int64_t kw = 0; kw < d.kw; ++kw) {
                    const auto cols = valid_outputs(d.w, d.ow, g.stride_w, g.pad_w, kw);
                    T acc = T(0);
                    for (std::int64_t n = 0; n < d.n; ++n) {
                        const T* gplane = go.data() + (n * d.oc + oc) * d.oh * d.ow;
                        const T* src = in.data() + (n * d.c + ic) * d.h * d.w;
                        for (std::int64_t oh = rows.lo; oh <= rows.hi; ++oh) {
                            const T* srow = src + (oh * g.stride_h - g.pad_h + kh) * d.w;
                            const T* grow = gplane + oh * d.ow;
                            for (std::int64_t ow = cols.lo; ow <= cols.hi; ++ow) {
                                acc += grow[ow] * srow[ow * g.stride_w - g.pad_w + kw];
                            }
                        }
                    }
                    gk[((oc * d.icg + icg) * d.kh + kh) * d.kw + kw] = acc;
                }
            }
        }
    }
    return Tensor::from_vector<T>(kernel_shape, std::move(gk));
}

template <typename T>
Tensor rot90_impl(const Tensor& input, Rotation direction) {
    const auto n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    auto in = input.data<T>();
    std::vector<T> out(in.size());
    // Output has h' = w rows and w' = h columns.
    for (std::int64_t p = 0; p < n * c; ++p) {
        const T* src = in.data() + p * h * w;
        T* dst = out.data() + p * h * w;
        for (std::int64_t r = 0; r < h; ++r) {
            for (std::int64_t col = 0; col < w; ++col) {
                const std::int64_t orow = direction == Rotation::Ccw ? w - 1 - col : col;
                const std::int64_t ocol = direction == Rotation::Ccw ? r : h - 1 - r;
                dst[orow * h + ocol] = src[r * w + col];
            }
        }
    }
    return Tensor::from_vector<T>({n, c, w, h}, std::move(out));
}

struct PoolDims {
    std::int64_t n, c, h, w, oh, ow;
};

PoolDims pool_dims(const Shape& input, const PoolGeometry& g) {
    if (input.size() != 4) throw ShapeError("avg_pool: input must be 4-D, got " + shape_string(input));
    if (g.window_h < 1 || g.window_w < 1 || g.stride_h < 1 || g.stride_w < 1 || g.pad_h < 0 ||
        g.pad_w < 0) {
        throw ShapeError("avg_pool: invalid geometry");
    }
    PoolDims d{input[0], input[1], input[2], input[3], 0, 0};
    d.oh = conv_out_extent(d.h, g.window_h, g.stride_h, g.pad_h);
    d.ow = conv_out_extent(d.w, g.window_w, g.stride_w, g.pad_w);
    if (d.oh < 1 || d.ow < 1) {
        throw ShapeError("avg_pool: zero-sized output for input " + shape_string(input));
    }
    return d;
}

template <typename T>
Tensor avg_pool_impl(const Tensor& input, const PoolGeometry& g) {
    const auto d = pool_dims(input.shape(), g);
    auto in = input.data<T>();
    const T inv = T(1) / static_cast<T>(g.window_h * g.window_w);
    std::vector<T> out(static_cast<std::size_t>(d.n * d.c * d.oh * d.ow));
    for (std::int64_t p = 0; p < d.n * d.c; ++p) {
        const T* src = in.data() + p * d.h * d.w;
        T* dst = out.data() + p * d.oh * d.ow;
        for (std::int64_t oh = 0; oh < d.oh; ++oh) {
            const std::int64_t r0 = oh * g.stride_h - g.pad_h;
            for (std::int64_t ow = 0; ow < d.ow; ++ow) {
                const std::int64_t c0 = ow * g.stride_w - g.pad_w;
                T acc = T(0);
                for (std::int64_t r = std::max<std::int64_t>(r0, 0);
                     r < std::min(r0 + g.window_h, d.h); ++r) {
                    for (std::int64_t col = std::max<std::int64_t>(c0, 0);
                         col < std::min(c0 + g.window_w, d.w); ++col) {
                        acc += src[r * d.w + col];
                    }
                }
                dst[oh * d.ow + ow] = acc * inv;
            }
        }
    }
    return Tensor::from_vector<T>({d.n, d.c, d.oh, d.ow}, std::move(out));
}

template <typename T>
Tensor avg_pool_backward_impl(const Tensor& grad_out, const Shape& input_shape,
                              const PoolGeometry& g) {
    const auto d = pool_dims(input_shape, g);
    auto go = grad_out.data<T>();
    const T inv = T(1) / static_cast<T>(g.window_h * g.window_w);
    std::vector<T> gin(static_cast<std::size_t>(shape_numel(input_shape)), T(0));
    for (std::int64_t p = 0; p < d.n * d.c; ++p) {
        const T* src = go.data() + p * d.oh * d.ow;
        T* dst = gin.data() + p * d.h * d.w;
        for (std::int64_t oh = 0; oh < d.oh; ++oh) {
            const std::int64_t r0 = oh * g.stride_h - g.pad_h;
            for (std::int64_t ow = 0; ow < d.ow; ++ow) {
                const std::int64_t c0 = ow * g.stride_w - g.pad_w;
                const T v = src[oh * d.ow + ow] * inv;
                for (std::int64_t r = std::max<std::int64_t>(r0, 0);
                     r < std::min(r0 + g.window_h, d.h); ++r) {
                    for (std::int64_t col = std::max<std::int64_t>(c0, 0);
                         col < std::min(c0 + g.window_w, d.w); ++col) {
                        dst[r * d.w + col] += v;
                    }
                }
            }
        }
    }
    return Tensor::from_vector<T>(input_shape, std::move(gin));
}

}  // namespace

Conv2dGeometry same_padding(std::int64_t kernel_h, std::int64_t kernel_w, std::int64_t stride,
                            std::int64_t groups) {
    if (kernel_h % 2 == 0 || kernel_w % 2 == 0) {
        throw ShapeError("same padding needs odd kernel extents");
    }
    return {stride, stride, (kernel_h - 1) / 2, (kernel_w - 1) / 2, groups};
}

std::int64_t conv_out_extent(std::int64_t in, std::int64_t kernel, std::int64_t stride,
                             std::int64_t pad) {
    const std::int64_t span = in + 2 * pad - kernel;
    if (span < 0) return 0;
    return span / stride + 1;
}

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Conv2dGeometry& geometry,
              const Tensor* bias) {
    require_same_dtype(input, kernel, "conv2d");
    if (bias) require_same_dtype(input, *bias, "conv2d");
    return checked(dispatch(input.dtype(),
                            [&](auto tag) {
                                return conv2d_impl<decltype(tag)>(input, kernel, geometry, bias);
                            }),
                   "conv2d");
}

Tensor conv2d_backward_input(const Tensor& grad_out, const Tensor& kernel, const Shape& input_shape,
                             const Conv2dGeometry& geometry) {
    require_same_dtype(grad_out, kernel, "conv2d_backward_input");
    return dispatch(grad_out.dtype(), [&](auto tag) {
        return conv2d_backward_input_impl<decltype(tag)>(grad_out, kernel, input_shape, geometry);
    });
}

Tensor conv2d_backward_kernel(const Tensor& grad_out, const Tensor& input, const Shape& kernel_shape,
                              const Conv2dGeometry& geometry) {
    require_same_dtype(grad_out, input, "conv2d_backward_kernel");
    return dispatch(grad_out.dtype(), [&](auto tag) {
        return conv2d_backward_kernel_impl<decltype(tag)>(grad_out, input, kernel_shape, geometry);
    });
}

Tensor conv2d_backward_bias(const Tensor& grad_out) {
    require_ndim(grad_out, 4, "conv2d_backward_bias");
    const auto n = grad_out.dim(0), c = grad_out.dim(1), hw = grad_out.dim(2) * grad_out.dim(3);
    return dispatch(grad_out.dtype(), [&](auto tag) {
        using T = decltype(tag);
        auto go = grad_out.data<T>();
        std::vector<T> gb(static_cast<std::size_t>(c), T(0));
        for (std::int64_t b = 0; b < n; ++b) {
            for (std::int64_t ch = 0; ch < c; ++ch) {
                const T* p = go.data() + (b * c + ch) * hw;
                T acc = T(0);
                for (std::int64_t i = 0; i < hw; ++i) acc += p[i];
                gb[ch] += acc;
            }
        }
        return Tensor::from_vector<T>({c}, std::move(gb));
    });
}

Rotation inverse(Rotation r) { return r == Rotation::Ccw ? Rotation::Cw : Rotation::Ccw; }

Tensor rot90(const Tensor& input, Rotation direction) {
    require_ndim(input, 4, "rot90");
    return dispatch(input.dtype(),
                    [&](auto tag) { return rot90_impl<decltype(tag)>(input, direction); });
}

Tensor avg_pool(const Tensor& input, const PoolGeometry& geometry) {
    return checked(dispatch(input.dtype(),
                            [&](auto tag) { return avg_pool_impl<decltype(tag)>(input, geometry); }),
                   "avg_pool");
}

Tensor avg_pool_backward(const Tensor& grad_out, const Shape& input_shape,
                         const PoolGeometry& geometry) {
    return dispatch(grad_out.dtype(), [&](auto tag) {
        return avg_pool_backward_impl<decltype(tag)>(grad_out, input_shape, geometry);
    });
}

Tensor sigmoid(const Tensor& input) {
    return dispatch(input.dtype(), [&](auto tag) {
        using T = decltype(tag);
        const T lo = std::nextafter(T(0), T(1));
        const T hi = std::nextafter(T(1), T(0));
        return checked(map<T>(input,
                              [&](T v) {
                                  T s;
                                  if (v >= T(0)) {
                                      s = T(1) / (T(1) + std::exp(-v));
                                  } else {
                                      const T e = std::exp(v);
                                      s = e / (T(1) + e);
                                  }
                                  return std::clamp(s, lo, hi);
                              }),
                       "sigmoid");
    });
}

Tensor concat_channels(std::span<const Tensor> parts) {
    if (parts.empty()) throw ShapeError("concat_channels: no parts");
    const Tensor& first = parts.front();
    require_ndim(first, 4, "concat_channels");
    std::int64_t channels = 0;
    for (const auto& p : parts) {
        require_ndim(p, 4, "concat_channels");
        require_same_dtype(first, p, "concat_channels");
        if (p.dim(0) != first.dim(0) || p.dim(2) != first.dim(2) || p.dim(3) != first.dim(3)) {
            throw ShapeError("concat_channels: " + shape_string(p.shape()) + " does not match " +
                             shape_string(first.shape()));
        }
        channels += p.dim(1);
    }
    const auto n = first.dim(0), hw = first.dim(2) * first.dim(3);
    return dispatch(first.dtype(), [&](auto tag) {
        using T = decltype(tag);
        std::vector<T> out;
        out.reserve(static_cast<std::size_t>(n * channels * hw));
        for (std::int64_t b = 0; b < n; ++b) {
            for (const auto& p : parts) {
                auto src = p.data<T>();
                const auto block = p.dim(1) * hw;
                out.insert(out.end(), src.begin() + b * block, src.begin() + (b + 1) * block);
            }
        }
        return Tensor::from_vector<T>({n, channels, first.dim(2), first.dim(3)}, std::move(out));
    });
}

Tensor slice_channels(const Tensor& input, std::int64_t begin, std::int64_t count) {
    require_ndim(input, 4, "slice_channels");
    const auto n = input.dim(0), c = input.dim(1), hw = input.dim(2) * input.dim(3);
    if (begin < 0 || count < 1 || begin + count > c) {
        throw ShapeError("slice_channels: [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") outside " + std::to_string(c) +
                         " channels");
    }
    return dispatch(input.dtype(), [&](auto tag) {
        using T = decltype(tag);
        auto src = input.data<T>();
        std::vector<T> out;
        out.reserve(static_cast<std::size_t>(n * count * hw));
        for (std::int64_t b = 0; b < n; ++b) {
            auto from = src.begin() + (b * c + begin) * hw;
            out.insert(out.end(), from, from + count * hw);
        }
        return Tensor::from_vector<T>({n, count, input.dim(2), input.dim(3)}, std::move(out));
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    return binary(a, b, "add", [](auto x, auto y) { return x + y; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary(a, b, "sub", [](auto x, auto y) { return x - y; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    if (b.numel() == 1 && a.shape() != b.shape()) {
        require_same_dtype(a, b, "mul");
        const double s = b.scalar();
        return unary(a, "mul", [s](auto v) { return v * static_cast<decltype(v)>(s); });
    }
    return binary(a, b, "mul", [](auto x, auto y) { return x * y; });
}

Tensor affine(const Tensor& x, double scale, double shift) {
    return unary(x, "affine", [scale, shift](auto v) {
        using T = decltype(v);
        return static_cast<T>(scale) * v + static_cast<T>(shift);
    });
}

Tensor neg(const Tensor& x) {
    return unary(x, "neg", [](auto v) { return -v; });
}

Tensor square(const Tensor& x) {
    return unary(x, "square", [](auto v) { return v * v; });
}

Tensor sqrt(const Tensor& x) {
    return unary(x, "sqrt", [](auto v) { return std::sqrt(v); });
}

Tensor rsqrt(const Tensor& x) {
    return unary(x, "rsqrt", [](auto v) { return decltype(v)(1) / std::sqrt(v); });
}

Tensor smooth_l1(const Tensor& x, double beta) {
    return unary(x, "smooth_l1", [beta](auto v) {
        using T = decltype(v);
        const T a = std::abs(v);
        const T b = static_cast<T>(beta);
        return a < b ? T(0.5) * a * a / b : a - T(0.5) * b;
    });
}

Tensor smooth_l1_grad(const Tensor& x, double beta) {
    return unary(x, "smooth_l1_grad", [beta](auto v) {
        using T = decltype(v);
        const T b = static_cast<T>(beta);
        if (std::abs(v) < b) return v / b;
        return v > T(0) ? T(1) : T(-1);
    });
}

Tensor sum(const Tensor& x) {
    return dispatch(x.dtype(), [&](auto tag) {
        using T = decltype(tag);
        T acc = T(0);
        for (T v : x.data<T>()) acc += v;
        return checked(Tensor::from_vector<T>({1}, {acc}), "sum");
    });
}

Tensor matvec(const Tensor& w, const Tensor& x) {
    require_ndim(w, 2, "matvec");
    require_ndim(x, 1, "matvec");
    require_same_dtype(w, x, "matvec");
    const auto rows = w.dim(0), cols = w.dim(1);
    if (x.dim(0) != cols) {
        throw ShapeError("matvec: " + shape_string(w.shape()) + " times " + shape_string(x.shape()));
    }
    return checked(dispatch(w.dtype(),
                            [&](auto tag) {
                                using T = decltype(tag);
                                auto pw = w.data<T>();
                                auto px = x.data<T>();
                                std::vector<T> out(static_cast<std::size_t>(rows), T(0));
                                for (std::int64_t r = 0; r < rows; ++r) {
                                    T acc = T(0);
                                    for (std::int64_t c = 0; c < cols; ++c) acc += pw[r * cols + c] * px[c];
                                    out[r] = acc;
                                }
                                return Tensor::from_vector<T>({rows}, std::move(out));
                            }),
                   "matvec");
}

}  // namespace rmk::ops
