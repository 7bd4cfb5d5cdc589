#pragma once

#include <cstdint>
#include <string>

#include "rmk/autograd.hpp"
#include "rmk/io.hpp"
#include "rmk/random.hpp"

namespace rmk {

enum class Init { Random, Zero };

/// A convolution's parameters plus the geometry it is applied with.
/// Kernels start uniform in +-1/sqrt(fan_in) (or zero); biases start at zero.
struct ConvLayer {
    Tensor kernel;
    Tensor bias;
    ops::Conv2dGeometry geometry;

    /// "Same"-padded layer with a kh x kw kernel.
    static ConvLayer make(std::int64_t in_channels, std::int64_t out_channels, std::int64_t kh,
                          std::int64_t kw, std::int64_t stride, std::int64_t groups, Init init,
                          Rng& rng, DType dtype);

    std::int64_t in_channels() const { return kernel.dim(1) * geometry.groups; }
    std::int64_t out_channels() const { return kernel.dim(0); }
    /// Kernel weights only; biases are not counted.
    std::int64_t param_count() const { return kernel.numel(); }

    ConvLayer to(DType dtype) const;
    void export_to(io::NamedTensors& out, const std::string& prefix) const;
    void import_from(const io::NamedTensors& in, const std::string& prefix);
};

Var apply(Var x, const ConvLayer& layer);

Tensor apply(const Tensor& x, const ConvLayer& layer);

}  // namespace rmk
