#pragma once

#include <cstdint>
#include <string>

#include "rmk/layers.hpp"

// Multi-directional contextual anchor attention.
namespace rmk::mdcaa {

enum class Diagonal { Main, Anti };

struct Config {
    std::int64_t channels = 0;
    std::int64_t strip = 11;       // odd, >= 3
    std::int64_t pool_window = 7;  // odd; stride 1, "same" padding
};

/// Depthwise strip of `m` taps laid along an image diagonal. Main puts tap i
/// at (i, i), Anti at (i, m - 1 - i).
struct DiagonalStrip {
    Tensor taps;  // (C, m)
    Tensor bias;  // (C)

    /// Depthwise kernel (C, 1, m, m) as seen in the rotated frame of the
    /// given branch, so that rotate -> conv -> unrotate responds along the
    /// branch's own diagonal.
    Tensor rotated_kernel(Diagonal which) const;
    /// The same kernel expressed in the unrotated frame.
    Tensor effective_kernel(Diagonal which) const;
};

struct Weights {
    Config config;
    ConvLayer pointwise;   // 1x1, C -> C, after pooling
    ConvLayer vertical;    // m x 1 depthwise
    ConvLayer horizontal;  // 1 x m depthwise
    DiagonalStrip main_diagonal;
    DiagonalStrip anti_diagonal;
    ConvLayer fusion;  // 1x1, 4C -> C

    static Weights make(const Config& config, Init init, Rng& rng, DType dtype = DType::F32);

    std::int64_t param_count() const;
    Weights to(DType dtype) const;
    void export_to(io::NamedTensors& out, const std::string& prefix) const;
    void import_from(const io::NamedTensors& in, const std::string& prefix);
};

/// Rotate (main: clockwise, anti: counter-clockwise), diagonal depthwise
/// conv, rotate back. Output dims equal input dims.
Var diagonal_branch(Var hv, const Weights& w, Diagonal which);
Tensor diagonal_branch(const Tensor& hv, const Weights& w, Diagonal which);

/// Attention map with the dims of `features`, every value in (0, 1):
/// pool -> pointwise -> {V, H, HV = H(V)} -> concat(main(HV), anti(HV), H, V)
/// -> 1x1 fusion -> sigmoid.
Var attention(Var features, const Weights& w);
Tensor attention(const Tensor& features, const Weights& w);

/// features * attention(features).
Var apply(Var features, const Weights& w);
Tensor apply(const Tensor& features, const Weights& w);

}  // namespace rmk::mdcaa
