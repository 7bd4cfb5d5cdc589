#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "rmk/layers.hpp"

// Multi-scale separable-kernel (MSK) module and the four-module MSK block.
namespace rmk::msk {

/// Strip lengths of the four scale branches, in concat order.
inline constexpr std::array<std::int64_t, 4> kStripSizes{5, 7, 9, 11};

/// One scale branch: 1x1 channel adjust, then a 1 x m and an m x 1 strip.
struct ScaleBranch {
    std::int64_t strip = 0;
    ConvLayer reduce;
    ConvLayer row;
    ConvLayer column;
};

struct ModuleConfig {
    std::int64_t in_channels = 0;
    /// Width inside each branch; 0 means "same as in_channels".
    std::int64_t mid_channels = 0;
    std::int64_t branch_out = 0;
    bool downsample = false;

    std::int64_t mid() const { return mid_channels > 0 ? mid_channels : in_channels; }
    std::int64_t out_channels() const { return 5 * branch_out; }
};

/// Weights of one MSK module. When `downsample` is set, the leading 1x1 of
/// every branch (identity included) runs with stride 2.
struct ModuleWeights {
    ModuleConfig config;
    std::array<ScaleBranch, 4> branches;
    ConvLayer identity_reduce;
    ConvLayer identity_conv;  // 3x3

    static ModuleWeights make(const ModuleConfig& config, Init init, Rng& rng,
                              DType dtype = DType::F32);

    std::int64_t param_count() const;
    ModuleWeights to(DType dtype) const;
    void export_to(io::NamedTensors& out, const std::string& prefix) const;
    void import_from(const io::NamedTensors& in, const std::string& prefix);
};

/// Output is concat[branch5, branch7, branch9, branch11, identity] along
/// channels, 5 * branch_out channels wide.
Var module_forward(Var x, const ModuleWeights& w);
Tensor module_forward(const Tensor& x, const ModuleWeights& w);

/// Per-module configs of a block: module 1 keeps resolution, 2..4 halve it.
std::array<ModuleConfig, 4> block_configs(std::int64_t in_channels, std::int64_t branch_out,
                                          std::int64_t mid_channels = 0);

/// Runs the four modules in sequence and returns [M1, M2, M3, M4].
std::array<Var, 4> block_forward(Var x, std::span<const ModuleWeights> modules);
std::array<Tensor, 4> block_forward(const Tensor& x, std::span<const ModuleWeights> modules);

using Ratio = boost::rational<std::int64_t>;

struct BranchCount {
    std::int64_t strip = 0;
    std::int64_t separable = 0;  // Cin*Cmid*m + Cmid*Cout*m
    std::int64_t full = 0;       // Cin*Cout*m*m
    Ratio ratio;                 // separable / full
};

struct ParamCountReport {
    std::vector<BranchCount> branches;
    /// Whole-module kernel counts (1x1 adjusts and the identity branch
    /// included) with strip pairs, and with full m x m kernels instead.
    std::int64_t separable_total = 0;
    std::int64_t full_total = 0;

    std::int64_t delta() const { return separable_total - full_total; }
};

/// Closed-form kernel-parameter counts (biases excluded).
ParamCountReport count_params(const ModuleConfig& config,
                              std::span<const std::int64_t> strips = kStripSizes);

/// Sums count_params over the four modules of a block.
ParamCountReport count_block_params(std::span<const ModuleConfig> modules);

/// Block used for the documented parameter audit: 64-channel input and
/// 64-wide branches.
std::array<ModuleConfig, 4> reference_block();

}  // namespace rmk::msk
