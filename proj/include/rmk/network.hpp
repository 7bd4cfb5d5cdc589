#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rmk/geometry.hpp"
#include "rmk/layers.hpp"
#include "rmk/mdcaa.hpp"
#include "rmk/msk.hpp"

// Stub backbone, MSK tower, MDCAA side outputs, bottom-up path, level fusion
// and a shared detection head.
namespace rmk::net {

struct NetworkConfig {
    std::int64_t image_channels = 3;
    std::int64_t stem_channels = 16;
    std::int64_t backbone_channels = 16;  // C3, C4 and C5
    std::int64_t branch_out = 8;          // M levels carry 5 * branch_out channels
    std::int64_t msk_mid = 0;             // 0: same as the module input
    std::int64_t strip = 11;              // MDCAA strip length
    std::int64_t pool_window = 7;
    std::int64_t head_channels = 16;
    std::int64_t anchors = 1;
    std::int64_t classes = 2;
    double omega = 1.0;
    double anchor_scale = 4.0;  // anchor side in units of the level stride

    std::int64_t tower_channels() const { return 5 * branch_out; }
    /// Channels of fused level 0, 1, 2 (strides 8, 16, 32).
    std::array<std::int64_t, 3> fused_channels() const;
    void validate() const;
};

inline constexpr std::array<std::int64_t, 3> kLevelStrides{8, 16, 32};
inline constexpr std::int64_t kSizeMultiple = 64;

/// Three-level bottom-up path. Level i adds a stride-2 downsample of the
/// previous level (M1 for the first) to M_{i+2} and refines with a 3x3.
struct BottomUpWeights {
    std::array<ConvLayer, 3> down;    // 3x3, stride 2
    std::array<ConvLayer, 3> refine;  // 3x3

    static BottomUpWeights make(std::int64_t channels, Init init, Rng& rng, DType dtype = DType::F32);
    BottomUpWeights to(DType dtype) const;
    void export_to(io::NamedTensors& out, const std::string& prefix) const;
    void import_from(const io::NamedTensors& in, const std::string& prefix);
};

/// Returns the three levels at strides 8, 16, 32; the last is N5.
std::array<Var, 3> bottom_up(std::span<const Var, 4> m, const BottomUpWeights& w);
std::array<Tensor, 3> bottom_up(std::span<const Tensor, 4> m, const BottomUpWeights& w);

struct NetworkWeights {
    NetworkConfig config;
    ConvLayer stem1, stem2;     // 3x3 stride 2 each: C2 at stride 4
    std::array<ConvLayer, 3> stages;  // C3, C4, C5
    std::array<msk::ModuleWeights, 4> msk;
    std::array<mdcaa::Weights, 3> mdcaa;  // CP2, CP3, CP4
    BottomUpWeights bottom_up;
    std::array<ConvLayer, 3> level_fuse;  // 1x1 to head_channels
    ConvLayer cls_head;                   // 3x3 to anchors * classes
    ConvLayer box_head;                   // 3x3 to anchors * 6

    static NetworkWeights make(const NetworkConfig& config, Init init, Rng& rng,
                               DType dtype = DType::F32);
    std::int64_t param_count() const;
    NetworkWeights to(DType dtype) const;
    io::NamedTensors export_all() const;
    void import_all(const io::NamedTensors& in);
};

template <typename T>
struct Pyramid {
    T image;
    T c2;
    std::array<T, 3> c;    // C3, C4, C5
    std::array<T, 4> m;    // M1..M4
    std::array<T, 3> cp;   // CP2, CP3, CP4
    std::array<T, 3> n;    // bottom-up levels; n[2] is N5
    std::array<T, 3> fused;
    std::array<T, 3> logits;  // (N, A*K, s, s)
    std::array<T, 3> boxes;   // (N, A*6, s, s): dcx, dcy, dw, dh, x, y per anchor
};

/// Throws ShapeError unless the image is (N, image_channels, H, W) with H and
/// W divisible by 64.
void check_image(const Tensor& image, const NetworkConfig& config);

Pyramid<Var> assemble(Var image, const NetworkWeights& w);
Pyramid<Tensor> assemble(const Tensor& image, const NetworkWeights& w);

/// Every named intermediate in a fixed order, ready for save_bundle.
io::NamedTensors named_intermediates(const Pyramid<Tensor>& p);

/// Axis-aligned square priors for one level, ordered (row, col, anchor).
std::vector<geom::OrientedBox> level_anchors(std::int64_t rows, std::int64_t cols,
                                             std::int64_t stride, const NetworkConfig& config);

struct DecodeOptions {
    double score_threshold = 0.05;
    double nms_threshold = 0.5;
    std::size_t max_detections = 100;
};

/// Box from one anchor and its six regression outputs. The angle comes from
/// the normalized (x, y) code; a degenerate code keeps the prior angle 0.
geom::OrientedBox decode_box(const geom::OrientedBox& anchor, std::span<const double, 6> regression,
                             double omega);

/// Detections of batch item `item`: sigmoid scores, per-class rotated NMS,
/// best first.
std::vector<geom::OrientedBox> decode_detections(const Pyramid<Tensor>& p, const NetworkConfig& config,
                                                 const DecodeOptions& options, std::int64_t item = 0);

}  // namespace rmk::net
