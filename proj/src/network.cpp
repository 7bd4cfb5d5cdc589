#include "rmk/network.hpp"

#include <algorithm>
#include <cmath>

#include "rmk/eaem.hpp"

namespace rmk::net {
namespace {

// Largest log-scale size delta honoured at decode; exp(4) ~ 55x the prior.
constexpr double kMaxLogScale = 4.0;

void require_same_extent(const Tensor& a, const Tensor& b, const std::string& what) {
    if (a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3)) {
        throw ShapeError(what + ": spatial extents " + std::to_string(a.dim(2)) + "x" +
                         std::to_string(a.dim(3)) + " and " + std::to_string(b.dim(2)) + "x" +
                         std::to_string(b.dim(3)) + " differ");
    }
}

Var concat_checked(std::vector<Var> parts, const std::string& what) {
    for (std::size_t i = 1; i < parts.size(); ++i) require_same_extent(parts[0].value(), parts[i].value(), what);
    return ag::concat_channels(parts);
}

template <typename T, std::size_t N>
std::array<Tensor, N> values(const std::array<T, N>& vars) {
    std::array<Tensor, N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = vars[i].value();
    return out;
}

}  // namespace

std::array<std::int64_t, 3> NetworkConfig::fused_channels() const {
    const auto b = backbone_channels, t = tower_channels();
    return {b + t, b + t, b + 2 * t};
}

void NetworkConfig::validate() const {
    auto positive = [](std::int64_t v, const char* name) {
        if (v < 1) throw ContractError(std::string("network.") + name + " must be positive");
    };
    positive(image_channels, "image_channels");
    positive(stem_channels, "stem_channels");
    positive(backbone_channels, "backbone_channels");
    positive(branch_out, "branch_out");
    positive(head_channels, "head_channels");
    positive(anchors, "anchors");
    positive(classes, "classes");
    if (msk_mid < 0) throw ContractError("network.msk_mid must be >= 0");
    if (strip < 3 || strip % 2 == 0) throw ContractError("network.strip must be odd and >= 3");
    if (pool_window < 1 || pool_window % 2 == 0) throw ContractError("network.pool_window must be odd");
    eaem::check_omega(omega);
    if (!(anchor_scale > 0.0)) throw ContractError("network.anchor_scale must be positive");
}

BottomUpWeights BottomUpWeights::make(std::int64_t channels, Init init, Rng& rng, DType dtype) {
    BottomUpWeights w;
    for (std::size_t i = 0; i < 3; ++i) {
        w.down[i] = ConvLayer::make(channels, channels, 3, 3, 2, 1, init, rng, dtype);
        w.refine[i] = ConvLayer::make(channels, channels, 3, 3, 1, 1, init, rng, dtype);
    }
    return w;
}

BottomUpWeights BottomUpWeights::to(DType dtype) const {
    BottomUpWeights w;
    for (std::size_t i = 0; i < 3; ++i) {
        w.down[i] = down[i].to(dtype);
        w.refine[i] = refine[i].to(dtype);
    }
    return w;
}

void BottomUpWeights::export_to(io::NamedTensors& out, const std::string& prefix) const {
    for (std::size_t i = 0; i < 3; ++i) {
        down[i].export_to(out, prefix + ".down" + std::to_string(i + 1));
        refine[i].export_to(out, prefix + ".refine" + std::to_string(i + 1));
    }
}

void BottomUpWeights::import_from(const io::NamedTensors& in, const std::string& prefix) {
    for (std::size_t i = 0; i < 3; ++i) {
        down[i].import_from(in, prefix + ".down" + std::to_string(i + 1));
        refine[i].import_from(in, prefix + ".refine" + std::to_string(i + 1));
    }
}

std::array<Var, 3> bottom_up(std::span<const Var, 4> m, const BottomUpWeights& w) {
    std::array<Var, 3> n;
    Var prev = m[0];
    for (std::size_t i = 0; i < 3; ++i) {
        Var down = apply(prev, w.down[i]);
        require_same_extent(down.value(), m[i + 1].value(), "bottom-up level " + std::to_string(i + 1));
        n[i] = apply(ag::add(m[i + 1], down), w.refine[i]);
        prev = n[i];
    }
    return n;
}

std::array<Tensor, 3> bottom_up(std::span<const Tensor, 4> m, const BottomUpWeights& w) {
    Tape tape(false);
    const std::array<Var, 4> vars{tape.constant(m[0]), tape.constant(m[1]), tape.constant(m[2]),
                                  tape.constant(m[3])};
    return values(bottom_up(std::span<const Var, 4>(vars), w));
}

NetworkWeights NetworkWeights::make(const NetworkConfig& config, Init init, Rng& rng, DType dtype) {
    config.validate();
    NetworkWeights w;
    w.config = config;
    const auto s = config.stem_channels, b = config.backbone_channels, t = config.tower_channels();
    w.stem1 = ConvLayer::make(config.image_channels, s, 3, 3, 2, 1, init, rng, dtype);
    w.stem2 = ConvLayer::make(s, s, 3, 3, 2, 1, init, rng, dtype);
    for (std::size_t i = 0; i < 3; ++i) {
        w.stages[i] = ConvLayer::make(i == 0 ? s : b, b, 3, 3, 2, 1, init, rng, dtype);
    }
    const auto configs = msk::block_configs(s, config.branch_out, config.msk_mid);
    for (std::size_t i = 0; i < 4; ++i) w.msk[i] = msk::ModuleWeights::make(configs[i], init, rng, dtype);
    for (auto& a : w.mdcaa) {
        a = mdcaa::Weights::make({t, config.strip, config.pool_window}, init, rng, dtype);
    }
    w.bottom_up = BottomUpWeights::make(t, init, rng, dtype);
    const auto fused = config.fused_channels();
    for (std::size_t i = 0; i < 3; ++i) {
        w.level_fuse[i] = ConvLayer::make(fused[i], config.head_channels, 1, 1, 1, 1, init, rng, dtype);
    }
    w.cls_head = ConvLayer::make(config.head_channels, config.anchors * config.classes, 3, 3, 1, 1,
                                 init, rng, dtype);
    w.box_head = ConvLayer::make(config.head_channels, config.anchors * 6, 3, 3, 1, 1, init, rng, dtype);
    return w;
}

std::int64_t NetworkWeights::param_count() const {
    std::int64_t n = stem1.param_count() + stem2.param_count() + cls_head.param_count() +
                     box_head.param_count();
    for (const auto& l : stages) n += l.param_count();
    for (const auto& m : msk) n += m.param_count();
    for (const auto& a : mdcaa) n += a.param_count();
    for (std::size_t i = 0; i < 3; ++i) {
        n += bottom_up.down[i].param_count() + bottom_up.refine[i].param_count() +
             level_fuse[i].param_count();
    }
    return n;
}

NetworkWeights NetworkWeights::to(DType dtype) const {
    NetworkWeights w = *this;
    w.stem1 = stem1.to(dtype);
    w.stem2 = stem2.to(dtype);
    for (std::size_t i = 0; i < 3; ++i) {
        w.stages[i] = stages[i].to(dtype);
        w.mdcaa[i] = mdcaa[i].to(dtype);
        w.level_fuse[i] = level_fuse[i].to(dtype);
    }
    for (std::size_t i = 0; i < 4; ++i) w.msk[i] = msk[i].to(dtype);
    w.bottom_up = bottom_up.to(dtype);
    w.cls_head = cls_head.to(dtype);
    w.box_head = box_head.to(dtype);
    return w;
}

io::NamedTensors NetworkWeights::export_all() const {
    io::NamedTensors out;
    stem1.export_to(out, "stem1");
    stem2.export_to(out, "stem2");
    for (std::size_t i = 0; i < 3; ++i) stages[i].export_to(out, "stage" + std::to_string(i + 3));
    for (std::size_t i = 0; i < 4; ++i) msk[i].export_to(out, "msk" + std::to_string(i + 1));
    for (std::size_t i = 0; i < 3; ++i) mdcaa[i].export_to(out, "mdcaa" + std::to_string(i + 2));
    bottom_up.export_to(out, "bottom_up");
    for (std::size_t i = 0; i < 3; ++i) level_fuse[i].export_to(out, "fuse" + std::to_string(i + 3));
    cls_head.export_to(out, "head.cls");
    box_head.export_to(out, "head.box");
    return out;
}

void NetworkWeights::import_all(const io::NamedTensors& in) {
    stem1.import_from(in, "stem1");
    stem2.import_from(in, "stem2");
    for (std::size_t i = 0; i < 3; ++i) stages[i].import_from(in, "stage" + std::to_string(i + 3));
    for (std::size_t i = 0; i < 4; ++i) msk[i].import_from(in, "msk" + std::to_string(i + 1));
    for (std::size_t i = 0; i < 3; ++i) mdcaa[i].import_from(in, "mdcaa" + std::to_string(i + 2));
    bottom_up.import_from(in, "bottom_up");
    for (std::size_t i = 0; i < 3; ++i) level_fuse[i].import_from(in, "fuse" + std::to_string(i + 3));
    cls_head.import_from(in, "head.cls");
    box_head.import_from(in, "head.box");
}

void check_image(const Tensor& image, const NetworkConfig& config) {
    require_ndim(image, 4, "network input");
    if (image.dim(1) != config.image_channels) {
        throw ShapeError("network input has " + std::to_string(image.dim(1)) + " channels, expected " +
                         std::to_string(config.image_channels));
    }
    if (image.dim(2) % kSizeMultiple != 0 || image.dim(3) % kSizeMultiple != 0) {
        throw ShapeError("image extent " + std::to_string(image.dim(2)) + "x" +
                         std::to_string(image.dim(3)) + " not divisible by 64");
    }
}

Pyramid<Var> assemble(Var image, const NetworkWeights& w) {
    check_image(image.value(), w.config);
    Pyramid<Var> p;
    p.image = image;
    p.c2 = apply(apply(image, w.stem1), w.stem2);
    Var prev = p.c2;
    for (std::size_t i = 0; i < 3; ++i) {
        p.c[i] = apply(prev, w.stages[i]);
        prev = p.c[i];
    }
    p.m = msk::block_forward(p.c2, w.msk);
    for (std::size_t i = 0; i < 3; ++i) p.cp[i] = mdcaa::apply(p.m[i + 1], w.mdcaa[i]);
    p.n = bottom_up(std::span<const Var, 4>(p.m), w.bottom_up);
    p.fused[0] = concat_checked({p.c[0], p.cp[0]}, "fused level 3");
    p.fused[1] = concat_checked({p.c[1], p.cp[1]}, "fused level 4");
    p.fused[2] = concat_checked({p.c[2], p.cp[2], p.n[2]}, "fused level 5");
    for (std::size_t i = 0; i < 3; ++i) {
        Var h = apply(p.fused[i], w.level_fuse[i]);
        p.logits[i] = apply(h, w.cls_head);
        p.boxes[i] = apply(h, w.box_head);
    }
    return p;
}

Pyramid<Tensor> assemble(const Tensor& image, const NetworkWeights& w) {
    Tape tape(false);
    const Pyramid<Var> v = assemble(tape.constant(image), w);
    Pyramid<Tensor> p;
    p.image = v.image.value();
    p.c2 = v.c2.value();
    p.c = values(v.c);
    p.m = values(v.m);
    p.cp = values(v.cp);
    p.n = values(v.n);
    p.fused = values(v.fused);
    p.logits = values(v.logits);
    p.boxes = values(v.boxes);
    return p;
}

io::NamedTensors named_intermediates(const Pyramid<Tensor>& p) {
    io::NamedTensors out;
    out.add("image", "input", p.image);
    out.add("C2", "backbone", p.c2);
    for (std::size_t i = 0; i < 3; ++i) out.add("C" + std::to_string(i + 3), "backbone", p.c[i]);
    for (std::size_t i = 0; i < 4; ++i) out.add("M" + std::to_string(i + 1), "msk", p.m[i]);
    for (std::size_t i = 0; i < 3; ++i) out.add("CP" + std::to_string(i + 2), "mdcaa", p.cp[i]);
    for (std::size_t i = 0; i < 3; ++i) out.add("N" + std::to_string(i + 3), "bottom_up", p.n[i]);
    for (std::size_t i = 0; i < 3; ++i) out.add("fused" + std::to_string(i + 3), "fused", p.fused[i]);
    for (std::size_t i = 0; i < 3; ++i) out.add("logits" + std::to_string(i + 3), "head", p.logits[i]);
    for (std::size_t i = 0; i < 3; ++i) out.add("boxes" + std::to_string(i + 3), "head", p.boxes[i]);
    return out;
}

std::vector<geom::OrientedBox> level_anchors(std::int64_t rows, std::int64_t cols, std::int64_t stride,
                                             const NetworkConfig& config) {
    std::vector<geom::OrientedBox> anchors;
    anchors.reserve(static_cast<std::size_t>(rows * cols * config.anchors));
    const double s = static_cast<double>(stride);
    for (std::int64_t r = 0; r < rows; ++r) {
        for (std::int64_t c = 0; c < cols; ++c) {
            for (std::int64_t a = 0; a < config.anchors; ++a) {
                // Octave-spaced sizes when several anchors share a cell.
                const double side = config.anchor_scale * s *
                                    std::exp2(static_cast<double>(a) / static_cast<double>(config.anchors));
                anchors.emplace_back((c + 0.5) * s, (r + 0.5) * s, side, side, 0.0);
            }
        }
    }
    return anchors;
}

geom::OrientedBox decode_box(const geom::OrientedBox& anchor, std::span<const double, 6> d,
                             double omega) {
    const double cx = anchor.cx() + d[0] * anchor.w();
    const double cy = anchor.cy() + d[1] * anchor.h();
    const double w = anchor.w() * std::exp(std::clamp(d[2], -kMaxLogScale, kMaxLogScale));
    const double h = anchor.h() * std::exp(std::clamp(d[3], -kMaxLogScale, kMaxLogScale));
    double theta = anchor.theta();
    if (std::hypot(d[4], d[5]) > eaem::kDegenerateNorm) {
        theta = eaem::decode(eaem::normalize(d[4], d[5], omega));
    }
    return {cx, cy, w, h, theta, anchor.class_id(), anchor.score()};
}

std::vector<geom::OrientedBox> decode_detections(const Pyramid<Tensor>& p, const NetworkConfig& config,
                                                 const DecodeOptions& options, std::int64_t item) {
    std::vector<geom::OrientedBox> candidates;
    const auto a_count = config.anchors, k_count = config.classes;
    for (std::size_t lvl = 0; lvl < 3; ++lvl) {
        const Tensor& logits = p.logits[lvl];
        const Tensor& boxes = p.boxes[lvl];
        const auto rows = logits.dim(2), cols = logits.dim(3);
        const auto anchors = level_anchors(rows, cols, kLevelStrides[lvl], config);
        for (std::int64_t r = 0; r < rows; ++r) {
            for (std::int64_t c = 0; c < cols; ++c) {
                for (std::int64_t a = 0; a < a_count; ++a) {
                    const auto& anchor = anchors[static_cast<std::size_t>((r * cols + c) * a_count + a)];
                    std::array<double, 6> d{};
                    bool decoded = false;
                    geom::OrientedBox box = anchor;
                    for (std::int64_t k = 0; k < k_count; ++k) {
                        const double logit = logits.at(item, a * k_count + k, r, c);
                        const double score = 1.0 / (1.0 + std::exp(-logit));
                        if (score < options.score_threshold) continue;
                        if (!decoded) {
                            for (std::int64_t j = 0; j < 6; ++j) d[j] = boxes.at(item, a * 6 + j, r, c);
                            box = decode_box(anchor, d, config.omega);
                            decoded = true;
                        }
                        candidates.push_back(box.with_class(static_cast<int>(k)).with_score(score));
                    }
                }
            }
        }
    }
    auto kept = geom::rotated_nms(candidates, options.nms_threshold, true);
    if (kept.size() > options.max_detections) {
        kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(options.max_detections), kept.end());
    }
    return kept;
}

}  // namespace rmk::net
