#include <gtest/gtest.h>

#include "rmk/network.hpp"

#include <cmath>
#include <numbers>
#include "support.hpp"

using namespace rmk;
using testing_support::rand_tensor;

namespace {

void set_dirac(ConvLayer& l) {
    Tensor& k = l.kernel;
    k = Tensor::zeros(k.shape(), k.dtype());
    for (std::int64_t c = 0; c < k.dim(0); ++c) k.set(c, c, k.dim(2) / 2, k.dim(3) / 2, 1.0);
}

std::array<Tensor, 4> tower(std::int64_t c, std::int64_t top, std::uint64_t seed) {
    std::array<Tensor, 4> m;
    for (std::int64_t i = 0; i < 4; ++i) m[i] = rand_tensor({1, c, top >> i, top >> i}, seed + i);
    return m;
}

net::NetworkWeights network(Init init, std::uint64_t seed = 3, DType dtype = DType::F32) {
    Rng rng(seed);
    return net::NetworkWeights::make(net::NetworkConfig{}, init, rng, dtype);
}

}  // namespace

TEST(BottomUp, DiracRecursionMatchesHandOracle) {
    Rng rng(1);
    auto w = net::BottomUpWeights::make(3, Init::Random, rng, DType::F64);
    for (auto& l : w.down) set_dirac(l);
    for (auto& l : w.refine) set_dirac(l);
    const auto m = tower(3, 32, 10);
    const auto n = net::bottom_up(std::span<const Tensor, 4>(m), w);
    Tensor prev = m[0];
    for (std::size_t i = 0; i < 3; ++i) {
        Tensor expect = m[i + 1];
        for (std::int64_t c = 0; c < 3; ++c)
            for (std::int64_t r = 0; r < expect.dim(2); ++r)
                for (std::int64_t q = 0; q < expect.dim(3); ++q)
                    expect.set(0, c, r, q, m[i + 1].at(0, c, r, q) + prev.at(0, c, 2 * r, 2 * q));
        EXPECT_TRUE(bit_equal(n[i], expect)) << "level " << i;
        prev = n[i];
    }
}

TEST(BottomUp, Extents) {
    Rng rng(1);
    const auto w = net::BottomUpWeights::make(2, Init::Random, rng, DType::F64);
    const auto m = tower(2, 64, 20);
    const auto n = net::bottom_up(std::span<const Tensor, 4>(m), w);
    EXPECT_EQ(n[0].dim(2), 32);
    EXPECT_EQ(n[1].dim(2), 16);
    EXPECT_EQ(n[2].dim(2), 8);
}

TEST(BottomUp, ZeroInZeroOut) {
    Rng rng(1);
    const auto w = net::BottomUpWeights::make(2, Init::Zero, rng, DType::F64);
    std::array<Tensor, 4> m;
    for (std::int64_t i = 0; i < 4; ++i) m[i] = Tensor::zeros({1, 2, 16 >> i, 16 >> i}, DType::F64);
    for (const auto& t : net::bottom_up(std::span<const Tensor, 4>(m), w)) {
        for (double v : t.to_doubles()) EXPECT_EQ(v, 0.0);
    }
}

TEST(BottomUp, ExtentMismatch) {
    Rng rng(1);
    const auto w = net::BottomUpWeights::make(2, Init::Random, rng, DType::F64);
    auto m = tower(2, 32, 30);
    m[2] = rand_tensor({1, 2, 6, 6}, 99);
    EXPECT_THROW(net::bottom_up(std::span<const Tensor, 4>(m), w), ShapeError);
}

TEST(Assemble, DocumentedShapesAt256) {
    const auto w = network(Init::Random);
    const net::NetworkConfig cfg;
    const auto p = net::assemble(Tensor::zeros({1, 3, 256, 256}), w);
    const std::int64_t t = cfg.tower_channels(), b = cfg.backbone_channels;
    EXPECT_EQ(p.c2.shape(), (Shape{1, cfg.stem_channels, 64, 64}));
    const std::int64_t cs[] = {32, 16, 8};
    const std::int64_t ms[] = {64, 32, 16, 8};
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(p.c[i].shape(), (Shape{1, b, cs[i], cs[i]}));
        EXPECT_EQ(p.cp[i].shape(), (Shape{1, t, cs[i], cs[i]}));
        EXPECT_EQ(p.n[i].shape(), (Shape{1, t, cs[i], cs[i]}));
        EXPECT_EQ(p.fused[i].shape(), (Shape{1, cfg.fused_channels()[i], cs[i], cs[i]}));
        EXPECT_EQ(p.logits[i].shape(), (Shape{1, 2, cs[i], cs[i]}));
        EXPECT_EQ(p.boxes[i].shape(), (Shape{1, 6, cs[i], cs[i]}));
    }
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(p.m[i].shape(), (Shape{1, t, ms[i], ms[i]}));
    EXPECT_EQ(cfg.fused_channels()[0], b + t);
    EXPECT_EQ(cfg.fused_channels()[2], b + 2 * t);
}

TEST(Assemble, StrideConsistencyAcrossSizes) {
    const auto w = network(Init::Random);
    Rng rng(5);
    for (int trial = 0; trial < 4; ++trial) {
        const std::int64_t h = 64 * rng.uniform_int(1, 4), wd = 64 * rng.uniform_int(1, 4);
        const auto p = net::assemble(rand_tensor({1, 3, h, wd}, 40 + trial, 0, 1, DType::F32), w);
        for (std::size_t i = 0; i < 3; ++i) {
            EXPECT_EQ(p.fused[i].dim(2), h / net::kLevelStrides[i]);
            EXPECT_EQ(p.fused[i].dim(3), wd / net::kLevelStrides[i]);
            EXPECT_EQ(p.cp[i].dim(2), p.c[i].dim(2));
        }
        EXPECT_EQ(p.n[2].dim(3), p.c[2].dim(3));
    }
}

TEST(Assemble, RejectsIndivisibleExtents) {
    const auto w = network(Init::Zero);
    try {
        net::assemble(Tensor::zeros({1, 3, 200, 256}), w);
        FAIL() << "expected ShapeError";
    } catch (const ShapeError& e) {
        EXPECT_NE(std::string(e.what()).find("not divisible by 64"), std::string::npos);
    }
    EXPECT_THROW(net::assemble(Tensor::zeros({1, 1, 64, 64}), w), ShapeError);
}

TEST(Assemble, ZeroWeightsDecodeToPriors) {
    const net::NetworkConfig cfg;
    const auto p = net::assemble(Tensor::zeros({1, 3, 128, 128}), network(Init::Zero));
    for (std::size_t i = 0; i < 3; ++i) {
        for (double v : p.logits[i].to_doubles()) EXPECT_EQ(v, 0.0);
        for (double v : p.boxes[i].to_doubles()) EXPECT_EQ(v, 0.0);
    }
    net::DecodeOptions opts;
    opts.nms_threshold = 1.0;
    opts.max_detections = 100000;
    const auto dets = net::decode_detections(p, cfg, opts);
    std::vector<geom::OrientedBox> priors;
    for (std::size_t i = 0; i < 3; ++i) {
        const auto s = net::kLevelStrides[i];
        const auto a = net::level_anchors(128 / s, 128 / s, s, cfg);
        priors.insert(priors.end(), a.begin(), a.end());
    }
    ASSERT_EQ(dets.size(), priors.size() * 2);
    for (const auto& d : dets) {
        EXPECT_EQ(d.score(), 0.5);
        const bool is_prior = std::any_of(priors.begin(), priors.end(), [&](const auto& a) {
            return a.cx() == d.cx() && a.cy() == d.cy() && a.w() == d.w() && a.h() == d.h() && a.theta() == d.theta();
        });
        EXPECT_TRUE(is_prior);
    }
}

TEST(Decode, AnchorRelativeBox) {
    const geom::OrientedBox anchor(16, 24, 32, 32, 0);
    const std::array<double, 6> d{0.25, -0.5, std::log(2.0), 0.0, 0.0, 1.0};
    const auto b = net::decode_box(anchor, d, 1.0);
    EXPECT_DOUBLE_EQ(b.cx(), 24.0);
    EXPECT_DOUBLE_EQ(b.cy(), 8.0);
    EXPECT_DOUBLE_EQ(b.w(), 64.0);
    EXPECT_DOUBLE_EQ(b.h(), 32.0);
    EXPECT_NEAR(b.theta(), std::numbers::pi / 2, 1e-15);
    // Unnormalized codes are projected first; omega divides the angle.
    const std::array<double, 6> d2{0, 0, 0, 0, 0.0, -3.0};
    EXPECT_NEAR(net::decode_box(anchor, d2, 2.0).theta(), 3 * std::numbers::pi / 4, 1e-15);
}

TEST(Assemble, DeterministicAndPure) {
    const auto w1 = network(Init::Random, 8), w2 = network(Init::Random, 8);
    Tensor img = rand_tensor({1, 3, 64, 128}, 50, 0, 1, DType::F32);
    const auto a = net::named_intermediates(net::assemble(img, w1));
    const auto b = net::named_intermediates(net::assemble(img, w2));
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a.entries()[i].name, b.entries()[i].name);
        EXPECT_TRUE(bit_equal(a.entries()[i].tensor, b.entries()[i].tensor));
    }
}

TEST(Assemble, WeightsExportImportRoundTrip) {
    const auto w = network(Init::Random, 11);
    auto other = network(Init::Zero, 12);
    other.import_all(w.export_all());
    Tensor img = rand_tensor({1, 3, 64, 64}, 51, 0, 1, DType::F32);
    EXPECT_TRUE(bit_equal(net::assemble(img, w).boxes[0], net::assemble(img, other).boxes[0]));
}

TEST(Assemble, EndToEndGradcheckOnSubset) {
    // The acceptance run covers 1024 coordinates; a thinner sweep here.
    const auto w = network(Init::Random, 13, DType::F64);
    Tensor img = rand_tensor({1, 3, 64, 64}, 52, 0, 1, DType::F64);
    auto r = gradcheck(
        [&](Tape&, Var v) {
            const auto p = net::assemble(v, w);
            Var total = ag::add(ag::sum(p.logits[0]), ag::sum(p.boxes[0]));
            for (std::size_t i = 1; i < 3; ++i) total = ag::add(total, ag::add(ag::sum(p.logits[i]), ag::sum(p.boxes[i])));
            return total;
        },
        img, 1e-6, 96);
    EXPECT_LE(r.max_relative_error, 1e-4);
    EXPECT_EQ(r.coordinates_checked, 96);
}
