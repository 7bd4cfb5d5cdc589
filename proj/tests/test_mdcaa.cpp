#include <gtest/gtest.h>

#include <cmath>

#include "rmk/mdcaa.hpp"
#include "support.hpp"

using namespace rmk;
using testing_support::naive_conv2d;
using testing_support::rand_tensor;

namespace {

mdcaa::Weights weights(std::int64_t c, std::int64_t m = 5, std::int64_t pool = 7, Init init = Init::Random,
                       std::uint64_t seed = 1) {
    Rng rng(seed);
    return mdcaa::Weights::make({c, m, pool}, init, rng, DType::F64);
}

void set_dirac_depthwise(ConvLayer& l) {
    Tensor& k = l.kernel;
    k = Tensor::zeros(k.shape(), k.dtype());
    for (std::int64_t c = 0; c < k.dim(0); ++c) k.set(c, 0, k.dim(2) / 2, k.dim(3) / 2, 1.0);
}

void set_dirac_taps(mdcaa::DiagonalStrip& d) {
    const auto c = d.taps.dim(0), m = d.taps.dim(1);
    d.taps = Tensor::zeros({c, m}, d.taps.dtype());
    for (std::int64_t i = 0; i < c; ++i) d.taps.set_item(i * m + m / 2, 1.0);
}

}  // namespace

TEST(Mdcaa, ZeroWeightsGiveHalf) {
    const auto w = weights(3, 5, 7, Init::Zero);
    Tensor f = rand_tensor({1, 3, 9, 9}, 2);
    for (double v : mdcaa::attention(f, w).to_doubles()) EXPECT_EQ(v, 0.5);
    EXPECT_TRUE(bit_equal(mdcaa::apply(f, w), ops::affine(f, 0.5)));
}

TEST(Mdcaa, ZeroInputGivesZeroOutput) {
    Tensor y = mdcaa::apply(Tensor::zeros({1, 3, 8, 8}, DType::F64), weights(3));
    for (double v : y.to_doubles()) EXPECT_EQ(v, 0.0);
}

TEST(Mdcaa, AttentionInOpenIntervalAndAttenuates) {
    const auto w = weights(4, 11, 7, Init::Random, 3);
    for (std::uint64_t s = 0; s < 50; ++s) {
        const double scale = s % 5 == 0 ? 1e3 : 2.0;
        Tensor f = rand_tensor({1, 4, 8, 8}, 100 + s, -scale, scale);
        Tensor a = mdcaa::attention(f, w);
        Tensor y = mdcaa::apply(f, w);
        ASSERT_EQ(a.shape(), f.shape());
        for (std::int64_t i = 0; i < f.numel(); ++i) {
            EXPECT_GT(a.item(i), 0.0);
            EXPECT_LT(a.item(i), 1.0);
            EXPECT_LE(std::abs(y.item(i)), std::abs(f.item(i)));
        }
    }
}

TEST(Mdcaa, ChannelMismatch) {
    EXPECT_THROW(mdcaa::attention(rand_tensor({1, 2, 8, 8}, 1), weights(3)), ShapeError);
}

TEST(Mdcaa, ConfigValidation) {
    Rng rng(1);
    EXPECT_THROW(mdcaa::Weights::make({3, 4, 7}, Init::Random, rng), ContractError);
    EXPECT_THROW(mdcaa::Weights::make({3, 1, 7}, Init::Random, rng), ContractError);
    EXPECT_THROW(mdcaa::Weights::make({3, 5, 4}, Init::Random, rng), ContractError);
}

TEST(DiagonalBranch, DiracTapIsIdentity) {
    auto w = weights(2, 5);
    set_dirac_taps(w.main_diagonal);
    set_dirac_taps(w.anti_diagonal);
    Tensor x = rand_tensor({1, 2, 7, 5}, 4);
    EXPECT_TRUE(bit_equal(mdcaa::diagonal_branch(x, w, mdcaa::Diagonal::Main), x));
    EXPECT_TRUE(bit_equal(mdcaa::diagonal_branch(x, w, mdcaa::Diagonal::Anti), x));
}

TEST(DiagonalBranch, EqualsDirectConvWithEffectiveKernel) {
    auto w = weights(3, 7, 7, Init::Random, 5);
    w.main_diagonal.bias = rand_tensor({3}, 6);
    w.anti_diagonal.bias = rand_tensor({3}, 7);
    Tensor x = rand_tensor({2, 3, 9, 6}, 8);
    for (auto which : {mdcaa::Diagonal::Main, mdcaa::Diagonal::Anti}) {
        const auto& d = which == mdcaa::Diagonal::Main ? w.main_diagonal : w.anti_diagonal;
        Tensor ref = naive_conv2d(x, d.effective_kernel(which), 1, 1, 3, 3, 3);
        for (std::int64_t n = 0; n < 2; ++n)
            for (std::int64_t c = 0; c < 3; ++c)
                for (std::int64_t r = 0; r < 9; ++r)
                    for (std::int64_t q = 0; q < 6; ++q) ref.set(n, c, r, q, ref.at(n, c, r, q) + d.bias.item(c));
        EXPECT_LE(max_abs_diff(mdcaa::diagonal_branch(x, w, which), ref), 1e-12);
    }
}

TEST(DiagonalBranch, BrightPixelLightsItsDiagonal) {
    auto w = weights(1, 3);
    w.main_diagonal.taps = Tensor::full({1, 3}, 1.0 / 3.0, DType::F64);
    w.anti_diagonal.taps = Tensor::full({1, 3}, 1.0 / 3.0, DType::F64);
    Tensor x = Tensor::zeros({1, 1, 7, 7}, DType::F64);
    x.set(0, 0, 3, 3, 1.0);
    Tensor main = mdcaa::diagonal_branch(x, w, mdcaa::Diagonal::Main);
    Tensor anti = mdcaa::diagonal_branch(x, w, mdcaa::Diagonal::Anti);
    for (std::int64_t r = 0; r < 7; ++r)
        for (std::int64_t c = 0; c < 7; ++c) {
            const bool on_main = r == c && std::abs(r - 3) <= 1;
            const bool on_anti = r + c == 6 && std::abs(r - 3) <= 1;
            EXPECT_NEAR(main.at(0, 0, r, c), on_main ? 1.0 / 3.0 : 0.0, 1e-15) << r << "," << c;
            EXPECT_NEAR(anti.at(0, 0, r, c), on_anti ? 1.0 / 3.0 : 0.0, 1e-15) << r << "," << c;
        }
}

TEST(DiagonalBranch, RotationEquivariance) {
    // Turning the input a quarter clockwise swaps the roles of the two diagonals.
    auto w = weights(2, 5, 7, Init::Random, 9);
    w.anti_diagonal.taps = w.main_diagonal.taps;
    Tensor x = rand_tensor({1, 2, 8, 8}, 10);
    Tensor lhs = ops::rot90(mdcaa::diagonal_branch(x, w, mdcaa::Diagonal::Main), ops::Rotation::Cw);
    Tensor rhs = mdcaa::diagonal_branch(ops::rot90(x, ops::Rotation::Cw), w, mdcaa::Diagonal::Anti);
    EXPECT_LE(max_abs_diff(lhs, rhs), 1e-12);
}

TEST(Mdcaa, HandComposedLinearOracle) {
    // Pool window 1, identity pointwise, Dirac strips: every branch passes F
    // through, so A = sigmoid(sum_k W_k F + b) with W_k the fusion slices.
    auto w = weights(3, 5, 1, Init::Random, 11);
    w.pointwise.kernel = Tensor::zeros({3, 3, 1, 1}, DType::F64);
    for (int c = 0; c < 3; ++c) w.pointwise.kernel.set(c, c, 0, 0, 1.0);
    set_dirac_depthwise(w.vertical);
    set_dirac_depthwise(w.horizontal);
    set_dirac_taps(w.main_diagonal);
    set_dirac_taps(w.anti_diagonal);
    w.fusion.bias = rand_tensor({3}, 12);
    Tensor f = rand_tensor({1, 3, 6, 5}, 13);
    Tensor a = mdcaa::attention(f, w);
    for (std::int64_t o = 0; o < 3; ++o)
        for (std::int64_t r = 0; r < 6; ++r)
            for (std::int64_t q = 0; q < 5; ++q) {
                double z = w.fusion.bias.item(o);
                for (std::int64_t k = 0; k < 4; ++k)
                    for (std::int64_t c = 0; c < 3; ++c) z += w.fusion.kernel.at(o, k * 3 + c, 0, 0) * f.at(0, c, r, q);
                EXPECT_NEAR(a.at(0, o, r, q), 1.0 / (1.0 + std::exp(-z)), 1e-6);
            }
}

TEST(ConvRotation, EquivarianceForSamePadding) {
    Tensor x = rand_tensor({1, 3, 9, 7}, 14);
    Tensor k = rand_tensor({2, 3, 5, 3}, 15);
    for (auto dir : {ops::Rotation::Cw, ops::Rotation::Ccw}) {
        Tensor lhs = ops::rot90(ops::conv2d(x, k, ops::same_padding(5, 3)), dir);
        Tensor rhs = ops::conv2d(ops::rot90(x, dir), ops::rot90(k, dir), ops::same_padding(3, 5));
        EXPECT_LE(max_abs_diff(lhs, rhs), 1e-12);
    }
}
