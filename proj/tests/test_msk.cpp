#include <gtest/gtest.h>

#include "rmk/msk.hpp"
#include "support.hpp"

using namespace rmk;
using testing_support::naive_conv2d;
using testing_support::rand_tensor;

namespace {

msk::ModuleWeights module(std::int64_t in, std::int64_t branch_out, bool down, Init init = Init::Random,
                          std::uint64_t seed = 1) {
    Rng rng(seed);
    return msk::ModuleWeights::make({in, 0, branch_out, down}, init, rng, DType::F64);
}

// Branch oracle: the 1 x m and m x 1 strips folded into one m x m kernel
// K[o][i] = sum_j column[o][j] (x) row[j][i].
Tensor folded_kernel(const msk::ScaleBranch& b) {
    const auto out = b.column.kernel.dim(0), mid = b.row.kernel.dim(0), m = b.strip;
    Tensor k = Tensor::zeros({out, mid, m, m}, DType::F64);
    for (std::int64_t o = 0; o < out; ++o)
        for (std::int64_t i = 0; i < mid; ++i)
            for (std::int64_t u = 0; u < m; ++u)
                for (std::int64_t v = 0; v < m; ++v) {
                    double acc = 0.0;
                    for (std::int64_t j = 0; j < mid; ++j) acc += b.column.kernel.at(o, j, u, 0) * b.row.kernel.at(j, i, 0, v);
                    k.set(o, i, u, v, acc);
                }
    return k;
}

}  // namespace

TEST(MskModule, OutputShapes) {
    Tensor x = rand_tensor({1, 8, 32, 32}, 2);
    EXPECT_EQ(msk::module_forward(x, module(8, 8, false)).shape(), (Shape{1, 40, 32, 32}));
    EXPECT_EQ(msk::module_forward(x, module(8, 8, true)).shape(), (Shape{1, 40, 16, 16}));
}

TEST(MskModule, ZeroWeightsGiveZeros) {
    Tensor y = msk::module_forward(rand_tensor({1, 4, 8, 8}, 3), module(4, 2, false, Init::Zero));
    EXPECT_EQ(y.shape(), (Shape{1, 10, 8, 8}));
    for (double v : y.to_doubles()) EXPECT_EQ(v, 0.0);
}

TEST(MskModule, ChannelMismatch) {
    EXPECT_THROW(msk::module_forward(rand_tensor({1, 3, 8, 8}, 1), module(4, 2, false)), ShapeError);
}

TEST(MskModule, BranchesMatchFoldedKernelOracle) {
    for (bool down : {false, true}) {
        const auto w = module(3, 2, down, Init::Random, 5);
        Tensor x = rand_tensor({1, 3, 16, 16}, 6);
        Tensor y = msk::module_forward(x, w);
        const std::int64_t s = down ? 2 : 1;
        for (std::size_t k = 0; k < 4; ++k) {
            const auto& b = w.branches[k];
            Tensor reduced = naive_conv2d(x, b.reduce.kernel, s, s, 0, 0);
            Tensor ref = naive_conv2d(reduced, folded_kernel(b), 1, 1, b.strip / 2, b.strip / 2);
            Tensor got = ops::slice_channels(y, static_cast<std::int64_t>(k) * 2, 2);
            EXPECT_LE(max_abs_diff(got, ref), 1e-5) << "m=" << b.strip << " down=" << down;
        }
        Tensor id = naive_conv2d(naive_conv2d(x, w.identity_reduce.kernel, s, s, 0, 0), w.identity_conv.kernel, 1, 1, 1, 1);
        EXPECT_LE(max_abs_diff(ops::slice_channels(y, 8, 2), id), 1e-12);
    }
}

TEST(MskModule, ConcatOrderIsFiveSevenNineElevenIdentity) {
    const auto w = module(2, 1, false);
    EXPECT_EQ(w.branches[0].strip, 5);
    EXPECT_EQ(w.branches[1].strip, 7);
    EXPECT_EQ(w.branches[2].strip, 9);
    EXPECT_EQ(w.branches[3].strip, 11);
    for (const auto& b : w.branches) {
        EXPECT_EQ(b.row.kernel.shape(), (Shape{2, 2, 1, b.strip}));
        EXPECT_EQ(b.column.kernel.shape(), (Shape{1, 2, b.strip, 1}));
    }
    // Zeroing one branch zeroes exactly its slice.
    auto w2 = w;
    w2.branches[2].column.kernel = Tensor::zeros(w2.branches[2].column.kernel.shape(), DType::F64);
    Tensor x = rand_tensor({1, 2, 12, 12}, 7);
    Tensor a = msk::module_forward(x, w), b = msk::module_forward(x, w2);
    for (std::int64_t c = 0; c < 5; ++c) {
        Tensor sa = ops::slice_channels(a, c, 1), sb = ops::slice_channels(b, c, 1);
        if (c == 2) {
            for (double v : sb.to_doubles()) EXPECT_EQ(v, 0.0);
        } else {
            EXPECT_TRUE(bit_equal(sa, sb));
        }
    }
}

TEST(MskBlock, ExtentsHalveAndCompose) {
    Rng rng(9);
    const auto configs = msk::block_configs(4, 2);
    std::vector<msk::ModuleWeights> ws;
    for (const auto& c : configs) ws.push_back(msk::ModuleWeights::make(c, Init::Random, rng, DType::F64));
    Tensor x = rand_tensor({1, 4, 64, 64}, 10);
    auto m = msk::block_forward(x, ws);
    const std::int64_t extents[] = {64, 32, 16, 8};
    Tensor prev = x;
    for (std::size_t l = 0; l < 4; ++l) {
        EXPECT_EQ(m[l].shape(), (Shape{1, 10, extents[l], extents[l]}));
        EXPECT_TRUE(bit_equal(m[l], msk::module_forward(prev, ws[l])));
        prev = m[l];
    }
}

TEST(MskBlock, ZeroInputGivesZeros) {
    Rng rng(9);
    std::vector<msk::ModuleWeights> ws;
    for (const auto& c : msk::block_configs(2, 1)) ws.push_back(msk::ModuleWeights::make(c, Init::Random, rng));
    for (const auto& t : msk::block_forward(Tensor::zeros({1, 2, 16, 16}), ws)) {
        for (double v : t.to_doubles()) EXPECT_EQ(v, 0.0);
    }
}

TEST(MskBlock, ContractErrors) {
    Rng rng(9);
    const auto configs = msk::block_configs(2, 1);
    std::vector<msk::ModuleWeights> ws;
    for (const auto& c : configs) ws.push_back(msk::ModuleWeights::make(c, Init::Random, rng));
    Tensor x = Tensor::zeros({1, 2, 16, 16});
    EXPECT_THROW(msk::block_forward(x, std::span(ws).first(3)), ContractError);
    auto bad = ws;
    bad[0] = msk::ModuleWeights::make({2, 0, 1, true}, Init::Random, rng);
    EXPECT_THROW(msk::block_forward(x, bad), ContractError);
}

TEST(ParamCount, DocumentedCounts) {
    auto r64 = msk::count_params({64, 64, 64, false});
    EXPECT_EQ(r64.branches[0].full, 102400);
    EXPECT_EQ(r64.branches[0].separable, 40960);
    EXPECT_EQ(r64.branches[0].ratio, msk::Ratio(2, 5));
    auto r1 = msk::count_params({1, 1, 1, false});
    EXPECT_EQ(r1.branches[1].full, 49);
    EXPECT_EQ(r1.branches[1].separable, 14);
    EXPECT_EQ(r1.branches[1].ratio, msk::Ratio(2, 7));
}

TEST(ParamCount, RatioIsTwoOverMForAllWidths) {
    for (std::int64_t c = 1; c <= 64; ++c) {
        const auto r = msk::count_params({c, c, c, false});
        for (const auto& b : r.branches) {
            EXPECT_EQ(b.ratio, msk::Ratio(2, b.strip)) << "C=" << c;
            EXPECT_LT(b.separable, b.full);
        }
    }
}

TEST(ParamCount, MatchesInstantiatedKernels) {
    Rng rng(1);
    for (bool down : {false, true}) {
        const msk::ModuleConfig cfg{6, 4, 3, down};
        const auto w = msk::ModuleWeights::make(cfg, Init::Random, rng);
        const auto r = msk::count_params(cfg);
        EXPECT_EQ(w.param_count(), r.separable_total);
        for (std::size_t k = 0; k < 4; ++k) {
            const auto& b = w.branches[k];
            EXPECT_EQ(b.row.kernel.numel() + b.column.kernel.numel(), r.branches[k].separable);
        }
    }
}

TEST(ParamCount, ReferenceBlockDeltaIsNegative) {
    const auto block = msk::reference_block();
    const auto r = msk::count_block_params(block);
    EXPECT_LT(r.delta(), 0);
    for (std::int64_t m = 3; m <= 15; m += 2) {
        const std::int64_t strips[] = {m};
        EXPECT_LT(msk::count_params(block[0], strips).delta(), 0) << "m=" << m;
    }
}
