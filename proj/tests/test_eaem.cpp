#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rmk/eaem.hpp"
#include "rmk/errors.hpp"
#include "rmk/random.hpp"

using namespace rmk;
using namespace rmk::eaem;
constexpr double pi = std::numbers::pi;

TEST(Encode, Fixtures) {
    auto a = encode(0.0, 1.0);
    EXPECT_EQ(a.x, 1.0);
    EXPECT_EQ(a.y, 0.0);
    auto b = encode(pi / 2, 1.0);
    EXPECT_NEAR(b.x, 0.0, 1e-15);
    EXPECT_NEAR(b.y, 1.0, 1e-15);
    auto c = encode(pi / 4, 2.0);
    EXPECT_NEAR(c.x, 0.0, 1e-15);
    EXPECT_NEAR(c.y, 1.0, 1e-15);
}

TEST(Encode, Contracts) {
    EXPECT_THROW(encode(0.1, 0.0), ContractError);
    EXPECT_THROW(encode(0.1, 2.5), ContractError);
    EXPECT_THROW(encode(-0.1, 1.0), ContractError);
    EXPECT_THROW(encode(2 * pi, 1.0), ContractError);
    EXPECT_THROW(encode(pi, 2.0), ContractError);
    EXPECT_NO_THROW(encode(3.9 * pi, 0.5));
}

TEST(Normalize, Fixtures) {
    auto a = normalize(3, 4);
    EXPECT_DOUBLE_EQ(a.x, 0.6);
    EXPECT_DOUBLE_EQ(a.y, 0.8);
    auto b = normalize(1, 0);
    EXPECT_EQ(b.x, 1.0);
    EXPECT_EQ(b.y, 0.0);
    EXPECT_THROW(normalize(1e-13, 0), DegenerateInputError);
    EXPECT_THROW(normalize(0, 0), DegenerateInputError);
}

TEST(ArgUnit, SixCases) {
    EXPECT_NEAR(arg_unit(std::sqrt(0.5), std::sqrt(0.5)), pi / 4, 1e-15);         // x > 0, y >= 0
    EXPECT_EQ(arg_unit(1, 0), 0.0);                                                // x > 0, y = 0
    EXPECT_NEAR(arg_unit(std::sqrt(0.5), -std::sqrt(0.5)), 7 * pi / 4, 1e-15);    // x > 0, y < 0
    EXPECT_NEAR(arg_unit(-std::sqrt(0.5), std::sqrt(0.5)), 3 * pi / 4, 1e-15);    // x < 0, y > 0
    EXPECT_NEAR(arg_unit(-std::sqrt(0.5), -std::sqrt(0.5)), 5 * pi / 4, 1e-15);   // x < 0, y < 0
    EXPECT_EQ(arg_unit(0, 1), pi / 2);                                             // x = 0, y > 0
    EXPECT_EQ(arg_unit(0, -1), 3 * pi / 2);                                        // x = 0, y < 0
    EXPECT_THROW(arg_unit(0, 0), DegenerateInputError);                            // origin
    EXPECT_EQ(arg_unit(-1, 0), pi);
}

TEST(ArgUnit, AxisToleranceAndCircleCheck) {
    EXPECT_EQ(arg_unit(1e-13, 1.0), pi / 2);
    EXPECT_EQ(arg_unit(-1e-13, -1.0), 3 * pi / 2);
    EXPECT_THROW(arg_unit(0.5, 0.5), ContractError);
}

TEST(ArgUnit, AgreesWithAtan2Oracle) {
    Rng rng(3);
    for (int i = 0; i < 200000; ++i) {
        const double phi = rng.uniform(-pi, pi);
        const double x = std::cos(phi), y = std::sin(phi);
        double expect = std::atan2(y, x);
        if (expect < 0) expect += 2 * pi;
        if (expect >= 2 * pi) expect = 0.0;
        const double got = arg_unit(x, y);
        // At the seam a tiny negative y maps just below 2*pi on both sides.
        EXPECT_LE(std::min(std::abs(got - expect), 2 * pi - std::abs(got - expect)), 1e-12);
        EXPECT_GE(got, 0.0);
        EXPECT_LT(got, 2 * pi);
    }
}

TEST(Decode, Fixtures) {
    EXPECT_NEAR(decode(encode(1.234, 1.0)), 1.234, 1e-9);
    EXPECT_NEAR(decode({0, 1, 2.0}), pi / 4, 1e-15);
    for (double w : {0.5, 1.0, 2.0}) EXPECT_EQ(decode({1, 0, w}), 0.0);
}

TEST(Decode, RoundTripAllFrequencies) {
    Rng rng(4);
    for (double w : {0.5, 1.0, 2.0}) {
        double worst = 0.0;
        for (int i = 0; i < 100000; ++i) {
            const double theta = rng.uniform(0.0, period(w));
            worst = std::max(worst, std::abs(decode(encode(theta, w)) - theta));
        }
        EXPECT_LE(worst, 1e-9) << "omega " << w;
        // Edge of the period.
        const double edge = std::nextafter(period(w), 0.0);
        EXPECT_NEAR(decode(encode(edge, w)), edge, 1e-9);
    }
}

TEST(CodeDistance, Fixtures) {
    EXPECT_EQ(code_distance(encode(0.7), encode(0.7)), 0.0);
    EXPECT_NEAR(code_distance(encode(0.0), encode(pi)), 2.0, 1e-15);
    EXPECT_THROW(code_distance(encode(0.1, 1.0), encode(0.1, 2.0)), ContractError);
}

TEST(CodeDistance, ChordIdentity) {
    Rng rng(5);
    for (double w : {0.5, 1.0, 2.0}) {
        for (int i = 0; i < 1000; ++i) {
            const double a = rng.uniform(0, period(w)), b = rng.uniform(0, period(w));
            EXPECT_NEAR(code_distance(encode(a, w), encode(b, w)), 2 * std::abs(std::sin(w * (a - b) / 2)), 1e-12);
        }
    }
}

TEST(CodeDistance, ContinuousAcrossBoundary) {
    for (double w : {0.5, 1.0, 2.0}) {
        for (double eps : {1e-3, 1e-6}) {
            const double d = code_distance(encode(eps, w), encode(period(w) - eps, w));
            EXPECT_LE(d, 2 * w * eps * (1 + 1e-6));
            EXPECT_GT(std::abs(eps - (period(w) - eps)), period(w) - 3 * eps);
        }
    }
}

TEST(Jacobian, MatchesCentralDifferences) {
    for (double w : {0.5, 1.0, 2.0}) {
        const double p = period(w);
        for (double theta : {1e-4, 0.3, p / 2, p - 1e-4}) {
            const double h = 1e-6;
            const auto plus = encode(theta + h, w), minus = encode(theta - h, w);
            const auto j = encode_jacobian(theta, w);
            EXPECT_NEAR(j[0], (plus.x - minus.x) / (2 * h), 1e-8);
            EXPECT_NEAR(j[1], (plus.y - minus.y) / (2 * h), 1e-8);
        }
    }
}

TEST(Wrap, IntoPeriod) {
    EXPECT_NEAR(wrap(-0.5, 1.0), 2 * pi - 0.5, 1e-15);
    EXPECT_NEAR(wrap(7.0, 2.0), 7.0 - 2 * pi, 1e-14);
    EXPECT_LT(wrap(-1e-300, 1.0), 2 * pi);
    EXPECT_GE(wrap(-1e-300, 1.0), 0.0);
}
