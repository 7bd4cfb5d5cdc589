#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "rmk/io.hpp"
#include "support.hpp"

using namespace rmk;
using testing_support::rand_tensor;
using testing_support::TempDir;

TEST(Tensor, ShapeAndPayloadAgree) {
    Tensor t = Tensor::zeros({2, 3, 4, 5});
    EXPECT_EQ(t.numel(), 120);
    EXPECT_EQ(t.ndim(), 4u);
    EXPECT_EQ(t.dtype(), DType::F32);
    EXPECT_EQ(static_cast<std::int64_t>(t.data<float>().size()), t.numel());
}

TEST(Tensor, RejectsBadExtents) {
    EXPECT_THROW(Tensor::zeros({2, 0, 3}), ShapeError);
    EXPECT_THROW(Tensor::zeros({}), ShapeError);
    EXPECT_THROW(Tensor::from_values({2, 2}, {1, 2, 3}), ShapeError);
}

TEST(Tensor, DtypeMismatchedAccessIsAContractError) {
    Tensor t = Tensor::zeros({2}, DType::F64);
    EXPECT_THROW(t.data<float>(), ContractError);
}

TEST(Tensor, ConversionRoundTrip) {
    Tensor a = Tensor::from_values({3}, {0.5, -1.25, 3.0}, DType::F64);
    Tensor b = a.to(DType::F32).to(DType::F64);
    EXPECT_TRUE(bit_equal(a, b));
}

TEST(Tensor, ReshapeKeepsData) {
    Tensor a = Tensor::from_values({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor b = a.reshape({3, 2});
    EXPECT_EQ(b.item(4), 5.0);
    EXPECT_THROW(a.reshape({4, 2}), ShapeError);
}

TEST(Rmkt, RoundTripIsBitExact) {
    for (DType d : {DType::F32, DType::F64}) {
        Tensor t = rand_tensor({2, 3, 4, 5}, 9, -1, 1, d);
        std::stringstream ss;
        io::write_rmkt(ss, t);
        Tensor back = io::read_rmkt(ss);
        EXPECT_TRUE(bit_equal(t, back));
    }
}

TEST(Rmkt, HeaderLayout) {
    Tensor t = Tensor::from_values({2}, {1.0, 2.0}, DType::F32);
    std::stringstream ss;
    io::write_rmkt(ss, t);
    const std::string bytes = ss.str();
    ASSERT_EQ(bytes.size(), 4u + 3u + 4u + 8u);
    EXPECT_EQ(bytes.substr(0, 4), "RMKT");
    EXPECT_EQ(bytes[4], 1);  // version
    EXPECT_EQ(bytes[5], 0);  // f32
    EXPECT_EQ(bytes[6], 1);  // ndim
    EXPECT_EQ(static_cast<unsigned char>(bytes[7]), 2);
}

TEST(Rmkt, RejectsCorruptStreams) {
    std::stringstream bad("XXXX");
    EXPECT_THROW(io::read_rmkt(bad), io::FormatError);
    Tensor t = Tensor::zeros({4, 4});
    std::stringstream ss;
    io::write_rmkt(ss, t);
    std::string s = ss.str();
    s.resize(s.size() - 3);
    std::stringstream cut(s);
    EXPECT_THROW(io::read_rmkt(cut), io::FormatError);
}

TEST(Bundle, SaveLoadWithManifest) {
    TempDir dir;
    io::NamedTensors named;
    named.add("a", "input", rand_tensor({1, 2, 3, 3}, 1));
    named.add("b.kernel", "kernel", rand_tensor({4}, 2, -1, 1, DType::F32));
    io::save_bundle(dir.path(), named);
    const auto back = io::load_bundle(dir.path());
    ASSERT_EQ(back.size(), 2u);
    EXPECT_TRUE(bit_equal(back.get("a"), named.get("a")));
    EXPECT_TRUE(bit_equal(back.get("b.kernel"), named.get("b.kernel")));
    std::ifstream manifest(dir.path() / "manifest.txt");
    std::stringstream text;
    text << manifest.rdbuf();
    EXPECT_NE(text.str().find("a a.rmkt f64 1x2x3x3 input"), std::string::npos);
}

TEST(Bundle, RejectsDuplicateAndInvalidNames) {
    io::NamedTensors named;
    named.add("x", "", Tensor::zeros({1}));
    EXPECT_THROW(named.add("x", "", Tensor::zeros({1})), ContractError);
    EXPECT_THROW(named.add("a/b", "", Tensor::zeros({1})), ContractError);
    EXPECT_THROW(named.add("a b", "", Tensor::zeros({1})), ContractError);
}

TEST(Pgm, AsciiAndBinaryReadBack) {
    TempDir dir;
    {
        std::ofstream os(dir.path() / "a.pgm");
        os << "P2\n# comment\n3 2\n255\n0 51 102\n153 204 255\n";
    }
    Tensor a = io::read_pgm(dir.path() / "a.pgm");
    ASSERT_EQ(a.shape(), (Shape{1, 1, 2, 3}));
    EXPECT_NEAR(a.at(0, 0, 0, 1), 0.2, 1e-7);
    EXPECT_NEAR(a.at(0, 0, 1, 2), 1.0, 1e-7);

    io::write_pgm(dir.path() / "b.pgm", a);
    Tensor b = io::read_pgm(dir.path() / "b.pgm");
    EXPECT_TRUE(bit_equal(a, b));
}
