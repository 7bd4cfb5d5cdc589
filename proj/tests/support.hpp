#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "rmk/random.hpp"
#include "rmk/tensor.hpp"

namespace testing_support {

using rmk::Shape;
using rmk::Tensor;

inline Tensor rand_tensor(const Shape& s, std::uint64_t seed, double lo = -1.0, double hi = 1.0,
                          rmk::DType dtype = rmk::DType::F64) {
    rmk::Rng rng(seed);
    return rmk::random_uniform(s, lo, hi, rng, dtype);
}

// Loop-for-loop cross-correlation with zero padding, accumulated in double.
inline Tensor naive_conv2d(const Tensor& x, const Tensor& k, std::int64_t sh, std::int64_t sw, std::int64_t ph,
                           std::int64_t pw, std::int64_t groups = 1) {
    const auto n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const auto oc = k.dim(0), icg = k.dim(1), kh = k.dim(2), kw = k.dim(3);
    const auto oh = (h + 2 * ph - kh) / sh + 1, ow = (w + 2 * pw - kw) / sw + 1;
    const auto ocg = oc / groups;
    (void)c;
    Tensor y = Tensor::zeros({n, oc, oh, ow}, rmk::DType::F64);
    for (std::int64_t b = 0; b < n; ++b)
        for (std::int64_t o = 0; o < oc; ++o)
            for (std::int64_t r = 0; r < oh; ++r)
                for (std::int64_t q = 0; q < ow; ++q) {
                    double acc = 0.0;
                    const auto g = o / ocg;
                    for (std::int64_t i = 0; i < icg; ++i)
                        for (std::int64_t u = 0; u < kh; ++u)
                            for (std::int64_t v = 0; v < kw; ++v) {
                                const auto rr = r * sh - ph + u, cc = q * sw - pw + v;
                                if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
                                acc += x.at(b, g * icg + i, rr, cc) * k.at(o, i, u, v);
                            }
                    y.set(b, o, r, q, acc);
                }
    return y;
}

class TempDir {
   public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("rmk_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

   private:
    std::filesystem::path path_;
};

}  // namespace testing_support
