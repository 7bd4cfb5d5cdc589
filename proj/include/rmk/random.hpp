#pragma once

#include <cstdint>
#include <random>

#include "rmk/tensor.hpp"

namespace rmk {

/// Seeded generator whose derived draws are identical on every platform
/// (std distributions are implementation-defined, so they are avoided).
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next() % span);
    }

   private:
    std::mt19937_64 engine_;
};

Tensor random_uniform(const Shape& shape, double lo, double hi, Rng& rng,
                      DType dtype = DType::F64);

}  // namespace rmk
