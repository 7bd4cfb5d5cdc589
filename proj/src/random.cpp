#include "rmk/random.hpp"

#include <vector>

namespace rmk {

Tensor random_uniform(const Shape& shape, double lo, double hi, Rng& rng, DType dtype) {
    std::vector<double> values(static_cast<std::size_t>(shape_numel(shape)));
    for (auto& v : values) v = rng.uniform(lo, hi);
    return Tensor::from_values(shape, values, dtype);
}

}  // namespace rmk
