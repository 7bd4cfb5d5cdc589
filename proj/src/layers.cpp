#include "rmk/layers.hpp"

#include <cmath>

namespace rmk {

ConvLayer ConvLayer::make(std::int64_t in_channels, std::int64_t out_channels, std::int64_t kh,
                          std::int64_t kw, std::int64_t stride, std::int64_t groups, Init init,
                          Rng& rng, DType dtype) {
    if (in_channels < 1 || out_channels < 1) throw ContractError("ConvLayer: channel counts must be positive");
    ConvLayer layer;
    layer.geometry = ops::same_padding(kh, kw, stride, groups);
    const Shape shape{out_channels, in_channels / groups, kh, kw};
    if (in_channels % groups != 0 || out_channels % groups != 0) {
        throw ContractError("ConvLayer: channels not divisible by groups");
    }
    if (init == Init::Random) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(shape[1] * kh * kw));
        layer.kernel = random_uniform(shape, -bound, bound, rng, dtype);
    } else {
        layer.kernel = Tensor::zeros(shape, dtype);
    }
    layer.bias = Tensor::zeros({out_channels}, dtype);
    return layer;
}

ConvLayer ConvLayer::to(DType dtype) const {
    ConvLayer out = *this;
    out.kernel = kernel.to(dtype);
    out.bias = bias.to(dtype);
    return out;
}

void ConvLayer::export_to(io::NamedTensors& out, const std::string& prefix) const {
    out.add(prefix + ".kernel", "kernel", kernel);
    out.add(prefix + ".bias", "bias", bias);
}

void ConvLayer::import_from(const io::NamedTensors& in, const std::string& prefix) {
    const Tensor& k = in.get(prefix + ".kernel");
    const Tensor& b = in.get(prefix + ".bias");
    if (k.shape() != kernel.shape() || b.shape() != bias.shape()) {
        throw ShapeError("weights for '" + prefix + "' have shape " + shape_string(k.shape()) +
                         ", expected " + shape_string(kernel.shape()));
    }
    kernel = k.to(kernel.dtype());
    bias = b.to(bias.dtype());
}

Var apply(Var x, const ConvLayer& layer) {
    Tape& tape = *x.tape;
    return ag::conv2d(x, tape.constant(layer.kernel), layer.geometry, tape.constant(layer.bias));
}

Tensor apply(const Tensor& x, const ConvLayer& layer) {
    return ops::conv2d(x, layer.kernel, layer.geometry, &layer.bias);
}

}  // namespace rmk
