#include "rmk/mdcaa.hpp"

#include <array>

namespace rmk::mdcaa {
namespace {

ops::Rotation forward_rotation(Diagonal which) {
    return which == Diagonal::Main ? ops::Rotation::Cw : ops::Rotation::Ccw;
}

void check_config(const Config& c) {
    if (c.channels < 1) throw ContractError("MDCAA: channels must be positive");
    if (c.strip < 3 || c.strip % 2 == 0) throw ContractError("MDCAA: strip length must be odd and >= 3");
    if (c.pool_window < 1 || c.pool_window % 2 == 0) {
        throw ContractError("MDCAA: pool window must be odd and >= 1");
    }
}

}  // namespace

Tensor DiagonalStrip::effective_kernel(Diagonal which) const {
    const auto c = taps.dim(0), m = taps.dim(1);
    Tensor k = Tensor::zeros({c, 1, m, m}, taps.dtype());
    for (std::int64_t ch = 0; ch < c; ++ch) {
        for (std::int64_t i = 0; i < m; ++i) {
            const std::int64_t col = which == Diagonal::Main ? i : m - 1 - i;
            k.set(ch, 0, i, col, taps.item(ch * m + i));
        }
    }
    return k;
}

Tensor DiagonalStrip::rotated_kernel(Diagonal which) const {
    return ops::rot90(effective_kernel(which), forward_rotation(which));
}

Weights Weights::make(const Config& config, Init init, Rng& rng, DType dtype) {
    check_config(config);
    const auto c = config.channels, m = config.strip;
    Weights w;
    w.config = config;
    w.pointwise = ConvLayer::make(c, c, 1, 1, 1, 1, init, rng, dtype);
    w.vertical = ConvLayer::make(c, c, m, 1, 1, c, init, rng, dtype);
    w.horizontal = ConvLayer::make(c, c, 1, m, 1, c, init, rng, dtype);
    for (DiagonalStrip* d : {&w.main_diagonal, &w.anti_diagonal}) {
        // fan-in of a diagonal strip is m, like the axis strips.
        d->taps = ConvLayer::make(c, c, 1, m, 1, c, init, rng, dtype).kernel.reshape({c, m});
        d->bias = Tensor::zeros({c}, dtype);
    }
    w.fusion = ConvLayer::make(4 * c, c, 1, 1, 1, 1, init, rng, dtype);
    return w;
}

std::int64_t Weights::param_count() const {
    return pointwise.param_count() + vertical.param_count() + horizontal.param_count() +
           main_diagonal.taps.numel() + anti_diagonal.taps.numel() + fusion.param_count();
}

Weights Weights::to(DType dtype) const {
    Weights w = *this;
    w.pointwise = pointwise.to(dtype);
    w.vertical = vertical.to(dtype);
    w.horizontal = horizontal.to(dtype);
    for (DiagonalStrip* d : {&w.main_diagonal, &w.anti_diagonal}) {
        d->taps = d->taps.to(dtype);
        d->bias = d->bias.to(dtype);
    }
    w.fusion = fusion.to(dtype);
    return w;
}

void Weights::export_to(io::NamedTensors& out, const std::string& prefix) const {
    pointwise.export_to(out, prefix + ".pointwise");
    vertical.export_to(out, prefix + ".vertical");
    horizontal.export_to(out, prefix + ".horizontal");
    out.add(prefix + ".main_diagonal.taps", "kernel", main_diagonal.taps);
    out.add(prefix + ".main_diagonal.bias", "bias", main_diagonal.bias);
    out.add(prefix + ".anti_diagonal.taps", "kernel", anti_diagonal.taps);
    out.add(prefix + ".anti_diagonal.bias", "bias", anti_diagonal.bias);
    fusion.export_to(out, prefix + ".fusion");
}

void Weights::import_from(const io::NamedTensors& in, const std::string& prefix) {
    pointwise.import_from(in, prefix + ".pointwise");
    vertical.import_from(in, prefix + ".vertical");
    horizontal.import_from(in, prefix + ".horizontal");
    const std::array<std::pair<DiagonalStrip*, std::string>, 2> diagonals{
        {{&main_diagonal, ".main_diagonal"}, {&anti_diagonal, ".anti_diagonal"}}};
    for (const auto& [d, name] : diagonals) {
        const Tensor& taps = in.get(prefix + name + ".taps");
        const Tensor& bias = in.get(prefix + name + ".bias");
        if (taps.shape() != d->taps.shape() || bias.shape() != d->bias.shape()) {
            throw ShapeError("weights for '" + prefix + name + "' have the wrong shape");
        }
        d->taps = taps.to(d->taps.dtype());
        d->bias = bias.to(d->bias.dtype());
    }
    fusion.import_from(in, prefix + ".fusion");
}

Var diagonal_branch(Var hv, const Weights& w, Diagonal which) {
    require_ndim(hv.value(), 4, "diagonal_branch");
    Tape& tape = *hv.tape;
    const DiagonalStrip& strip = which == Diagonal::Main ? w.main_diagonal : w.anti_diagonal;
    const auto rotation = forward_rotation(which);
    const auto m = w.config.strip;
    Var rotated = ag::rot90(hv, rotation);
    Var conv = ag::conv2d(rotated, tape.constant(strip.rotated_kernel(which)),
                          ops::same_padding(m, m, 1, w.config.channels), tape.constant(strip.bias));
    return ag::rot90(conv, ops::inverse(rotation));
}

Tensor diagonal_branch(const Tensor& hv, const Weights& w, Diagonal which) {
    Tape tape(false);
    return diagonal_branch(tape.constant(hv), w, which).value();
}

Var attention(Var features, const Weights& w) {
    const Tensor& f = features.value();
    require_ndim(f, 4, "mdcaa");
    if (f.dim(1) != w.config.channels) {
        throw ShapeError("mdcaa: input has " + std::to_string(f.dim(1)) +
                         " channels, weights expect " + std::to_string(w.config.channels));
    }
    const auto pw = w.config.pool_window;
    const ops::PoolGeometry pool{pw, pw, 1, 1, (pw - 1) / 2, (pw - 1) / 2};
    Var pooled = apply(ag::avg_pool(features, pool), w.pointwise);
    Var v = apply(pooled, w.vertical);
    Var h = apply(pooled, w.horizontal);
    Var hv = apply(v, w.horizontal);
    Var main = diagonal_branch(hv, w, Diagonal::Main);
    Var anti = diagonal_branch(hv, w, Diagonal::Anti);
    const std::array<Var, 4> parts{main, anti, h, v};
    return ag::sigmoid(apply(ag::concat_channels(parts), w.fusion));
}

Tensor attention(const Tensor& features, const Weights& w) {
    Tape tape(false);
    return attention(tape.constant(features), w).value();
}

Var apply(Var features, const Weights& w) { return ag::mul(features, attention(features, w)); }

Tensor apply(const Tensor& features, const Weights& w) {
    Tape tape(false);
    return apply(tape.constant(features), w).value();
}

}  // namespace rmk::mdcaa
