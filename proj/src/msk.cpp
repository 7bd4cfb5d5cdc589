#include "rmk/msk.hpp"

namespace rmk::msk {

ModuleWeights ModuleWeights::make(const ModuleConfig& config, Init init, Rng& rng, DType dtype) {
    if (config.in_channels < 1 || config.branch_out < 1 || config.mid() < 1) {
        throw ContractError("MSK module: channel counts must be positive");
    }
    const std::int64_t stride = config.downsample ? 2 : 1;
    const auto mid = config.mid();
    ModuleWeights w;
    w.config = config;
    for (std::size_t k = 0; k < kStripSizes.size(); ++k) {
        const auto m = kStripSizes[k];
        auto& b = w.branches[k];
        b.strip = m;
        b.reduce = ConvLayer::make(config.in_channels, mid, 1, 1, stride, 1, init, rng, dtype);
        b.row = ConvLayer::make(mid, mid, 1, m, 1, 1, init, rng, dtype);
        b.column = ConvLayer::make(mid, config.branch_out, m, 1, 1, 1, init, rng, dtype);
    }
    w.identity_reduce = ConvLayer::make(config.in_channels, mid, 1, 1, stride, 1, init, rng, dtype);
    w.identity_conv = ConvLayer::make(mid, config.branch_out, 3, 3, 1, 1, init, rng, dtype);
    return w;
}

std::int64_t ModuleWeights::param_count() const {
    std::int64_t n = identity_reduce.param_count() + identity_conv.param_count();
    for (const auto& b : branches) {
        n += b.reduce.param_count() + b.row.param_count() + b.column.param_count();
    }
    return n;
}

ModuleWeights ModuleWeights::to(DType dtype) const {
    ModuleWeights w = *this;
    for (auto& b : w.branches) {
        b.reduce = b.reduce.to(dtype);
        b.row = b.row.to(dtype);
        b.column = b.column.to(dtype);
    }
    w.identity_reduce = identity_reduce.to(dtype);
    w.identity_conv = identity_conv.to(dtype);
    return w;
}

void ModuleWeights::export_to(io::NamedTensors& out, const std::string& prefix) const {
    for (const auto& b : branches) {
        const std::string p = prefix + ".branch" + std::to_string(b.strip);
        b.reduce.export_to(out, p + ".reduce");
        b.row.export_to(out, p + ".row");
        b.column.export_to(out, p + ".column");
    }
    identity_reduce.export_to(out, prefix + ".identity.reduce");
    identity_conv.export_to(out, prefix + ".identity.conv");
}

void ModuleWeights::import_from(const io::NamedTensors& in, const std::string& prefix) {
    for (auto& b : branches) {
        const std::string p = prefix + ".branch" + std::to_string(b.strip);
        b.reduce.import_from(in, p + ".reduce");
        b.row.import_from(in, p + ".row");
        b.column.import_from(in, p + ".column");
    }
    identity_reduce.import_from(in, prefix + ".identity.reduce");
    identity_conv.import_from(in, prefix + ".identity.conv");
}

Var module_forward(Var x, const ModuleWeights& w) {
    const Tensor& xv = x.value();
    require_ndim(xv, 4, "msk module");
    if (xv.dim(1) != w.config.in_channels) {
        throw ShapeError("msk module: input has " + std::to_string(xv.dim(1)) +
                         " channels, weights expect " + std::to_string(w.config.in_channels));
    }
    std::vector<Var> parts;
    parts.reserve(5);
    for (const auto& b : w.branches) {
        parts.push_back(apply(apply(apply(x, b.reduce), b.row), b.column));
    }
    parts.push_back(apply(apply(x, w.identity_reduce), w.identity_conv));
    return ag::concat_channels(parts);
}

Tensor module_forward(const Tensor& x, const ModuleWeights& w) {
    Tape tape(false);
    return module_forward(tape.constant(x), w).value();
}

std::array<ModuleConfig, 4> block_configs(std::int64_t in_channels, std::int64_t branch_out,
                                          std::int64_t mid_channels) {
    std::array<ModuleConfig, 4> configs;
    for (std::size_t l = 0; l < configs.size(); ++l) {
        configs[l].in_channels = l == 0 ? in_channels : 5 * branch_out;
        configs[l].mid_channels = mid_channels;
        configs[l].branch_out = branch_out;
        configs[l].downsample = l != 0;
    }
    return configs;
}

namespace {

void check_block(std::span<const ModuleWeights> modules) {
    if (modules.size() != 4) {
        throw ContractError("MSK block needs exactly 4 modules, got " + std::to_string(modules.size()));
    }
    for (std::size_t l = 0; l < modules.size(); ++l) {
        if (modules[l].config.downsample != (l != 0)) {
            throw ContractError("MSK block: module " + std::to_string(l + 1) +
                                (l == 0 ? " must not downsample" : " must downsample"));
        }
    }
}

}  // namespace

std::array<Var, 4> block_forward(Var x, std::span<const ModuleWeights> modules) {
    check_block(modules);
    std::array<Var, 4> m;
    Var prev = x;
    for (std::size_t l = 0; l < 4; ++l) {
        m[l] = module_forward(prev, modules[l]);
        prev = m[l];
    }
    return m;
}

std::array<Tensor, 4> block_forward(const Tensor& x, std::span<const ModuleWeights> modules) {
    Tape tape(false);
    auto vars = block_forward(tape.constant(x), modules);
    return {vars[0].value(), vars[1].value(), vars[2].value(), vars[3].value()};
}

ParamCountReport count_params(const ModuleConfig& config, std::span<const std::int64_t> strips) {
    if (config.in_channels < 1 || config.branch_out < 1 || config.mid() < 1) {
        throw ContractError("count_params: channel counts must be positive");
    }
    const auto cin = config.in_channels;
    const auto mid = config.mid();
    const auto out = config.branch_out;
    ParamCountReport report;
    const std::int64_t identity = cin * mid + mid * out * 9;
    report.separable_total = identity;
    report.full_total = identity;
    for (auto m : strips) {
        BranchCount b;
        b.strip = m;
        b.separable = mid * mid * m + mid * out * m;
        b.full = mid * out * m * m;
        b.ratio = Ratio(b.separable, b.full);
        report.separable_total += cin * mid + b.separable;
        report.full_total += cin * mid + b.full;
        report.branches.push_back(b);
    }
    return report;
}

ParamCountReport count_block_params(std::span<const ModuleConfig> modules) {
    ParamCountReport total;
    for (const auto& cfg : modules) {
        auto r = count_params(cfg);
        if (total.branches.empty()) {
            total.branches = r.branches;
        } else {
            for (std::size_t k = 0; k < r.branches.size(); ++k) {
                total.branches[k].separable += r.branches[k].separable;
                total.branches[k].full += r.branches[k].full;
            }
        }
        total.separable_total += r.separable_total;
        total.full_total += r.full_total;
    }
    for (auto& b : total.branches) b.ratio = Ratio(b.separable, b.full);
    return total;
}

std::array<ModuleConfig, 4> reference_block() { return block_configs(64, 64); }

}  // namespace rmk::msk
