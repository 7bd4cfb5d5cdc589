#include "rmk/checks.hpp"

#include <array>
#include <iomanip>
#include <ostream>

#include "rmk/autograd.hpp"
#include "rmk/mdcaa.hpp"
#include "rmk/msk.hpp"
#include "rmk/network.hpp"
#include "rmk/random.hpp"

namespace rmk::checks {
namespace {

// Linear ops are exact under central differences at any step, so a wide
// step keeps rounding noise far below the bound.
constexpr double kLinearEps = 1e-3;

// Random projection of the output to a scalar, so every output element
// carries a distinct weight.
Var project(Var y, std::uint64_t seed) {
    Rng rng(seed);
    Tensor r = random_uniform(y.value().shape(), -1.0, 1.0, rng, DType::F64);
    return ag::sum(ag::mul(y, y.tape->constant(r)));
}

struct Case {
    std::string name;
    Shape shape;
    double lo, hi;
    bool linear;
    std::function<Var(Tape&, Var)> fn;
};

}  // namespace

std::vector<GradcheckRow> op_checks(const SuiteOptions& options) {
    Rng rng(options.seed);
    auto rand = [&](const Shape& s, double lo = -1.0, double hi = 1.0) {
        return random_uniform(s, lo, hi, rng, DType::F64);
    };
    const Tensor k33 = rand({3, 2, 3, 3});
    const Tensor kdw = rand({4, 1, 5, 3});
    const Tensor bias3 = rand({3});
    const Tensor x_in = rand({1, 2, 6, 7});
    const Tensor other = rand({1, 2, 5, 6});
    const Tensor mat = rand({4, 6});
    const Tensor vec = rand({6});
    const ops::Conv2dGeometry g33 = ops::same_padding(3, 3);
    const ops::Conv2dGeometry gdw{2, 1, 2, 1, 4};
    const ops::PoolGeometry pool{3, 3, 2, 2, 1, 1};

    std::vector<Case> cases = {
        {"conv2d.input", {1, 2, 6, 7}, -1, 1, true,
         [&](Tape& t, Var x) { return ag::conv2d(x, t.constant(k33), g33, t.constant(bias3)); }},
        {"conv2d.kernel", {3, 2, 3, 3}, -1, 1, true,
         [&](Tape& t, Var k) { return ag::conv2d(t.constant(x_in), k, g33); }},
        {"conv2d.bias", {3}, -1, 1, true,
         [&](Tape& t, Var b) { return ag::conv2d(t.constant(x_in), t.constant(k33), g33, b); }},
        {"conv2d.depthwise_strided", {1, 4, 9, 8}, -1, 1, true,
         [&](Tape& t, Var x) { return ag::conv2d(x, t.constant(kdw), gdw); }},
        {"rot90.ccw", {1, 2, 3, 5}, -1, 1, true, [](Tape&, Var x) { return ag::rot90(x, ops::Rotation::Ccw); }},
        {"rot90.cw", {1, 2, 3, 5}, -1, 1, true, [](Tape&, Var x) { return ag::rot90(x, ops::Rotation::Cw); }},
        {"avg_pool", {1, 2, 7, 6}, -1, 1, true, [&](Tape&, Var x) { return ag::avg_pool(x, pool); }},
        {"sigmoid", {1, 2, 4, 4}, -4, 4, false, [](Tape&, Var x) { return ag::sigmoid(x); }},
        {"concat_channels", {1, 2, 5, 6}, -1, 1, true,
         [&](Tape& t, Var x) {
             const std::array<Var, 3> parts{x, t.constant(other), x};
             return ag::concat_channels(parts);
         }},
        {"slice_channels", {1, 5, 3, 3}, -1, 1, true, [](Tape&, Var x) { return ag::slice_channels(x, 1, 3); }},
        {"add", {1, 2, 5, 6}, -1, 1, true, [&](Tape& t, Var x) { return ag::add(x, t.constant(other)); }},
        {"sub", {1, 2, 5, 6}, -1, 1, true, [&](Tape& t, Var x) { return ag::sub(t.constant(other), x); }},
        {"mul", {1, 2, 5, 6}, -1, 1, false, [&](Tape& t, Var x) { return ag::mul(x, ag::add(x, t.constant(other))); }},
        {"mul.scalar", {1}, -1, 1, false,
         [&](Tape& t, Var s) { return ag::mul(ag::mul(t.constant(other), s), s); }},
        {"affine", {2, 3}, -1, 1, true, [](Tape&, Var x) { return ag::affine(x, -1.75, 0.5); }},
        {"square", {2, 3}, -2, 2, false, [](Tape&, Var x) { return ag::square(x); }},
        {"sqrt", {2, 3}, 0.5, 2, false, [](Tape&, Var x) { return ag::sqrt(x); }},
        {"rsqrt", {2, 3}, 0.5, 2, false, [](Tape&, Var x) { return ag::rsqrt(x); }},
        {"smooth_l1", {4, 4}, -3, 3, false, [](Tape&, Var x) { return ag::smooth_l1(x, 1.0); }},
        {"sum", {2, 3}, -1, 1, true, [](Tape&, Var x) { return ag::sum(x); }},
        {"mean", {2, 3}, -1, 1, true, [](Tape&, Var x) { return ag::mean(x); }},
        {"matvec.matrix", {4, 6}, -1, 1, true, [&](Tape& t, Var w) { return ag::matvec(w, t.constant(vec)); }},
        {"matvec.vector", {6}, -1, 1, true, [&](Tape& t, Var x) { return ag::matvec(t.constant(mat), x); }},
        {"reshape", {2, 6}, -1, 1, true, [](Tape&, Var x) { return ag::reshape(x, {3, 4}); }},
    };

    std::vector<GradcheckRow> rows;
    std::uint64_t proj_seed = options.seed * 1000;
    for (const auto& c : cases) {
        const Tensor input = rand(c.shape, c.lo, c.hi);
        const std::uint64_t s = ++proj_seed;
        const auto r = gradcheck([&](Tape& t, Var x) { return project(c.fn(t, x), s); }, input,
                                 c.linear ? kLinearEps : options.eps);
        rows.push_back({c.name, r.max_relative_error, c.linear ? kLinearBound : kOpBound,
                        r.coordinates_checked});
    }
    return rows;
}

std::vector<GradcheckRow> block_checks(const SuiteOptions& options) {
    Rng rng(options.seed + 17);
    std::vector<GradcheckRow> rows;
    auto add_row = [&](const std::string& name, const ScalarFn& fn, const Tensor& input) {
        const auto r = gradcheck(fn, input, options.eps, options.max_coordinates);
        rows.push_back({name, r.max_relative_error, kBlockBound, r.coordinates_checked});
    };

    const msk::ModuleConfig plain{4, 3, 2, false};
    const msk::ModuleConfig down{4, 3, 2, true};
    const auto w_plain = msk::ModuleWeights::make(plain, Init::Random, rng, DType::F64);
    const auto w_down = msk::ModuleWeights::make(down, Init::Random, rng, DType::F64);
    const Tensor x = random_uniform({1, 4, 12, 12}, -1, 1, rng);
    add_row("msk.module", [&](Tape&, Var v) { return project(msk::module_forward(v, w_plain), 11); }, x);
    add_row("msk.module_downsample", [&](Tape&, Var v) { return project(msk::module_forward(v, w_down), 12); }, x);

    const auto w_att = mdcaa::Weights::make({3, 5, 3}, Init::Random, rng, DType::F64);
    const Tensor f = random_uniform({1, 3, 9, 7}, -1, 1, rng);
    add_row("mdcaa.main_diagonal",
            [&](Tape&, Var v) { return project(mdcaa::diagonal_branch(v, w_att, mdcaa::Diagonal::Main), 13); }, f);
    add_row("mdcaa.anti_diagonal",
            [&](Tape&, Var v) { return project(mdcaa::diagonal_branch(v, w_att, mdcaa::Diagonal::Anti), 14); }, f);
    add_row("mdcaa.apply", [&](Tape&, Var v) { return project(mdcaa::apply(v, w_att), 15); }, f);

    const auto bu = net::BottomUpWeights::make(2, Init::Random, rng, DType::F64);
    std::array<Tensor, 4> m;
    for (std::int64_t i = 0; i < 4; ++i) m[i] = random_uniform({1, 2, 16 >> i, 16 >> i}, -1, 1, rng);
    add_row("bottom_up",
            [&](Tape& t, Var m1) {
                const std::array<Var, 4> ms{m1, t.constant(m[1]), t.constant(m[2]), t.constant(m[3])};
                return project(net::bottom_up(std::span<const Var, 4>(ms), bu)[2], 16);
            },
            m[0]);
    return rows;
}

GradcheckRow assembly_check(const SuiteOptions& options) {
    Rng rng(options.seed + 29);
    const net::NetworkConfig config;
    const auto w = net::NetworkWeights::make(config, Init::Random, rng, DType::F64);
    const Tensor image = random_uniform({1, config.image_channels, options.image_size, options.image_size},
                                        0.0, 1.0, rng);
    const auto r = gradcheck(
        [&](Tape&, Var v) {
            const auto p = net::assemble(v, w);
            Var total = ag::sum(p.logits[0]);
            for (std::size_t i = 0; i < 3; ++i) {
                if (i > 0) total = ag::add(total, ag::sum(p.logits[i]));
                total = ag::add(total, ag::sum(p.boxes[i]));
            }
            return total;
        },
        image, options.eps, options.assembly_coordinates);
    return {"assembly", r.max_relative_error, kAssemblyBound, r.coordinates_checked};
}

std::vector<GradcheckRow> run_suite(const SuiteOptions& options) {
    auto rows = op_checks(options);
    auto blocks = block_checks(options);
    rows.insert(rows.end(), blocks.begin(), blocks.end());
    rows.push_back(assembly_check(options));
    return rows;
}

void print_table(std::ostream& os, const std::vector<GradcheckRow>& rows) {
    const auto flags = os.flags();
    os << std::left << std::setw(28) << "check" << std::setw(14) << "max_rel_err" << std::setw(10) << "bound"
       << std::setw(8) << "coords" << "status\n";
    for (const auto& r : rows) {
        os << std::left << std::setw(28) << r.name << std::scientific << std::setprecision(3) << std::setw(14)
           << r.error << std::setprecision(0) << std::setw(10) << r.bound << std::defaultfloat << std::setw(8)
           << r.coordinates << (r.pass() ? "ok" : "FAIL") << '\n';
    }
    os.flags(flags);
}

}  // namespace rmk::checks
