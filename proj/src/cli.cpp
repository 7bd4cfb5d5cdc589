#include "rmk/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>

#include "rmk/boundary.hpp"
#include "rmk/checks.hpp"
#include "rmk/config.hpp"
#include "rmk/eaem.hpp"
#include "rmk/evaluation.hpp"
#include "rmk/io.hpp"
#include "rmk/msk.hpp"
#include "rmk/network.hpp"
#include "rmk/random.hpp"
#include "rmk/scene.hpp"

namespace rmk::cli {
namespace {

// Raised for bad user input discovered after argument parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string dtype = "f32";
};

struct Context {
    config::Config cfg;
    std::uint64_t seed = 0;
    DType dtype = DType::F32;
    std::filesystem::path out;
};

Context make_context(const Globals& g) {
    Context ctx;
    ctx.cfg = g.config_path.empty() ? config::Config{} : config::load(g.config_path);
    ctx.seed = g.seed.value_or(ctx.cfg.data.seed);
    ctx.dtype = g.dtype == "f64" ? DType::F64 : DType::F32;
    ctx.out = g.out.empty() ? ctx.cfg.out_dir : std::filesystem::path(g.out);
    return ctx;
}

void print_full(std::ostream& os, double v) {
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    os.precision(prec);
    os.flags(flags);
}

// ---- param-count ----

int cmd_param_count(const Context& ctx, std::optional<std::int64_t> channels, std::ostream& out) {
    const std::int64_t c = channels.value_or(ctx.cfg.audit.channels);
    if (c < 1) throw UsageError("--channels must be >= 1");
    const msk::ModuleConfig module{c, c, c, false};
    const auto report = msk::count_params(module);
    out << "channels = " << c << '\n';
    out << std::left << std::setw(4) << "m" << std::setw(14) << "separable" << std::setw(14) << "full"
        << "ratio\n";
    for (const auto& b : report.branches) {
        out << std::left << std::setw(4) << b.strip << std::setw(14) << b.separable << std::setw(14) << b.full
            << b.ratio << '\n';
    }
    out << "ratios:";
    for (const auto& b : report.branches) out << ' ' << b.ratio;
    out << '\n';
    out << "module.separable = " << report.separable_total << '\n'
        << "module.full = " << report.full_total << '\n'
        << "module.delta = " << report.delta() << '\n';
    const auto block = msk::count_block_params(msk::block_configs(c, c));
    out << "block.separable = " << block.separable_total << '\n'
        << "block.full = " << block.full_total << '\n'
        << "block.delta = " << block.delta() << '\n';
    return kSuccess;
}

// ---- forward ----

Tensor load_image(const std::filesystem::path& path, std::int64_t channels) {
    Tensor image;
    if (path.extension() == ".pgm") {
        const Tensor gray = io::read_pgm(path);
        std::vector<Tensor> parts(static_cast<std::size_t>(channels), gray);
        image = ops::concat_channels(parts);
    } else {
        image = io::load_rmkt(path);
    }
    if (image.ndim() != 4) {
        throw UsageError("image tensor must be 4-D (N, C, H, W), got " + shape_string(image.shape()));
    }
    return image;
}

int cmd_forward(const Context& ctx, const std::string& image_path, const std::string& init_name,
                std::ostream& out) {
    const auto& net_cfg = ctx.cfg.network;
    Tensor image = image_path.empty()
                       ? Tensor::zeros({1, net_cfg.image_channels, ctx.cfg.data.height, ctx.cfg.data.width})
                       : load_image(image_path, net_cfg.image_channels);
    image = image.to(ctx.dtype);
    try {
        net::check_image(image, net_cfg);
    } catch (const ShapeError& e) {
        throw UsageError(e.what());
    }
    Rng rng(ctx.seed);
    const Init init = init_name == "zero" ? Init::Zero : Init::Random;
    const auto weights = net::NetworkWeights::make(net_cfg, init, rng, ctx.dtype);
    const auto pyramid = net::assemble(image, weights);
    const auto named = net::named_intermediates(pyramid);
    io::save_bundle(ctx.out, named);
    for (const auto& e : named.entries()) {
        out << std::left << std::setw(10) << e.name << shape_string(e.tensor.shape()) << '\n';
    }
    out << "wrote " << named.size() << " tensors to " << ctx.out.string() << '\n';
    return kSuccess;
}

// ---- gradcheck ----

int cmd_gradcheck(const Context& ctx, std::ostream& out) {
    const auto& g = ctx.cfg.gradcheck;
    checks::SuiteOptions opts;
    opts.seed = ctx.seed;
    opts.eps = g.eps;
    opts.image_size = g.image_size;
    opts.max_coordinates = g.max_coordinates;
    opts.assembly_coordinates = g.assembly_coordinates;
    const auto rows = checks::run_suite(opts);
    checks::print_table(out, rows);
    const bool ok = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.pass(); });
    out << "result = " << (ok ? "pass" : "fail") << '\n';
    return ok ? kSuccess : kCheckFailure;
}

// ---- angle-codec ----

struct CodecArgs {
    std::optional<double> omega;
    std::optional<double> theta;
    std::optional<double> x, y;
    std::string in, out;
    std::int64_t samples = 1000000;
};

void print_roundtrip_stats(std::ostream& out, const std::vector<double>& errors) {
    double max = 0.0, sum = 0.0;
    for (double e : errors) {
        max = std::max(max, e);
        sum += e;
    }
    out << "roundtrip.samples = " << errors.size() << '\n';
    out << "roundtrip.max_abs_error = ";
    print_full(out, max);
    out << "\nroundtrip.mean_abs_error = ";
    print_full(out, errors.empty() ? 0.0 : sum / static_cast<double>(errors.size()));
    out << '\n';
}

int cmd_codec_encode(const Context& ctx, const CodecArgs& a, std::ostream& out) {
    const double omega = a.omega.value_or(ctx.cfg.network.omega);
    if (a.theta) {
        const auto code = eaem::encode(*a.theta, omega);
        out << "x = ";
        print_full(out, code.x);
        out << "\ny = ";
        print_full(out, code.y);
        out << "\nomega = " << omega << '\n';
        return kSuccess;
    }
    if (a.in.empty() || a.out.empty()) throw UsageError("encode needs --theta, or --in and --out tensors");
    const Tensor angles = io::load_rmkt(a.in);
    Shape shape = angles.shape();
    shape.push_back(2);
    std::vector<double> codes;
    std::vector<double> errors;
    for (double theta : angles.to_doubles()) {
        const auto c = eaem::encode(theta, omega);
        codes.push_back(c.x);
        codes.push_back(c.y);
        errors.push_back(std::abs(eaem::decode(c) - theta));
    }
    io::save_rmkt(a.out, Tensor::from_values(shape, codes, angles.dtype()));
    print_roundtrip_stats(out, errors);
    return kSuccess;
}

int cmd_codec_decode(const Context& ctx, const CodecArgs& a, std::ostream& out) {
    const double omega = a.omega.value_or(ctx.cfg.network.omega);
    if (a.x && a.y) {
        out << "theta = ";
        print_full(out, eaem::decode(eaem::normalize(*a.x, *a.y, omega)));
        out << '\n';
        return kSuccess;
    }
    if (a.in.empty() || a.out.empty()) throw UsageError("decode needs --x and --y, or --in and --out tensors");
    const Tensor codes = io::load_rmkt(a.in);
    if (codes.shape().back() != 2) {
        throw UsageError("code tensor must end in an axis of extent 2, got " + shape_string(codes.shape()));
    }
    Shape shape = codes.shape();
    shape.pop_back();
    if (shape.empty()) shape.push_back(1);
    const auto v = codes.to_doubles();
    std::vector<double> angles;
    for (std::size_t i = 0; i + 1 < v.size(); i += 2) {
        angles.push_back(eaem::decode(eaem::normalize(v[i], v[i + 1], omega)));
    }
    io::save_rmkt(a.out, Tensor::from_values(shape, angles, codes.dtype()));
    out << "decoded = " << angles.size() << '\n';
    return kSuccess;
}

int cmd_codec_roundtrip(const Context& ctx, const CodecArgs& a, std::ostream& out) {
    const double omega = a.omega.value_or(ctx.cfg.network.omega);
    eaem::check_omega(omega);
    if (a.samples < 1) throw UsageError("--samples must be >= 1");
    Rng rng(ctx.seed);
    std::vector<double> errors;
    errors.reserve(static_cast<std::size_t>(a.samples));
    const double period = eaem::period(omega);
    for (std::int64_t i = 0; i < a.samples; ++i) {
        const double theta = rng.uniform(0.0, period);
        errors.push_back(std::abs(eaem::decode(eaem::encode(theta, omega)) - theta));
    }
    out << "omega = " << omega << '\n';
    print_roundtrip_stats(out, errors);
    return kSuccess;
}

// ---- boundary-exp ----

int cmd_boundary(const Context& ctx, bool seed_given, bool write_files, std::ostream& out) {
    auto bcfg = ctx.cfg.boundary;
    if (seed_given) bcfg.seed = ctx.seed;
    const auto report = boundary::run_experiment(bcfg);
    boundary::write_report(out, report);
    if (write_files) {
        std::filesystem::create_directories(ctx.out);
        std::ofstream os(ctx.out / "boundary_report.txt");
        boundary::write_report(os, report);
        boundary::write_traces_csv(ctx.out / "boundary_traces.csv", report);
    }
    const bool ok = report.eaem.status == boundary::Status::Ok && report.direct.status == boundary::Status::Ok;
    return ok ? kSuccess : kCheckFailure;
}

// ---- eval / gen-data ----

scene::Scene make_scene(const Context& ctx, std::int64_t index) {
    return scene::gen_scene(ctx.seed + static_cast<std::uint64_t>(index), ctx.cfg.data.scene,
                            {ctx.cfg.data.height, ctx.cfg.data.width});
}

int cmd_eval(const Context& ctx, const std::string& mode_override, std::ostream& out) {
    config::EvalMode mode = ctx.cfg.eval.mode;
    if (mode_override == "oracle") mode = config::EvalMode::Oracle;
    if (mode_override == "empty") mode = config::EvalMode::Empty;
    if (mode_override == "network") mode = config::EvalMode::Network;

    std::optional<net::NetworkWeights> weights;
    if (mode == config::EvalMode::Network) {
        Rng rng(ctx.seed);
        weights = net::NetworkWeights::make(ctx.cfg.network, Init::Random, rng, ctx.dtype);
    }
    std::vector<std::vector<geom::OrientedBox>> preds, truth;
    for (std::int64_t i = 0; i < ctx.cfg.data.images; ++i) {
        auto s = make_scene(ctx, i);
        switch (mode) {
            case config::EvalMode::Oracle: preds.push_back(s.truth); break;
            case config::EvalMode::Empty: preds.emplace_back(); break;
            case config::EvalMode::Network: {
                try {
                    net::check_image(s.image, ctx.cfg.network);
                } catch (const ShapeError& e) {
                    throw UsageError(e.what());
                }
                const auto p = net::assemble(s.image.to(ctx.dtype), *weights);
                preds.push_back(net::decode_detections(p, ctx.cfg.network, ctx.cfg.eval.decode));
                break;
            }
        }
        truth.push_back(std::move(s.truth));
    }
    const auto result = eval::eval_map(preds, truth, ctx.cfg.eval.options);
    out << "mode = " << config::eval_mode_name(mode) << '\n'
        << "images = " << ctx.cfg.data.images << '\n'
        << "seed = " << ctx.seed << '\n'
        << "iou_threshold = ";
    if (ctx.cfg.eval.options.coco_sweep) {
        out << "0.50:0.05:0.95";
    } else {
        out << ctx.cfg.eval.options.iou_threshold;
    }
    out << '\n';
    for (const auto& c : result.per_class) {
        out << "class " << c.class_id << ": ap = ";
        print_full(out, c.ap);
        out << " truths = " << c.truths << " predictions = " << c.predictions << '\n';
    }
    out << "mAP = ";
    print_full(out, result.map);
    out << '\n';
    return kSuccess;
}

int cmd_gen_data(const Context& ctx, std::ostream& out) {
    std::filesystem::create_directories(ctx.out);
    for (std::int64_t i = 0; i < ctx.cfg.data.images; ++i) {
        const auto s = make_scene(ctx, i);
        std::ostringstream stem;
        stem << "scene_" << std::setw(4) << std::setfill('0') << i;
        io::save_rmkt(ctx.out / (stem.str() + ".rmkt"), s.image);
        io::write_pgm(ctx.out / (stem.str() + ".pgm"), s.image);
        scene::write_annotations(ctx.out / (stem.str() + ".txt"), s.truth);
        out << stem.str() << ' ' << s.truth.size() << " objects\n";
    }
    return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Oriented detection building blocks: audits, forward dumps, gradient checks, "
                 "angle codec, boundary experiment and synthetic evaluation"};
    app.name("rmk");
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config_path, "INI configuration file");
    app.add_option("--seed", g.seed, "Seed for weights, scenes and sampling");
    app.add_option("--out", g.out, "Output directory (or file for angle-codec)");
    app.add_option("--dtype", g.dtype, "Tensor precision")->check(CLI::IsMember({"f32", "f64"}));

    std::optional<std::int64_t> channels;
    auto* param = app.add_subcommand("param-count", "Separable vs full kernel parameter audit");
    param->add_option("--channels", channels, "Module width (overrides audit.channels)");

    std::string image_path, init_name = "random";
    auto* forward = app.add_subcommand("forward", "Run the network and dump every intermediate");
    forward->add_option("--image", image_path, "Input image (.rmkt or .pgm); zero image if omitted");
    forward->add_option("--weights", init_name, "Weight initialisation")
        ->check(CLI::IsMember({"random", "zero"}));

    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient checks");

    CodecArgs codec;
    auto* angle = app.add_subcommand("angle-codec", "Euler angle codec tools");
    angle->require_subcommand(1);
    auto* enc = angle->add_subcommand("encode", "Angle(s) to (x, y)");
    enc->add_option("--theta", codec.theta, "Angle in radians");
    enc->add_option("--in", codec.in, "RMKT tensor of angles");
    enc->add_option("--omega", codec.omega, "Angular frequency");
    auto* dec = angle->add_subcommand("decode", "(x, y) to angle(s)");
    dec->add_option("--x", codec.x);
    dec->add_option("--y", codec.y);
    dec->add_option("--in", codec.in, "RMKT tensor whose last axis holds (x, y)");
    dec->add_option("--omega", codec.omega, "Angular frequency");
    auto* rt = angle->add_subcommand("roundtrip", "Round-trip error over random angles");
    rt->add_option("--samples", codec.samples, "Number of angles");
    rt->add_option("--omega", codec.omega, "Angular frequency");
    for (auto* sub : {enc, dec, rt}) sub->fallthrough();

    bool write_files = false;
    auto* bexp = app.add_subcommand("boundary-exp", "Angle regression across the period boundary");
    bexp->add_flag("--write", write_files, "Also write report and CSV traces into --out");

    std::string mode;
    auto* evalc = app.add_subcommand("eval", "Synthetic-scene mAP");
    evalc->add_option("--mode", mode, "Prediction source")->check(CLI::IsMember({"network", "oracle", "empty"}));

    auto* gen = app.add_subcommand("gen-data", "Write synthetic scenes and annotations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsageError;
    }

    try {
        Context ctx = make_context(g);
        if (angle->parsed() && !g.out.empty()) codec.out = g.out;
        if (param->parsed()) return cmd_param_count(ctx, channels, out);
        if (forward->parsed()) return cmd_forward(ctx, image_path, init_name, out);
        if (gradcheck->parsed()) return cmd_gradcheck(ctx, out);
        if (enc->parsed()) return cmd_codec_encode(ctx, codec, out);
        if (dec->parsed()) return cmd_codec_decode(ctx, codec, out);
        if (rt->parsed()) return cmd_codec_roundtrip(ctx, codec, out);
        if (bexp->parsed()) return cmd_boundary(ctx, g.seed.has_value(), write_files, out);
        if (evalc->parsed()) return cmd_eval(ctx, mode, out);
        if (gen->parsed()) return cmd_gen_data(ctx, out);
    } catch (const config::ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kUsageError;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const scene::GenerationError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const io::FormatError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const ContractError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const DegenerateInputError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << '\n';
        return kCheckFailure;
    }
    return kUsageError;
}

}  // namespace rmk::cli
