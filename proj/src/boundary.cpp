#include "rmk/boundary.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>

#include "rmk/autograd.hpp"
#include "rmk/eaem.hpp"
#include "rmk/random.hpp"

namespace rmk::boundary {

const char* method_name(Method m) { return m == Method::EaemChord ? "eaem_chord" : "direct_smoothl1"; }

double smooth_l1(double x, double beta) {
    const double a = std::abs(x);
    return a < beta ? 0.5 * x * x / beta : a - 0.5 * beta;
}

std::vector<double> loss_landscape(Method method, double target, double omega, std::int64_t samples) {
    if (samples < 16) throw ContractError("loss_landscape: need at least 16 samples");
    const double period = eaem::period(omega);
    const eaem::AngleCode t = eaem::encode(eaem::wrap(target, omega), omega);
    std::vector<double> trace(static_cast<std::size_t>(samples));
    for (std::int64_t i = 0; i < samples; ++i) {
        const double theta = period * static_cast<double>(i) / static_cast<double>(samples);
        trace[static_cast<std::size_t>(i)] = method == Method::EaemChord
                                                 ? eaem::code_distance(eaem::encode(theta, omega), t)
                                                 : smooth_l1(theta - target);
    }
    return trace;
}

std::int64_t count_jumps(const std::vector<double>& trace, double threshold) {
    std::int64_t jumps = 0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const double next = trace[(i + 1) % trace.size()];
        if (std::abs(next - trace[i]) > threshold) ++jumps;
    }
    return jumps;
}

double angular_error(double a, double b, double omega) {
    const double d = eaem::wrap(a - b, omega);
    return std::min(d, eaem::period(omega) - d);
}

void ExperimentConfig::validate() const {
    eaem::check_omega(omega);
    if (!(delta > 0.0) || delta >= eaem::period(omega) / 2) {
        throw ContractError("boundary: delta must lie in (0, period/2)");
    }
    if (dataset_size < 2) throw ContractError("boundary: dataset_size must be >= 2");
    if (steps < 0) throw ContractError("boundary: steps must be >= 0");
    if (!(lr > 0.0)) throw ContractError("boundary: lr must be positive");
    if (landscape_samples < 16) throw ContractError("boundary: landscape_samples must be >= 16");
}

std::vector<double> boundary_dataset(const ExperimentConfig& config) {
    config.validate();
    Rng rng(config.seed);
    const double period = eaem::period(config.omega);
    std::vector<double> targets;
    for (std::int64_t i = 0; i < config.dataset_size; ++i) {
        // The upper band is half-open; uniform() < 1 keeps it below the period.
        targets.push_back(i % 2 == 0 ? config.delta * rng.uniform()
                                     : period - config.delta + config.delta * rng.uniform());
    }
    return targets;
}

double initial_angle(const ExperimentConfig& config) {
    // Drawn from a stream separate from the dataset's.
    Rng rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
    return rng.uniform(0.0, eaem::period(config.omega));
}

namespace {

double mean_error(double theta, const std::vector<double>& targets, double omega) {
    double s = 0.0;
    for (double t : targets) s += angular_error(theta, t, omega);
    return s / static_cast<double>(targets.size());
}

// Mean squared chord distance from normalize(p) to each target code.
Var eaem_loss(Var p, const Tensor& codes, const Tensor& repeat, const Tensor& pair_sum) {
    Tape& tape = *p.tape;
    Var inv_norm = ag::rsqrt(ag::sum(ag::square(p)));
    Var u = ag::mul(p, inv_norm);
    Var diff = ag::sub(ag::matvec(tape.constant(repeat), u), tape.constant(codes));
    Var dist2 = ag::matvec(tape.constant(pair_sum), ag::square(diff));
    return ag::mean(dist2);
}

Var direct_loss(Var theta, const Tensor& targets, const Tensor& ones) {
    Tape& tape = *theta.tape;
    Var pred = ag::matvec(tape.constant(ones), theta);
    return ag::mean(ag::smooth_l1(ag::sub(pred, tape.constant(targets)), kSmoothL1Beta));
}

}  // namespace

MethodResult run_regression(Method method, const std::vector<double>& targets,
                            const ExperimentConfig& config) {
    config.validate();
    const auto n = static_cast<std::int64_t>(targets.size());
    if (n < 1) throw ContractError("run_regression: empty dataset");
    const double omega = config.omega;
    const double theta0 = initial_angle(config);

    MethodResult r;
    r.method = method;
    r.initial_error = mean_error(theta0, targets, omega);
    for (double t : targets) {
        r.landscape_jumps +=
            count_jumps(loss_landscape(method, t, omega, config.landscape_samples), config.jump_threshold);
    }

    std::vector<double> codes(static_cast<std::size_t>(2 * n)), repeat(static_cast<std::size_t>(4 * n), 0.0),
        pair_sum(static_cast<std::size_t>(2 * n * n), 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
        const auto c = eaem::encode(eaem::wrap(targets[i], omega), omega);
        codes[2 * i] = c.x;
        codes[2 * i + 1] = c.y;
        repeat[(2 * i) * 2 + 0] = 1.0;
        repeat[(2 * i + 1) * 2 + 1] = 1.0;
        pair_sum[i * 2 * n + 2 * i] = 1.0;
        pair_sum[i * 2 * n + 2 * i + 1] = 1.0;
    }
    const Tensor code_t = Tensor::from_vector<double>({2 * n}, codes);
    const Tensor repeat_t = Tensor::from_vector<double>({2 * n, 2}, repeat);
    const Tensor pair_sum_t = Tensor::from_vector<double>({n, 2 * n}, pair_sum);
    const Tensor target_t = Tensor::from_vector<double>({n}, targets);
    const Tensor ones_t = Tensor::full({n, 1}, 1.0, DType::F64);

    Tensor param = method == Method::EaemChord
                       ? Tensor::from_vector<double>({2}, {std::cos(omega * theta0), std::sin(omega * theta0)})
                       : Tensor::from_vector<double>({1}, {theta0});
    auto angle_of = [&](const Tensor& p) {
        if (method == Method::DirectSmoothL1) return eaem::wrap(p.item(0), omega);
        return eaem::decode(eaem::normalize(p.item(0), p.item(1), omega));
    };

    r.final_angle = theta0;
    r.final_error = r.initial_error;
    try {
        for (std::int64_t step = 0; step <= config.steps; ++step) {
            Tape tape;
            Var p = tape.leaf(param);
            Var loss = method == Method::EaemChord ? eaem_loss(p, code_t, repeat_t, pair_sum_t)
                                                   : direct_loss(p, target_t, ones_t);
            const double value = loss.value().scalar();
            r.loss_trace.push_back(value);
            if (!std::isfinite(value)) throw NumericError("non-finite loss");
            if (step == config.steps) break;
            const Tensor grad = tape.backward(loss)[p];
            param = ops::sub(param, ops::affine(grad, config.lr));
        }
        r.final_angle = angle_of(param);
        r.final_error = mean_error(r.final_angle, targets, omega);
    } catch (const NumericError&) {
        r.status = Status::Diverged;
        r.final_error = std::numeric_limits<double>::quiet_NaN();
    } catch (const DegenerateInputError&) {
        r.status = Status::Diverged;
        r.final_error = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    ExperimentReport report;
    report.config = config;
    report.targets = boundary_dataset(config);
    report.eaem = run_regression(Method::EaemChord, report.targets, config);
    report.direct = run_regression(Method::DirectSmoothL1, report.targets, config);
    return report;
}

void write_report(std::ostream& os, const ExperimentReport& report) {
    const auto& c = report.config;
    const auto flags = os.flags();
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << "seed = " << c.seed << '\n'
       << "omega = " << c.omega << '\n'
       << "delta = " << c.delta << '\n'
       << "dataset_size = " << c.dataset_size << '\n'
       << "steps = " << c.steps << '\n'
       << "lr = " << c.lr << '\n'
       << "landscape_samples = " << c.landscape_samples << '\n'
       << "jump_threshold = " << c.jump_threshold << '\n'
       << "initial_angle = " << initial_angle(c) << '\n';
    for (const MethodResult* m : {&report.eaem, &report.direct}) {
        const std::string k = method_name(m->method);
        os << k << ".status = " << (m->status == Status::Ok ? "ok" : "diverged") << '\n'
           << k << ".initial_error = " << m->initial_error << '\n'
           << k << ".final_error = " << m->final_error << '\n'
           << k << ".final_angle = " << m->final_angle << '\n'
           << k << ".final_loss = " << (m->loss_trace.empty() ? 0.0 : m->loss_trace.back()) << '\n'
           << k << ".landscape_jumps = " << m->landscape_jumps << '\n';
    }
    os << "eaem_better = "
       << (report.eaem.final_error < report.direct.final_error ? "true" : "false") << '\n';
    os.flags(flags);
}

void write_traces_csv(const std::filesystem::path& path, const ExperimentReport& report) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << "step,eaem_loss,direct_loss\n";
    const auto n = std::max(report.eaem.loss_trace.size(), report.direct.loss_trace.size());
    for (std::size_t i = 0; i < n; ++i) {
        os << i << ',';
        if (i < report.eaem.loss_trace.size()) os << report.eaem.loss_trace[i];
        os << ',';
        if (i < report.direct.loss_trace.size()) os << report.direct.loss_trace[i];
        os << '\n';
    }
}

}  // namespace rmk::boundary
