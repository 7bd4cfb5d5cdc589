#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

// Toy comparison of angle regression through the Euler angle code against
// direct Smooth-L1 regression of the raw angle, on targets that straddle the
// period boundary.
namespace rmk::boundary {

enum class Method { DirectSmoothL1, EaemChord };

const char* method_name(Method m);

inline constexpr double kSmoothL1Beta = 1.0;
inline constexpr double kJumpThreshold = 0.5;

double smooth_l1(double x, double beta = kSmoothL1Beta);

/// Loss against `target` with the prediction swept over samples equally
/// spaced angles i * period / samples. Requires samples >= 16.
std::vector<double> loss_landscape(Method method, double target, double omega, std::int64_t samples);

/// Adjacent pairs whose loss differs by more than `threshold`. Adjacency is
/// cyclic: the last sample neighbours the first across the wrap point.
std::int64_t count_jumps(const std::vector<double>& trace, double threshold = kJumpThreshold);

/// Circular distance min(|d|, P - |d|) with d the wrapped difference.
double angular_error(double a, double b, double omega);

struct ExperimentConfig {
    double omega = 1.0;
    double delta = 0.05;
    std::int64_t dataset_size = 64;
    std::int64_t steps = 500;
    double lr = 0.1;
    std::uint64_t seed = 7;
    std::int64_t landscape_samples = 4096;
    double jump_threshold = kJumpThreshold;

    void validate() const;
};

/// Targets split evenly between [0, delta] and [P - delta, P).
std::vector<double> boundary_dataset(const ExperimentConfig& config);

/// Starting angle shared by both methods.
double initial_angle(const ExperimentConfig& config);

enum class Status { Ok, Diverged };

struct MethodResult {
    Method method = Method::EaemChord;
    Status status = Status::Ok;
    double initial_error = 0.0;  // mean angular error before training
    double final_error = 0.0;
    double final_angle = 0.0;
    std::vector<double> loss_trace;  // loss before each step, then the final loss
    std::int64_t landscape_jumps = 0;  // summed over the dataset targets
};

/// Full-batch gradient descent through the tape. The code predictor trains a
/// raw 2-vector that is normalized onto the unit circle and scored by the
/// mean squared chord distance to the target codes (2 - 2cos of the angle
/// gap); the direct predictor trains the raw angle under mean Smooth-L1. NaN losses stop the run with Diverged.
MethodResult run_regression(Method method, const std::vector<double>& targets,
                            const ExperimentConfig& config);

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<double> targets;
    MethodResult eaem;
    MethodResult direct;
};

ExperimentReport run_experiment(const ExperimentConfig& config);

/// key = value lines.
void write_report(std::ostream& os, const ExperimentReport& report);
/// "step,eaem_loss,direct_loss" rows.
void write_traces_csv(const std::filesystem::path& path, const ExperimentReport& report);

}  // namespace rmk::boundary
