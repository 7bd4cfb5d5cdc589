#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

// Finite-difference gradient checks over every differentiable op and the
// composite blocks, all in 64-bit.
namespace rmk::checks {

struct GradcheckRow {
    std::string name;
    double error = 0.0;
    double bound = 0.0;
    std::int64_t coordinates = 0;
    bool pass() const { return error <= bound; }
};

struct SuiteOptions {
    std::uint64_t seed = 1;
    double eps = 1e-6;                 // nonlinear ops and blocks
    std::int64_t image_size = 64;      // assembly input extent
    std::int64_t max_coordinates = 0;  // per op and block; 0 = every coordinate
    /// Evenly strided subset of the 3 x size x size image for the assembly.
    std::int64_t assembly_coordinates = 1024;
};

inline constexpr double kLinearBound = 1e-10;
inline constexpr double kOpBound = 1e-6;
inline constexpr double kBlockBound = 1e-5;
inline constexpr double kAssemblyBound = 1e-4;

std::vector<GradcheckRow> op_checks(const SuiteOptions& options);
std::vector<GradcheckRow> block_checks(const SuiteOptions& options);
GradcheckRow assembly_check(const SuiteOptions& options);

std::vector<GradcheckRow> run_suite(const SuiteOptions& options);

void print_table(std::ostream& os, const std::vector<GradcheckRow>& rows);

}  // namespace rmk::checks
