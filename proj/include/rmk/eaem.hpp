#pragma once

#include <array>
#include <numbers>

// Euler angle codec: theta <-> (cos(omega*theta), sin(omega*theta)) on the
// unit circle, with a piecewise inverse over [0, 2*pi).
namespace rmk::eaem {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
/// |x| at or below this counts as x = 0 in arg_unit.
inline constexpr double kAxisTolerance = 1e-12;
/// Raw vectors shorter than this cannot be normalized.
inline constexpr double kDegenerateNorm = 1e-12;

struct AngleCode {
    double x = 1.0;
    double y = 0.0;
    double omega = 1.0;
};

/// Throws ContractError unless 0 < omega <= 2.
void check_omega(double omega);

/// Length of the decodable angle period, 2*pi/omega.
double period(double omega);

/// Requires theta in [0, 2*pi/omega).
AngleCode encode(double theta, double omega = 1.0);

/// Projects a raw 2-vector onto the unit circle.
AngleCode normalize(double x, double y, double omega = 1.0);

/// Six-case argument in [0, 2*pi). The origin is a DegenerateInputError;
/// points off the unit circle by more than 1e-6 are a ContractError.
double arg_unit(double x, double y);

/// theta = arg_unit(x, y) / omega.
double decode(const AngleCode& code);

/// Euclidean (chord) distance between two codes of equal omega; equals
/// 2|sin(omega * (theta_a - theta_b) / 2)|.
double code_distance(const AngleCode& a, const AngleCode& b);

/// d(x, y)/d(theta) = (-omega sin(omega theta), omega cos(omega theta)).
std::array<double, 2> encode_jacobian(double theta, double omega = 1.0);

/// Wraps any angle into [0, 2*pi/omega).
double wrap(double theta, double omega = 1.0);

}  // namespace rmk::eaem
