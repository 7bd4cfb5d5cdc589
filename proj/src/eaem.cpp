#include "rmk/eaem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rmk/errors.hpp"

namespace rmk::eaem {
namespace {

// Largest double strictly below 2*pi; keeps rounded results inside [0, 2*pi).
const double kArgUpper = std::nextafter(kTwoPi, 0.0);

}  // namespace

void check_omega(double omega) {
    if (!(omega > 0.0 && omega <= 2.0)) {
        throw ContractError("angular frequency must lie in (0, 2], got " + std::to_string(omega));
    }
}

double period(double omega) {
    check_omega(omega);
    return kTwoPi / omega;
}

AngleCode encode(double theta, double omega) {
    const double p = period(omega);
    if (!(theta >= 0.0 && theta < p)) {
        throw ContractError("encode: theta " + std::to_string(theta) + " outside [0, " +
                            std::to_string(p) + ")");
    }
    return {std::cos(omega * theta), std::sin(omega * theta), omega};
}

AngleCode normalize(double x, double y, double omega) {
    check_omega(omega);
    const double norm = std::hypot(x, y);
    if (!(norm > kDegenerateNorm)) {
        throw DegenerateInputError("normalize: vector norm " + std::to_string(norm) +
                                   " is too small to define an angle");
    }
    return {x / norm, y / norm, omega};
}

double arg_unit(double x, double y) {
    if (std::abs(x) <= kAxisTolerance && y == 0.0) {
        throw DegenerateInputError("arg_unit: undefined at the origin");
    }
    if (std::abs(x * x + y * y - 1.0) > 1e-6) {
        throw ContractError("arg_unit: (" + std::to_string(x) + ", " + std::to_string(y) +
                            ") is not on the unit circle");
    }
    double a;
    if (std::abs(x) <= kAxisTolerance) {
        a = y > 0.0 ? std::numbers::pi / 2.0 : 3.0 * std::numbers::pi / 2.0;
    } else if (x > 0.0 && y >= 0.0) {
        a = std::atan(y / x);
    } else if (x > 0.0) {
        a = std::atan(y / x) + kTwoPi;
    } else {
        a = std::atan(y / x) + std::numbers::pi;
    }
    return std::min(a, kArgUpper);
}

double decode(const AngleCode& code) {
    check_omega(code.omega);
    return arg_unit(code.x, code.y) / code.omega;
}

double code_distance(const AngleCode& a, const AngleCode& b) {
    if (a.omega != b.omega) {
        throw ContractError("code_distance: omega mismatch (" + std::to_string(a.omega) + " vs " +
                            std::to_string(b.omega) + ")");
    }
    return std::hypot(a.x - b.x, a.y - b.y);
}

std::array<double, 2> encode_jacobian(double theta, double omega) {
    check_omega(omega);
    return {-omega * std::sin(omega * theta), omega * std::cos(omega * theta)};
}

double wrap(double theta, double omega) {
    const double p = period(omega);
    double t = std::fmod(theta, p);
    if (t < 0.0) t += p;
    if (t >= p) t = 0.0;
    return t;
}

}  // namespace rmk::eaem
