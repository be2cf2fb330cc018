#pragma once

// Test-only oracles, kept independent of the library's evaluation paths:
// frozen high-precision constants, textbook closed forms, and symbolic
// derivatives for the rational test maps.

#include "kobdyn/cvec.hpp"

#include <cmath>

namespace oracles {

using kobdyn::Cx;

// Frozen reference values (30-digit arithmetic, rounded to double).
constexpr double kAtanhHalf = 0.549306144334054845697622618461;
constexpr double kLog2 = 0.693147180559945309417232121458;
constexpr double kHalfLogThird = -0.549306144334054845697622618461;
constexpr double kHalfLogInv019 = 0.830365603410825454013477738741;
constexpr double kTanhHalf = 0.462117157260009758502318483644;
constexpr double kAtanh09 = 1.47221948958322023000451371594;
constexpr double kLog10 = 2.30258509299404568401799145468;
constexpr double kHalfLog2 = 0.346573590279972654708616060729;
constexpr double kE = 2.71828182845904523536028747135;
constexpr double kInvE = 0.367879441171442321595523770161;

// Poincare distance on the disc through the pseudo-hyperbolic modulus.
inline double disc_distance(Cx a, Cx b) {
    return std::atanh(std::abs((a - b) / (Cx(1.0, 0.0) - std::conj(b) * a)));
}

// Poincare metric |v| / (1-|z|^2).
inline double disc_metric(Cx z, Cx v) { return std::abs(v) / (1.0 - std::norm(z)); }

// g(z) = (3z+1)/(z+3) and its symbolic derivative 8/(z+3)^2.
inline Cx g_rational(Cx z) { return (3.0 * z + 1.0) / (z + 3.0); }
inline Cx g_rational_prime(Cx z) {
    const Cx d = z + 3.0;
    return 8.0 / (d * d);
}

// Closed-form forward orbit of g from 0 and the backward orbit toward -1.
inline double g_orbit_forward(int k) {
    const double p = std::ldexp(1.0, k);
    return (p - 1.0) / (p + 1.0);
}
inline double g_orbit_backward(int k) { return -g_orbit_forward(k); }

// Radial dilation quotient of the half-space dilation slice at (-1,0):
// exact value 2 e^t / (e^t (1-r) + (1+r)), limit e^t as r -> 1.
inline double siegel_ratio(double t, double r) {
    const double e = std::exp(t);
    return 2.0 * e / (e * (1.0 - r) + (1.0 + r));
}

// Boundary derivative of w -> w(w+a)/(1+aw) at w = 1.
inline double slice_rotation_boundary_derivative(double a) { return 2.0 / (1.0 + a); }

} // namespace oracles
