#pragma once

// Volume form expansion and the log term coefficient L.
//
// dv = (-phi)^{-n-2} lambda(phi) dphi ^ theta ^ (dtheta)^n with
// lambda = sqrt(s det(h^{-1} h~)) / 2, so lambda(0) = 1. Writing
// dv = phi^{-n-2} (v^(0) + v^(1) phi + ...) gives v^(j) = (-1)^n lambda_j.

#include "ach/solver.hpp"

#include <optional>
#include <vector>

namespace ach {

LaurentJet density(const SolverState& state);

struct ProfileRow {
    double eps = 0.0;
    double quadrature = 0.0;  // vol_M * int_{eps0}^{eps} lambda (-phi)^{-n-2} dphi
    double series = 0.0;      // sum_j c_j eps^{j-n-1} + L log(-eps) + V
    double difference = 0.0;  // quadrature - series
};

struct VolumeProfile {
    double eps0 = 0.0;
    double V = 0.0;  // constant term for this eps0
    std::vector<ProfileRow> rows;
};

struct VolumeReport {
    int n = 0;
    LaurentJet density;
    std::vector<double> v;  // v^(0..n+1)
    double L = 0.0;
    double L_imag = 0.0;     // imaginary residue of vol_M * v^(n+1) before taking the real part
    double vol_M = 0.0;
    std::vector<double> c;  // c_0..c_n, coefficients of eps^{j-n-1}
    Obstructions obstructions;
    std::optional<VolumeProfile> profile;
};

VolumeReport expansion(const SolverState& state);

// Largest |eps| (and |eps0|) at which the truncated series is trusted.
constexpr double kProfileWindow = 0.1;

// Requires eps0 < eps < 0 for every eps and |eps0| <= kProfileWindow; throws
// WindowTooLarge beyond the window and InvalidArgument for misordered input.
VolumeProfile numeric_profile(const SolverState& state, const std::vector<double>& eps, double eps0 = -0.1);

} // namespace ach
