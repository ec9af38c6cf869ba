#include "ach/volume.hpp"

#include "ach/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <string>

namespace ach {

namespace {

// Volumes near the boundary reach |eps|^{-n-1}; the quadrature and the series are
// both carried in 50 digits so their difference is not swamped by rounding.
using Real = boost::multiprecision::cpp_bin_float_50;

double sign_n(int n) { return n % 2 == 0 ? 1.0 : -1.0; }

// Real part of the truncated density at phi.
Real evaluate(const std::vector<double>& coeffs, const Real& phi)
{
    Real acc = 0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        acc = acc * phi + *it;
    }
    return acc;
}

} // namespace

LaurentJet density(const SolverState& state)
{
    const PhmModel& m = state.model;
    const int n2 = 2 * m.n();
    const MatrixC hinv = m.h_full().inverse();
    const JetMatrix& ht = state.fields.ht;
    JetMatrix P(n2, n2, LaurentJet::zero(ht.trunc()));
    for (int A = 0; A < n2; ++A) {
        for (int B = 0; B < n2; ++B) {
            LaurentJet acc = LaurentJet::zero(ht.trunc());
            for (int C = 0; C < n2; ++C) {
                if (hinv(A, C) != Complex{}) {
                    acc += hinv(A, C) * ht(C, B);
                }
            }
            P(A, B) = acc;
        }
    }
    return sqrt(state.fields.s * determinant(P)) * Complex(0.5);
}

VolumeReport expansion(const SolverState& state)
{
    const int n = state.model.n();
    VolumeReport r;
    r.n = n;
    r.vol_M = state.model.vol_M();
    r.density = density(state);
    if (r.density.trunc() <= n + 1) {
        throw Error(ErrorCode::OutOfWindow, "density known only below phi^" + std::to_string(r.density.trunc()));
    }
    for (int j = 0; j <= n + 1; ++j) {
        r.v.push_back(sign_n(n) * r.density.coefficient(j).real());
    }
    const Complex L = r.vol_M * sign_n(n) * r.density.coefficient(n + 1);
    r.L = L.real();
    r.L_imag = L.imag();
    for (int j = 0; j <= n; ++j) {
        r.c.push_back(r.vol_M * r.v[static_cast<std::size_t>(j)] / static_cast<double>(j - n - 1));
    }
    r.obstructions = obstructions(state);
    return r;
}

VolumeProfile numeric_profile(const SolverState& state, const std::vector<double>& eps, double eps0)
{
    const int n = state.model.n();
    if (std::abs(eps0) > kProfileWindow) {
        throw Error(ErrorCode::WindowTooLarge, "eps0 = " + std::to_string(eps0) + " lies outside the trusted window");
    }
    for (double e : eps) {
        if (std::abs(e) > kProfileWindow) {
            throw Error(ErrorCode::WindowTooLarge, "eps = " + std::to_string(e) + " lies outside the trusted window");
        }
        if (!(eps0 < e && e < 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "profile needs eps0 < eps < 0");
        }
    }
    const VolumeReport rep = expansion(state);
    const LaurentJet& lambda = rep.density;
    const double vol = rep.vol_M;

    std::vector<double> re;
    for (int j = 0; j < lambda.trunc(); ++j) {
        re.push_back(lambda.coefficient(j).real());
    }

    // Constant term: the eps0 end of every power plus the tail j >= n+2 integrated up to 0.
    VolumeProfile prof;
    prof.eps0 = eps0;
    const Real u0 = -Real(eps0);
    Real V = 0;
    for (int j = 0; j < static_cast<int>(re.size()); ++j) {
        const Real lj = re[static_cast<std::size_t>(j)] * (j % 2 == 0 ? 1 : -1);
        const int p = j - n - 1;
        V += p == 0 ? vol * lj * log(u0) : vol * lj * pow(u0, p) / p;
    }
    prof.V = static_cast<double>(V);

    for (double e : eps) {
        ProfileRow row;
        row.eps = e;
        // phi = -exp(t) removes the endpoint singularity.
        auto f = [&](const Real& t) {
            const Real x = exp(t);
            return evaluate(re, -x) * pow(x, -n - 1);
        };
        const Real q = vol * boost::math::quadrature::gauss_kronrod<Real, 61>::integrate(
                                 f, log(-Real(e)), log(u0), 15, Real(1e-30));
        // c_j and L rebuilt in full precision from the same coefficients.
        Real sr = vol * sign_n(n) * Real(re[static_cast<std::size_t>(n + 1)]) * log(-Real(e)) + V;
        for (int j = 0; j <= n; ++j) {
            sr += vol * sign_n(n) * Real(re[static_cast<std::size_t>(j)]) / (j - n - 1) * pow(Real(e), j - n - 1);
        }
        row.quadrature = static_cast<double>(q);
        row.series = static_cast<double>(sr);
        row.difference = static_cast<double>(q - sr);
        prof.rows.push_back(row);
    }
    return prof;
}

} // namespace ach
