#include "ach/corpus.hpp"
#include "ach/solver.hpp"

#include "support.hpp"

using namespace ach;

namespace {

MatrixC scalar(Complex z) { return MatrixC::Constant(1, 1, z); }

double max_ein(const CurvatureJet& cv)
{
    double m = 0.0;
    for (int J = 0; J < cv.Ein.rows(); ++J) {
        for (int K = 0; K < cv.Ein.cols(); ++K) {
            for (const Complex& z : cv.Ein(J, K).coeffs()) {
                m = std::max(m, std::abs(z));
            }
        }
    }
    return m;
}

} // namespace

TEST_CASE("flat metric in normal form")
{
    const PhmModel m = flat_heisenberg(1, scalar(1.0));
    const MetricJet g = assemble_metric(m, boundary_fields(m, 6));
    CHECK(g.G(kInf, kInf) == LaurentJet::monomial(0.25, -2, g.G(kInf, kInf).trunc()));
    CHECK(g.G(kT, kT) == LaurentJet::monomial(4.0, -2, g.G(kT, kT).trunc()));
    CHECK(g.G(frame_w(0), frame_w(1)) == LaurentJet::monomial(-1.0, -1, g.G(frame_w(0), frame_w(1)).trunc()));
    CHECK(g.G(frame_w(0), frame_w(0)).is_zero());
    CHECK(g.G(kInf, kT).is_zero());
    CHECK(g.G(kInf, frame_w(0)).is_zero());
    // The special defining function condition.
    CHECK(max_coeff_diff(g.Ginv(kInf, kInf), LaurentJet::monomial(4.0, 2, g.Ginv(kInf, kInf).trunc())) < 1e-15);
}

TEST_CASE("eta couples T and H")
{
    const PhmModel m = flat_heisenberg(1, scalar(2.0));
    Fields f = boundary_fields(m, 6);
    f.eta[0] = LaurentJet::constant(0.5, 6);
    const MetricJet g = assemble_metric(m, f);
    // G_{0A} = -h~_{AB} eta~^B: h~_{Wb1 W1} = 2.
    const LaurentJet& g0 = g.G(kT, frame_w(1));
    CHECK(g0.min_deg() == 0);
    CHECK(std::abs(g0.leading() - Complex{-1.0, 0.0}) < 1e-15);
    CHECK(g.G(kT, frame_w(0)).is_zero());
}

TEST_CASE("boundary data is enforced")
{
    const PhmModel m = flat_heisenberg(1, scalar(1.0));
    Fields f = boundary_fields(m, 6);
    f.s = LaurentJet::constant(3.0, 6);
    CHECK(error_of([&] { assemble_metric(m, f); }) == ErrorCode::BoundaryMismatch);
    CHECK_NOTHROW(assemble_metric(m, f, false));
}

TEST_CASE("Koszul connection")
{
    const PhmModel m = flat_heisenberg(1, scalar(1.0));
    const MetricJet g = assemble_metric(m, boundary_fields(m, 6));
    const ConnectionJet cj = koszul(g, m);
    CHECK(cj(kInf, kInf, kInf) == LaurentJet::monomial(-1.0, -1, cj(kInf, kInf, kInf).trunc()));

    const PhmModel t = torsion_deformed(1, scalar(1.0), scalar(0.3));
    const SolverState st = solve(t);
    const ConnectionResiduals r = connection_residuals(koszul(st.metric, t), st.metric, t);
    CHECK(r.metric <= 1e-12);
    CHECK(r.torsion <= 1e-12);
}

TEST_CASE("flat models are Einstein")
{
    for (int n = 1; n <= 3; ++n) {
        const PhmModel m = flat_heisenberg(n, MatrixC::Identity(n, n));
        const MetricJet g = assemble_metric(m, boundary_fields(m, 8));
        const CurvatureJet cv = curvature(koszul(g, m), g, m);
        CHECK(max_ein(cv) <= 1e-12);
        CHECK(max_coeff_diff(cv.Scal, LaurentJet::constant(-4.0 * (n + 2) * (n + 1), cv.Scal.trunc())) <= 1e-12);
    }
}

TEST_CASE("Bianchi identity and reality on solved states")
{
    for (const auto& e : corpus()) {
        if (e.model.n() > 2) {
            continue;
        }
        CAPTURE(e.name);
        const SolverState st = solve(e.model);
        const ConnectionJet cj = koszul(st.metric, e.model);
        const CurvatureJet cv = curvature(cj, st.metric, e.model, true);
        CHECK(bianchi_residual(cv) <= 1e-10);
        CHECK(ein_reality_residual(cv, e.model) <= 1e-10);
        const int n = e.model.n();
        CHECK(std::abs(st.curv.Scal.coefficient(0) + 4.0 * (n + 2) * (n + 1)) <= 1e-9);
    }
}

TEST_CASE("closed-form connection table")
{
    const PhmModel flat = flat_heisenberg(1, scalar(1.0));
    CHECK(crosscheck_prop41(flat, solve_twt(flat), boundary_fields(flat, 6)) <= 1e-12);

    const PhmModel t = torsion_deformed(1, scalar(1.0), scalar(0.3));
    const SolverState st = solve(t);
    const TwtConnection twt = solve_twt(t);
    CHECK(crosscheck_prop41(t, twt, st.fields) <= 1e-10);

    // Detector sanity. The table holds for any symmetric h~, so the corruption
    // breaks the symmetry of one coefficient.
    Fields bad = st.fields;
    bad.ht(0, 1).set_coefficient(1, bad.ht(0, 1).coefficient(1) + 0.01);
    CHECK(crosscheck_prop41(t, twt, bad) > 1e-6);

    for (const auto& e : corpus()) {
        CAPTURE(e.name);
        const SolverState s = solve(e.model);
        CHECK(crosscheck_prop41(e.model, solve_twt(e.model), s.fields) <= 1e-10);
    }
}
