#include "ach/corpus.hpp"
#include "ach/twt.hpp"

#include "support.hpp"

using namespace ach;

TEST_CASE("flat model has trivial connection")
{
    const PhmModel m = flat_heisenberg(2, MatrixC::Identity(2, 2));
    const TwtConnection c = solve_twt(m);
    double om = 0.0;
    for (const MatrixC& w : c.omega) {
        om = std::max(om, w.cwiseAbs().maxCoeff());
    }
    CHECK(om == 0.0);
    CHECK(c.A.cwiseAbs().maxCoeff() == 0.0);
    CHECK(c.Q.max_abs() == 0.0);
    const TwtCurvature k = curvature_forms(m, c);
    CHECK(k.R.max_abs() == 0.0);
    CHECK(verify_bd(m, c, k) == 0.0);
}

TEST_CASE("torsion of the n=1 deformation")
{
    // With [T, W1] = a Wb1 and nabla T = 0, Tor(T, W1) = omega(T) W1 - a Wb1,
    // so the torsion entry is -a and the Tanno tensor vanishes.
    const PhmModel m = torsion_deformed(1, MatrixC::Identity(1, 1), MatrixC::Constant(1, 1, 0.3));
    const TwtConnection c = solve_twt(m);
    CHECK(std::abs(c.A(1, 0) - Complex{-0.3, 0.0}) < 1e-14);
    CHECK(std::abs(c.A(0, 1) - Complex{-0.3, 0.0}) < 1e-14);
    CHECK(c.Q.max_abs() < 1e-14);
    CHECK(c.residual < 1e-12);

    const TwtInvariantResiduals r = twt_invariants(m, c);
    CHECK(r.torsion_symmetry < 1e-12);
    CHECK(r.metric < 1e-12);
    CHECK(r.tanno < 1e-12);
    CHECK(r.reality < 1e-12);

    const TwtCurvature k = curvature_forms(m, c);
    CHECK(verify_bd(m, c, k) <= 1e-10);
    CHECK(curvature_reality_residual(m, k) <= 1e-12);
}

TEST_CASE("integrable models have no Tanno tensor")
{
    CHECK(solve_twt(torsion_product(2, 0.0, 1.3)).Q.max_abs() < 1e-14);
    CHECK(solve_twt(torsion_deformed(1, MatrixC::Constant(1, 1, 2.0), MatrixC::Constant(1, 1, Complex{0.4, -0.2})))
              .Q.max_abs() < 1e-14);
}

TEST_CASE("non-integrable product carries Tanno torsion")
{
    const PhmModel m = torsion_product(2, {0.3, 0.1}, 1.3);
    const TwtConnection c = solve_twt(m);
    CHECK(c.Q.max_abs() > 0.1);
    const TwtInvariantResiduals r = twt_invariants(m, c);
    CHECK(r.tanno < 1e-12);
    CHECK(r.reality < 1e-12);
}

TEST_CASE("structure equations on random models")
{
    std::mt19937_64 rng(7);
    for (int n = 1; n <= 3; ++n) {
        for (int trial = 0; trial < 3; ++trial) {
            const PhmModel m = random_torsion_model(n, rng, 1.0);
            const TwtConnection c = solve_twt(m);
            const TwtCurvature k = curvature_forms(m, c);
            CHECK(verify_bd(m, c, k) <= 1e-10);
            CHECK(curvature_reality_residual(m, k) <= 1e-12);
        }
    }
}

TEST_CASE("structure equations on the corpus")
{
    for (const auto& e : corpus()) {
        CAPTURE(e.name);
        const TwtConnection c = solve_twt(e.model);
        CHECK(verify_bd(e.model, c, curvature_forms(e.model, c)) <= 1e-10);
    }
}
