#include "ach/model.hpp"

#include "support.hpp"

#include <cmath>

using namespace ach;

namespace {

const Complex I{0.0, 1.0};

MatrixC scalar(Complex z) { return MatrixC::Constant(1, 1, z); }

bool same(const PhmModel& a, const PhmModel& b, double tol = 1e-14)
{
    return a.n() == b.n() && max_difference(a.c(), b.c()) <= tol && (a.h() - b.h()).norm() <= tol &&
           std::abs(a.vol_M() - b.vol_M()) <= tol;
}

} // namespace

TEST_CASE("flat Heisenberg brackets")
{
    const PhmModel m = flat_heisenberg(1, scalar(1.0));
    CHECK(validate(m).ok());
    CHECK(m.c()(1, 2, 0) == -I);
    CHECK(m.c()(2, 1, 0) == I);
    int nonzero = 0;
    for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
            for (int l = 0; l < 3; ++l) {
                nonzero += m.c()(j, k, l) != Complex{};
            }
        }
    }
    CHECK(nonzero == 2);

    const PhmModel m2 = flat_heisenberg(2, MatrixC::Identity(2, 2));
    CHECK(m2.c()(1, 3, 0) == -I);
    CHECK(m2.c()(2, 4, 0) == -I);
    CHECK(m2.c()(1, 4, 0) == Complex{});
    CHECK(validate(m2).ok());

    CHECK(error_of([] { flat_heisenberg(1, scalar(-1.0)); }) == ErrorCode::NonPositiveLevi);
}

TEST_CASE("validate flags sign convention and positivity")
{
    StructureConstants c(3);
    c.set_bracket(1, 2, 0, I);
    const ValidationReport wrong_sign = validate(PhmModel(1, c, scalar(1.0)));
    CHECK_FALSE(wrong_sign.ok());
    CHECK_FALSE(wrong_sign.find("contact_convention")->pass);

    StructureConstants z(3);
    const ValidationReport degenerate = validate(PhmModel(1, z, scalar(0.0)));
    CHECK_FALSE(degenerate.find("levi_positivity")->pass);
}

TEST_CASE("validate flags Jacobi and reality")
{
    // [T, W1] = W1 alone breaks reality.
    StructureConstants c = flat_heisenberg(1, scalar(1.0)).c();
    c.set_bracket(0, 1, 1, 1.0);
    CHECK_FALSE(validate(PhmModel(1, c, scalar(1.0))).find("reality")->pass);

    // Torsion for n = 2 with a != 0 fails Jacobi.
    MatrixC a = MatrixC::Zero(2, 2);
    a(0, 1) = a(1, 0) = 0.3;
    CHECK(error_of([&] { torsion_deformed(2, MatrixC::Identity(2, 2), a); }) == ErrorCode::JacobiViolation);
}

TEST_CASE("torsion deformation")
{
    const PhmModel flat = flat_heisenberg(1, scalar(1.0));
    CHECK(same(torsion_deformed(1, scalar(1.0), scalar(0.0)), flat));

    const PhmModel t = torsion_deformed(1, scalar(1.0), scalar(0.3));
    CHECK(validate(t).ok());
    CHECK(t.c()(0, 1, 2) == Complex{0.3, 0.0});
    CHECK(t.c()(0, 2, 1) == Complex{0.3, 0.0});

    CHECK(validate(torsion_product(2, {0.3, 0.1}, 1.3)).ok());
    CHECK(validate(torsion_product(3, {0.2, -0.1}, 0.8)).ok());
}

TEST_CASE("custom matches the builtins")
{
    const PhmModel flat = flat_heisenberg(2, MatrixC::Identity(2, 2));
    CHECK(same(custom(2, flat.c(), flat.h()), flat));
    const PhmModel t = torsion_deformed(1, scalar(2.0), scalar(0.4));
    CHECK(same(custom(1, t.c(), t.h()), t));

    StructureConstants bad = flat.c();
    bad.set_bracket(1, 2, 3, 1.0);
    CHECK(error_of([&] { custom(2, bad, flat.h()); }).has_value());
}

TEST_CASE("contact rescaling")
{
    const PhmModel flat = flat_heisenberg(1, scalar(1.0));
    CHECK(same(rescale_contact_form(flat, 0.0), flat));

    const PhmModel r = rescale_contact_form(flat, 0.5);
    CHECK(r.h()(0, 0).real() == doctest::Approx(std::exp(1.0)));
    CHECK(std::abs(r.c()(1, 2, 0) + I * r.h()(0, 0)) < 1e-14);
    CHECK(validate(r).ok());
    CHECK(r.vol_M() == doctest::Approx(std::exp(2.0)));

    CHECK(validate(rescale_contact_form(torsion_deformed(1, scalar(1.0), scalar(0.3)), 0.2)).ok());
}

TEST_CASE("J families")
{
    const PhmModel flat = flat_heisenberg(2, MatrixC::Identity(2, 2));
    const JFamily rot = JFamily::rotation(flat.h());
    CHECK(same(deform_J(flat, rot, 0.0), flat));
    const PhmModel r = deform_J(flat, rot, 0.3);
    CHECK(validate(r).ok());
    CHECK(min_levi_eigenvalue(r.h()) > 0.0);

    const PhmModel one = flat_heisenberg(1, scalar(1.0));
    const JFamily deg = JFamily::degenerating(one.h());
    CHECK(validate(deform_J(one, deg, 0.5)).ok());
    CHECK(error_of([&] { deform_J(one, deg, 1.0); }) == ErrorCode::IncompatibleJ);
}

TEST_CASE("frame change keeps the structure valid")
{
    const PhmModel t = torsion_deformed(1, scalar(1.0), scalar(0.3));
    const MatrixC F = equivariant_matrix(scalar(Complex{1.2, 0.3}), scalar(Complex{0.1, -0.2}));
    const PhmModel f = change_frame(t, F);
    CHECK(validate(f).ok());
    CHECK(same(change_frame(t, MatrixC::Identity(2, 2)), t));
}

TEST_CASE("labels")
{
    const PhmModel m = flat_heisenberg(2, MatrixC::Identity(2, 2));
    CHECK(m.label(0) == "T");
    CHECK(m.label(2) == "W2");
    CHECK(m.label(3) == "Wb1");
    CHECK(m.sigma(1) == 3);
    CHECK(m.sigma(0) == 0);
}
