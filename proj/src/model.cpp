#include "ach/model.hpp"

#include "ach/error.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ach {

namespace {

const Complex I{0.0, 1.0};

void require(bool cond, ErrorCode code, const std::string& what)
{
    if (!cond) {
        throw Error(code, what);
    }
}

} // namespace

void StructureConstants::set_bracket(int j, int k, int l, Complex value)
{
    c_[index(j, k, l)] = value;
    c_[index(k, j, l)] = -value;
}

void StructureConstants::add_bracket(int j, int k, int l, Complex value)
{
    if (j == k) {
        return;
    }
    c_[index(j, k, l)] += value;
    c_[index(k, j, l)] -= value;
}

double max_difference(const StructureConstants& a, const StructureConstants& b)
{
    require(a.dim() == b.dim(), ErrorCode::InvalidArgument, "dimension mismatch");
    double m = 0.0;
    for (int j = 0; j < a.dim(); ++j) {
        for (int k = 0; k < a.dim(); ++k) {
            for (int l = 0; l < a.dim(); ++l) {
                m = std::max(m, std::abs(a(j, k, l) - b(j, k, l)));
            }
        }
    }
    return m;
}

PhmModel::PhmModel(int n, StructureConstants c, MatrixC h, double vol_M)
    : n_(n), c_(std::move(c)), h_(std::move(h)), vol_M_(vol_M)
{
    require(n >= 1, ErrorCode::InvalidArgument, "CR dimension n must be positive");
    require(c_.dim() == 2 * n + 1, ErrorCode::InvalidArgument, "structure constants must be (2n+1)^3");
    require(h_.rows() == n && h_.cols() == n, ErrorCode::InvalidArgument, "Levi matrix must be n x n");
    require(vol_M > 0.0 && std::isfinite(vol_M), ErrorCode::InvalidArgument, "vol_M must be positive");
}

MatrixC PhmModel::h_full() const
{
    MatrixC H = MatrixC::Zero(2 * n_, 2 * n_);
    H.topRightCorner(n_, n_) = h_;
    H.bottomLeftCorner(n_, n_) = h_.transpose();
    return H;
}

std::string PhmModel::label(int j) const
{
    if (j == 0) {
        return "T";
    }
    if (j <= n_) {
        return "W" + std::to_string(j);
    }
    return "Wb" + std::to_string(j - n_);
}

bool ValidationReport::ok() const noexcept
{
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult* ValidationReport::find(const std::string& name) const noexcept
{
    for (const auto& c : checks) {
        if (c.name == name) {
            return &c;
        }
    }
    return nullptr;
}

std::string ValidationReport::summary() const
{
    std::ostringstream os;
    bool first = true;
    for (const auto& c : checks) {
        if (c.pass) {
            continue;
        }
        os << (first ? "" : "; ") << c.name << " residual " << c.residual << " (tol " << c.tolerance << ")";
        first = false;
    }
    return first ? std::string("all checks pass") : os.str();
}

double min_levi_eigenvalue(const MatrixC& h)
{
    const MatrixC herm = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixC> es(herm, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

ValidationReport validate(const PhmModel& m, double tol)
{
    const int D = m.dim();
    const int n = m.n();
    const auto& c = m.c();
    ValidationReport rep;
    auto add = [&](std::string name, double residual, double t, bool pass) {
        rep.checks.push_back(CheckResult{std::move(name), residual, t, pass});
    };

    double anti = 0.0;
    for (int j = 0; j < D; ++j) {
        for (int k = 0; k < D; ++k) {
            for (int l = 0; l < D; ++l) {
                anti = std::max(anti, std::abs(c(j, k, l) + c(k, j, l)));
            }
        }
    }
    add("antisymmetry", anti, tol, anti <= tol);

    double jac = 0.0;
    for (int j = 0; j < D; ++j) {
        for (int k = 0; k < D; ++k) {
            for (int l = 0; l < D; ++l) {
                for (int p = 0; p < D; ++p) {
                    Complex s{};
                    for (int q = 0; q < D; ++q) {
                        s += c(j, k, q) * c(q, l, p) + c(k, l, q) * c(q, j, p) + c(l, j, q) * c(q, k, p);
                    }
                    jac = std::max(jac, std::abs(s));
                }
            }
        }
    }
    add("jacobi", jac, tol, jac <= tol);

    double real = 0.0;
    for (int j = 0; j < D; ++j) {
        for (int k = 0; k < D; ++k) {
            for (int l = 0; l < D; ++l) {
                real = std::max(real, std::abs(c(m.sigma(j), m.sigma(k), m.sigma(l)) - std::conj(c(j, k, l))));
            }
        }
    }
    const MatrixC& h = m.h();
    const double herm = (h - h.adjoint()).cwiseAbs().maxCoeff();
    real = std::max(real, herm);
    add("reality", real, tol, real <= tol);

    // [W_a, W_bb]^T = -i h_{a bb}; [W_a, W_b]^T = 0 (and conjugates).
    double contact = 0.0;
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            contact = std::max(contact, std::abs(c(m.hol(a), m.antihol(b), 0) + I * h(a, b)));
            contact = std::max(contact, std::abs(c(m.hol(a), m.hol(b), 0)));
            contact = std::max(contact, std::abs(c(m.antihol(a), m.antihol(b), 0)));
        }
    }
    add("contact_convention", contact, tol, contact <= tol);

    // Reeb field: theta([T, X]) = 0 for every X.
    double reeb = 0.0;
    for (int k = 0; k < D; ++k) {
        reeb = std::max(reeb, std::abs(c(0, k, 0)));
    }
    add("reeb", reeb, tol, reeb <= tol);

    const double lmin = min_levi_eigenvalue(h);
    add("levi_positivity", -lmin, 0.0, lmin > 0.0);

    // d(theta)|_H nondegenerate: smallest singular value of [theta([W_A, W_B])].
    MatrixC dth(2 * n, 2 * n);
    for (int A = 0; A < 2 * n; ++A) {
        for (int B = 0; B < 2 * n; ++B) {
            dth(A, B) = -c(1 + A, 1 + B, 0);
        }
    }
    Eigen::JacobiSVD<MatrixC> svd(dth);
    const double smin = svd.singularValues().minCoeff();
    add("nondegeneracy", -smin, 0.0, smin > 1e3 * tol);
    return rep;
}

PhmModel flat_heisenberg(int n, const MatrixC& h)
{
    require(n >= 1 && h.rows() == n && h.cols() == n, ErrorCode::InvalidArgument, "Levi matrix must be n x n");
    require((h - h.adjoint()).cwiseAbs().maxCoeff() <= 1e-12, ErrorCode::InvalidArgument, "h must be Hermitian");
    if (!(min_levi_eigenvalue(h) > 0.0)) {
        throw Error(ErrorCode::NonPositiveLevi, "Levi matrix is not positive definite");
    }
    const int D = 2 * n + 1;
    StructureConstants c(D);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            c.set_bracket(1 + a, 1 + n + b, 0, -I * h(a, b));
        }
    }
    return PhmModel(n, std::move(c), h);
}

PhmModel torsion_deformed(int n, const MatrixC& h, const MatrixC& a)
{
    require(a.rows() == n && a.cols() == n, ErrorCode::InvalidArgument, "torsion parameter must be n x n");
    require((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12, ErrorCode::InvalidArgument,
            "torsion parameter must be symmetric");
    const PhmModel flat = flat_heisenberg(n, h);
    StructureConstants c = flat.c();
    // a_a^bb = a_{ag} (h^T)^{-1}_{g bb}, so that a_b^gb h_{a gb} = a_{ba}.
    const MatrixC raised = a * h.transpose().inverse();
    for (int al = 0; al < n; ++al) {
        for (int be = 0; be < n; ++be) {
            c.set_bracket(0, 1 + al, 1 + n + be, raised(al, be));
            c.set_bracket(0, 1 + n + al, 1 + be, std::conj(raised(al, be)));
        }
    }
    PhmModel m(n, std::move(c), h);
    const ValidationReport rep = validate(m);
    if (!rep.ok()) {
        throw Error(ErrorCode::JacobiViolation, rep.summary());
    }
    return m;
}

PhmModel torsion_product(int n, Complex a, double h1)
{
    require(n >= 1, ErrorCode::InvalidArgument, "n must be positive");
    if (!(h1 > 0.0)) {
        throw Error(ErrorCode::NonPositiveLevi, "h1 must be positive");
    }
    // Factor 1: [W1, W1b] = -i h1 T, [T, W1] = (a/h1) W1b.
    // Factor k (aff(1) with [e1, e2] = e2, u = e2 - T in H): W_k = e1 + (i/2) u, so
    //   [W_k, W_kb] = -i T - W_k + W_kb,  [W_1, W_k] = (i/2)(a/h1) W_1b,  [W_1, W_kb] = -(i/2)(a/h1) W_1b.
    const int D = 2 * n + 1;
    const Complex ar = a / h1;
    StructureConstants c(D);
    auto hol = [&](int k) { return 1 + k; };
    auto anti = [&](int k) { return 1 + n + k; };
    c.set_bracket(hol(0), anti(0), 0, -I * h1);
    c.set_bracket(0, hol(0), anti(0), ar);
    c.set_bracket(0, anti(0), hol(0), std::conj(ar));
    for (int k = 1; k < n; ++k) {
        c.set_bracket(hol(k), anti(k), 0, -I);
        c.set_bracket(hol(k), anti(k), hol(k), -1.0);
        c.set_bracket(hol(k), anti(k), anti(k), 1.0);
        c.set_bracket(hol(0), hol(k), anti(0), 0.5 * I * ar);
        c.set_bracket(hol(0), anti(k), anti(0), -0.5 * I * ar);
        c.set_bracket(anti(0), anti(k), hol(0), std::conj(0.5 * I * ar));
        c.set_bracket(anti(0), hol(k), hol(0), std::conj(-0.5 * I * ar));
    }
    MatrixC h = MatrixC::Identity(n, n);
    h(0, 0) = h1;
    PhmModel m(n, std::move(c), h);
    const ValidationReport rep = validate(m);
    if (!rep.ok()) {
        throw Error(ErrorCode::JacobiViolation, rep.summary());
    }
    return m;
}

PhmModel custom(int n, const StructureConstants& c, const MatrixC& h, double vol_M)
{
    PhmModel m(n, c, h, vol_M);
    const ValidationReport rep = validate(m);
    if (!rep.ok()) {
        const auto* jac = rep.find("jacobi");
        const auto* levi = rep.find("levi_positivity");
        if (jac != nullptr && !jac->pass) {
            throw Error(ErrorCode::JacobiViolation, rep.summary());
        }
        if (levi != nullptr && !levi->pass) {
            throw Error(ErrorCode::NonPositiveLevi, rep.summary());
        }
        throw Error(ErrorCode::ValidationFailed, rep.summary());
    }
    return m;
}

namespace {

// c'_{IJ}^K = P_I^a P_J^b c_ab^d (P^{-1})_d^K for the new basis E'_I = P_I^a E_a.
StructureConstants transform(const StructureConstants& c, const MatrixC& P)
{
    const int D = c.dim();
    const MatrixC Pinv = P.inverse();
    // First contract the output index, then the two inputs.
    std::vector<Complex> tmp(static_cast<std::size_t>(D * D * D));
    auto at = [D](int a, int b, int k) { return static_cast<std::size_t>((a * D + b) * D + k); };
    for (int a = 0; a < D; ++a) {
        for (int b = 0; b < D; ++b) {
            for (int k = 0; k < D; ++k) {
                Complex s{};
                for (int d = 0; d < D; ++d) {
                    s += c(a, b, d) * Pinv(d, k);
                }
                tmp[at(a, b, k)] = s;
            }
        }
    }
    StructureConstants out(D);
    for (int i = 0; i < D; ++i) {
        for (int j = 0; j < D; ++j) {
            for (int k = 0; k < D; ++k) {
                Complex s{};
                for (int a = 0; a < D; ++a) {
                    if (P(i, a) == Complex{}) {
                        continue;
                    }
                    for (int b = 0; b < D; ++b) {
                        s += P(i, a) * P(j, b) * tmp[at(a, b, k)];
                    }
                }
                out.set_raw(i, j, k, s);
            }
        }
    }
    return out;
}

MatrixC levi_from_brackets(const StructureConstants& c, int n)
{
    MatrixC h(n, n);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            h(a, b) = I * c(1 + a, 1 + n + b, 0);
        }
    }
    return h;
}

} // namespace

PhmModel change_frame(const PhmModel& m, const MatrixC& F)
{
    const int n = m.n();
    require(F.rows() == 2 * n && F.cols() == 2 * n, ErrorCode::InvalidArgument, "frame change must be 2n x 2n");
    double eq = 0.0;
    for (int A = 0; A < 2 * n; ++A) {
        for (int B = 0; B < 2 * n; ++B) {
            eq = std::max(eq, std::abs(F(m.sigma(1 + A) - 1, m.sigma(1 + B) - 1) - std::conj(F(A, B))));
        }
    }
    require(eq <= 1e-12, ErrorCode::InvalidArgument, "frame change must be conjugation-equivariant");
    Eigen::FullPivLU<MatrixC> lu(F);
    require(lu.isInvertible(), ErrorCode::InvalidArgument, "frame change must be invertible");

    MatrixC P = MatrixC::Zero(2 * n + 1, 2 * n + 1);
    P(0, 0) = 1.0;
    P.bottomRightCorner(2 * n, 2 * n) = F;
    StructureConstants c = transform(m.c(), P);
    MatrixC h = levi_from_brackets(c, n);
    return PhmModel(n, std::move(c), std::move(h), m.vol_M());
}

PhmModel rescale_contact_form(const PhmModel& m, double upsilon)
{
    require(std::isfinite(upsilon), ErrorCode::InvalidArgument, "rescale parameter must be finite");
    const int n = m.n();
    if (upsilon == 0.0) {
        return m;
    }
    MatrixC P = MatrixC::Identity(2 * n + 1, 2 * n + 1);
    P(0, 0) = std::exp(-2.0 * upsilon);
    StructureConstants c = transform(m.c(), P);
    MatrixC h = levi_from_brackets(c, n);
    return PhmModel(n, std::move(c), std::move(h), m.vol_M() * std::exp(2.0 * (n + 1) * upsilon));
}

MatrixC equivariant_matrix(const MatrixC& P, const MatrixC& Q)
{
    const auto n = P.rows();
    MatrixC K(2 * n, 2 * n);
    K.topLeftCorner(n, n) = P;
    K.topRightCorner(n, n) = Q;
    K.bottomLeftCorner(n, n) = Q.conjugate();
    K.bottomRightCorner(n, n) = P.conjugate();
    return K;
}

JFamily::JFamily(Kind kind, MatrixC generator) : kind_(kind), generator_(std::move(generator))
{
    const auto N = generator_.rows();
    require(N % 2 == 0 && N == generator_.cols() && N > 0, ErrorCode::InvalidArgument,
            "generator must be 2n x 2n");
    const auto n = N / 2;
    double eq = (generator_.topLeftCorner(n, n) - generator_.bottomRightCorner(n, n).conjugate()).cwiseAbs().maxCoeff();
    eq = std::max(eq,
                  (generator_.topRightCorner(n, n) - generator_.bottomLeftCorner(n, n).conjugate()).cwiseAbs().maxCoeff());
    require(eq <= 1e-12, ErrorCode::InvalidArgument, "generator must be conjugation-equivariant");
}

JFamily JFamily::rotation(const MatrixC& h, double rate)
{
    const auto n = h.rows();
    MatrixC S = MatrixC::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        S(i, n - 1 - i) = 1.0;
    }
    const MatrixC Q = I * rate * S * h.transpose().inverse();
    return JFamily(Kind::Exponential, equivariant_matrix(MatrixC::Zero(n, n), Q));
}

JFamily JFamily::degenerating(const MatrixC& h)
{
    const auto n = h.rows();
    MatrixC E = MatrixC::Zero(n, n);
    E(0, 0) = h(0, 0);
    const MatrixC Q = E * h.transpose().inverse();
    return JFamily(Kind::Linear, equivariant_matrix(MatrixC::Zero(n, n), Q));
}

MatrixC JFamily::frame_change(double t) const
{
    const auto N = generator_.rows();
    if (kind_ == Kind::Linear) {
        return MatrixC::Identity(N, N) + t * generator_;
    }
    const MatrixC tk = t * generator_;
    return tk.exp();
}

PhmModel deform_J(const PhmModel& m, const JFamily& family, double t)
{
    require(family.generator().rows() == 2 * m.n(), ErrorCode::InvalidArgument, "family dimension mismatch");
    const MatrixC F = family.frame_change(t);
    Eigen::FullPivLU<MatrixC> lu(F);
    if (!lu.isInvertible()) {
        throw Error(ErrorCode::IncompatibleJ, "frame change is singular at t = " + std::to_string(t));
    }
    PhmModel out = change_frame(m, F);
    const ValidationReport rep = validate(out, 1e-10);
    if (!rep.ok()) {
        throw Error(ErrorCode::IncompatibleJ, "at t = " + std::to_string(t) + ": " + rep.summary());
    }
    return out;
}

} // namespace ach
