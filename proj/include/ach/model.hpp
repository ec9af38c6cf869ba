#pragma once

// Homogeneous almost pseudohermitian models.
//
// A model is a Lie algebra with basis (T, W_1..W_n, W_1b..W_nb), indexed
// 0, 1..n, n+1..2n. The conjugation sigma fixes T and swaps W_a <-> W_ab.
// Conventions:
//   (x ^ y)(X,Y) = x(X)y(Y) - x(Y)y(X)
//   d(theta)(X,Y) = -theta([X,Y]) for invariant forms
//   d(theta) = i h_{a bb} theta^a ^ theta^bb  =>  [W_a, W_bb] has T-component -i h_{a bb}

#include "ach/ljet.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace ach {

using MatrixC = Eigen::MatrixXcd;
using VectorC = Eigen::VectorXcd;

// Structure constants c_{JK}^L of [E_J, E_K] = c_{JK}^L E_L over a (2n+1)-dim basis.
class StructureConstants {
public:
    StructureConstants() = default;
    explicit StructureConstants(int dim) : dim_(dim), c_(static_cast<std::size_t>(dim * dim * dim)) {}

    int dim() const noexcept { return dim_; }
    Complex operator()(int j, int k, int l) const { return c_[index(j, k, l)]; }
    // Sets c_{jk}^l and c_{kj}^l = -value.
    void set_bracket(int j, int k, int l, Complex value);
    void add_bracket(int j, int k, int l, Complex value);
    // Raw write of a single slot (no antisymmetrization); for building invalid inputs.
    void set_raw(int j, int k, int l, Complex value) { c_[index(j, k, l)] = value; }

    bool operator==(const StructureConstants&) const = default;

private:
    std::size_t index(int j, int k, int l) const
    {
        return static_cast<std::size_t>((j * dim_ + k) * dim_ + l);
    }

    int dim_ = 0;
    std::vector<Complex> c_;
};

class PhmModel {
public:
    PhmModel(int n, StructureConstants c, MatrixC h, double vol_M = 1.0);

    int n() const noexcept { return n_; }
    int dim() const noexcept { return 2 * n_ + 1; }
    const StructureConstants& c() const noexcept { return c_; }
    const MatrixC& h() const noexcept { return h_; }
    double vol_M() const noexcept { return vol_M_; }

    // 2n x 2n symmetric Levi form over the H indices A,B (h_{a bb} = h_{bb a}, other blocks zero).
    MatrixC h_full() const;

    // Basis helpers: 0 = T, 1..n holomorphic, n+1..2n antiholomorphic.
    int sigma(int j) const noexcept
    {
        return j == 0 ? 0 : (j <= n_ ? j + n_ : j - n_);
    }
    int hol(int alpha) const noexcept { return 1 + alpha; }
    int antihol(int alpha) const noexcept { return 1 + n_ + alpha; }

    std::string label(int j) const;

private:
    int n_;
    StructureConstants c_;
    MatrixC h_;
    double vol_M_;
};

struct CheckResult {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = true;
};

struct ValidationReport {
    std::vector<CheckResult> checks;

    bool ok() const noexcept;
    const CheckResult* find(const std::string& name) const noexcept;
    std::string summary() const;
};

ValidationReport validate(const PhmModel& m, double tol = 1e-12);

// Only nonzero brackets: [W_a, W_bb] = -i h_{a bb} T.
PhmModel flat_heisenberg(int n, const MatrixC& h);

// Flat brackets plus [T, W_a] = a_a^bb W_bb and its conjugate, with a_{ab} symmetric
// and the index raised by h. Jacobi fails for n >= 2 unless a = 0; the result is
// validated and JacobiViolation is thrown in that case.
PhmModel torsion_deformed(int n, const MatrixC& h, const MatrixC& a);

// n >= 1 model with nonzero pseudohermitian torsion for every n: the 3-dim torsion
// algebra (Levi form h1, torsion a) extended by n-1 copies of aff(1), each contributing
// the exact symplectic summand e2* to the contact form. For n >= 2 and a != 0 the
// structure is not integrable (nonzero Tanno tensor).
PhmModel torsion_product(int n, Complex a, double h1 = 1.0);

// Builds and validates; throws ValidationFailed (or NonPositiveLevi/JacobiViolation) with the report summary.
PhmModel custom(int n, const StructureConstants& c, const MatrixC& h, double vol_M = 1.0);

// Rewrites the model in a new H-frame W'_A = F_A^B W_B (T unchanged). F must be
// invertible and conjugation-equivariant. The Levi matrix is recomputed.
PhmModel change_frame(const PhmModel& m, const MatrixC& F);

// Presents theta' = e^{2u} theta: T' = e^{-2u} T, h' = e^{2u} h, vol' = e^{2(n+1)u} vol.
PhmModel rescale_contact_form(const PhmModel& m, double upsilon);

// Line of partially integrable almost CR structures: t -> F(t) acting on the H-frame,
// F(t) = I + t K (linear) or exp(t K) (exponential). K is 2n x 2n and conjugation-equivariant.
class JFamily {
public:
    enum class Kind { Linear, Exponential };

    JFamily(Kind kind, MatrixC generator);

    // exp(t K) with K = [[0, Q], [conj Q, 0]], Q = i rate S (h^T)^{-1} and S the symmetric
    // anti-diagonal ones matrix: a one-parameter subgroup of Sp(H) transverse to U(h), so
    // J_t sweeps through compatible structures (mixes W_1 with W_nb).
    static JFamily rotation(const MatrixC& h, double rate = 1.0);
    // F(t) = I + t K with K = [[0, Q], [conj Q, 0]], Q = h_11 E_11 (h^T)^{-1}:
    // W_1(t) = W_1 + t (...) W_b, degenerate at t = 1 for diagonal h.
    static JFamily degenerating(const MatrixC& h);

    Kind kind() const noexcept { return kind_; }
    const MatrixC& generator() const noexcept { return generator_; }
    MatrixC frame_change(double t) const;

private:
    Kind kind_;
    MatrixC generator_;
};

// Model with the same theta and brackets and a new (1,0)-frame; throws IncompatibleJ
// if the recomputed Levi matrix is not positive definite.
PhmModel deform_J(const PhmModel& m, const JFamily& family, double t);

// Conjugation-equivariant 2n x 2n block matrix [[P, Q], [conj Q, conj P]].
MatrixC equivariant_matrix(const MatrixC& P, const MatrixC& Q);

// Smallest eigenvalue of the Hermitian part of h.
double min_levi_eigenvalue(const MatrixC& h);

// Max |c - c'| over all slots.
double max_difference(const StructureConstants& a, const StructureConstants& b);

} // namespace ach
