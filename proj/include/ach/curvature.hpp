#pragma once

// Jet-valued ACH metric in normal form and its Levi-Civita curvature.
//
// Fixed frame: index 0 = d/dphi (the "infinity" direction), 1 = T, 2 + A = W_A.
// Only d/dphi differentiates coefficients; brackets are the model's structure
// constants with [d/dphi, .] = 0.

#include "ach/ljet.hpp"
#include "ach/model.hpp"
#include "ach/twt.hpp"

#include <vector>

namespace ach {

constexpr int kInf = 0;
constexpr int kT = 1;
constexpr int frame_w(int A) noexcept { return 2 + A; }

// Dense matrix of jets.
class JetMatrix {
public:
    JetMatrix() = default;
    JetMatrix(int rows, int cols, const LaurentJet& fill = LaurentJet::zero(0))
        : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows * cols), fill)
    {}

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    LaurentJet& operator()(int i, int j) { return a_[static_cast<std::size_t>(i * cols_ + j)]; }
    const LaurentJet& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * cols_ + j)]; }

    // Smallest trunc over the entries.
    int trunc() const noexcept;
    // Matrix of phi^k coefficients (zero below min_deg).
    MatrixC coefficient(int k) const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<LaurentJet> a_;
};

// Inverse of a matrix of Taylor jets with invertible constant term.
JetMatrix invert_taylor(const JetMatrix& m);
// Determinant by LU over jets (no pivoting beyond the constant term ordering).
LaurentJet determinant(const JetMatrix& m);

// Unknown fields of the normal form: s, h~_AB (2n x 2n, symmetric), eta~^A.
struct Fields {
    LaurentJet s;
    JetMatrix ht;
    std::vector<LaurentJet> eta;
};

// s = 4, h~ = h, eta~ = 0 with Taylor window [0, trunc).
Fields boundary_fields(const PhmModel& m, int trunc);

struct MetricJet {
    int n = 0;
    int dim = 0;
    JetMatrix G;
    JetMatrix Ginv;
    JetMatrix ht_inv;
};

// Throws BoundaryMismatch if s(0) != 4, h~(0) != h or eta~ has a pole; the
// boundary test is skipped when check_boundary is false (fault injection).
MetricJet assemble_metric(const PhmModel& m, const Fields& f, bool check_boundary = true);

struct ConnectionJet {
    int dim = 0;
    // Gamma[(J * dim + K) * dim + M]: nabla_{E_J} E_K = Gamma_JK^M E_M.
    std::vector<LaurentJet> Gamma;

    const LaurentJet& operator()(int j, int k, int m) const
    {
        return Gamma[static_cast<std::size_t>((j * dim + k) * dim + m)];
    }
};

// Structure constants on the fixed frame (zero whenever d/dphi is involved).
Complex frame_bracket(const PhmModel& m, int j, int k, int l);

ConnectionJet koszul(const MetricJet& mj, const PhmModel& m);

struct CurvatureJet {
    int dim = 0;
    // Riem[((J * dim + K) * dim + L) * dim + P] = R_JKL^P, R(E_J, E_K) E_L = R_JKL^P E_P.
    // Empty unless requested.
    std::vector<LaurentJet> Riem;
    JetMatrix Ric;
    LaurentJet Scal;
    JetMatrix Ein;

    const LaurentJet& riem(int j, int k, int l, int p) const
    {
        return Riem[static_cast<std::size_t>(((j * dim + k) * dim + l) * dim + p)];
    }
};

// Ricci is always formed; the full Riemann tensor only when full is true.
CurvatureJet curvature(const ConnectionJet& cj, const MetricJet& mj, const PhmModel& m, bool full = false);

struct ConnectionResiduals {
    double metric = 0.0;
    double torsion = 0.0;
};
ConnectionResiduals connection_residuals(const ConnectionJet& cj, const MetricJet& mj, const PhmModel& m);

// Max over J, K, L, P of the cyclic sum R_JKL^P + R_KLJ^P + R_LJK^P (needs full Riemann).
double bianchi_residual(const CurvatureJet& cv);
// Ein_{sJ sK} = conj(Ein_JK) with sigma extended by fixing d/dphi.
double ein_reality_residual(const CurvatureJet& cv, const PhmModel& m);

// Lowering of eta~_C in the closed-form table: with the evolving h~ or the boundary h.
// Only the boundary reading reproduces the Levi-Civita connection.
enum class EtaLowering { Evolving, Boundary };

// Largest deviation between the closed-form Levi-Civita table in the moving
// coframe (d phi, theta, theta~^A) and the Koszul connection transported to it,
// over all components and retained coefficients. with_corrections adds the
// O(phi eta~) terms of the theta~^C part of psi_A^B that the printed table lacks.
double crosscheck_prop41(const PhmModel& m, const TwtConnection& twt, const Fields& f,
                         EtaLowering lowering = EtaLowering::Boundary, bool check_boundary = true,
                         bool with_corrections = true);

// Per-component deviations psi_K^J(e_I) behind crosscheck_prop41.
struct Prop41Entry {
    int K = 0;
    int J = 0;
    int I = 0;
    double residual = 0.0;
};
std::vector<Prop41Entry> crosscheck_prop41_detailed(const PhmModel& m, const TwtConnection& twt, const Fields& f,
                                                    EtaLowering lowering = EtaLowering::Boundary,
                                                    bool check_boundary = true, bool with_corrections = true);

} // namespace ach
