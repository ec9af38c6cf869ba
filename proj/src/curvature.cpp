#include "ach/curvature.hpp"

#include "ach/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace ach {

namespace {

const Complex I{0.0, 1.0};

// Window of a jet that is known to all orders; operations clip it to the real data.
constexpr int kUnbounded = 1 << 20;

// Window for exactly known nonzero jets; far beyond any field window.
constexpr int kExactTrunc = 64;

LaurentJet exact_zero() { return LaurentJet::zero(kUnbounded); }
LaurentJet exact_const(Complex c) { return LaurentJet::constant(c, kExactTrunc); }

double jet_max(const LaurentJet& a) { return a.max_abs(a.min_deg(), a.trunc()); }

int sigma_frame(int J, int n)
{
    if (J < 2) {
        return J;
    }
    const int A = J - 2;
    return 2 + (A < n ? A + n : A - n);
}

} // namespace

int JetMatrix::trunc() const noexcept
{
    int t = std::numeric_limits<int>::max();
    for (const auto& x : a_) {
        t = std::min(t, x.trunc());
    }
    return t;
}

MatrixC JetMatrix::coefficient(int k) const
{
    MatrixC out(rows_, cols_);
    for (int i = 0; i < rows_; ++i) {
        for (int j = 0; j < cols_; ++j) {
            out(i, j) = (*this)(i, j).coefficient(k);
        }
    }
    return out;
}

JetMatrix invert_taylor(const JetMatrix& m)
{
    const int r = m.rows();
    if (r != m.cols()) {
        throw Error(ErrorCode::InvalidArgument, "invert_taylor needs a square matrix");
    }
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < r; ++j) {
            if (!m(i, j).is_zero() && m(i, j).min_deg() < 0) {
                throw Error(ErrorCode::InvalidArgument, "invert_taylor needs Taylor entries");
            }
        }
    }
    const int T = m.trunc();
    if (T <= 0) {
        throw Error(ErrorCode::LeadingZero, "matrix jet has an empty window");
    }
    std::vector<MatrixC> M;
    for (int k = 0; k < T; ++k) {
        M.push_back(m.coefficient(k));
    }
    Eigen::PartialPivLU<MatrixC> lu(M[0]);
    if (std::abs(lu.determinant()) < 1e-300) {
        throw Error(ErrorCode::LeadingZero, "constant term of the matrix jet is singular");
    }
    std::vector<MatrixC> N{lu.inverse()};
    for (int k = 1; k < T; ++k) {
        MatrixC acc = MatrixC::Zero(r, r);
        for (int j = 1; j <= k; ++j) {
            acc += M[static_cast<std::size_t>(j)] * N[static_cast<std::size_t>(k - j)];
        }
        N.push_back(-N[0] * acc);
    }
    JetMatrix out(r, r);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < r; ++j) {
            std::vector<Complex> v(static_cast<std::size_t>(T));
            for (int k = 0; k < T; ++k) {
                v[static_cast<std::size_t>(k)] = N[static_cast<std::size_t>(k)](i, j);
            }
            out(i, j) = LaurentJet(0, std::move(v));
        }
    }
    return out;
}

LaurentJet determinant(const JetMatrix& m)
{
    const int r = m.rows();
    if (r != m.cols()) {
        throw Error(ErrorCode::InvalidArgument, "determinant needs a square matrix");
    }
    JetMatrix a = m;
    LaurentJet det = exact_const(1.0);
    for (int col = 0; col < r; ++col) {
        // Pivot on the lowest order, then the largest leading coefficient.
        int piv = -1;
        for (int row = col; row < r; ++row) {
            const LaurentJet& x = a(row, col);
            if (x.is_zero()) {
                continue;
            }
            if (piv < 0 || x.min_deg() < a(piv, col).min_deg() ||
                (x.min_deg() == a(piv, col).min_deg() && std::abs(x.leading()) > std::abs(a(piv, col).leading()))) {
                piv = row;
            }
        }
        if (piv < 0) {
            return LaurentJet::zero(det.trunc());
        }
        if (piv != col) {
            for (int j = 0; j < r; ++j) {
                std::swap(a(piv, j), a(col, j));
            }
            det = -det;
        }
        const LaurentJet inv = invert(a(col, col));
        det = det * a(col, col);
        for (int row = col + 1; row < r; ++row) {
            if (a(row, col).is_zero()) {
                continue;
            }
            const LaurentJet f = a(row, col) * inv;
            for (int j = col; j < r; ++j) {
                a(row, j) -= f * a(col, j);
            }
        }
    }
    return det;
}

Fields boundary_fields(const PhmModel& m, int trunc)
{
    const int n2 = 2 * m.n();
    const MatrixC h = m.h_full();
    Fields f;
    f.s = LaurentJet::constant(4.0, trunc);
    f.ht = JetMatrix(n2, n2, LaurentJet::zero(trunc));
    for (int A = 0; A < n2; ++A) {
        for (int B = 0; B < n2; ++B) {
            f.ht(A, B) = LaurentJet::constant(h(A, B), trunc);
        }
    }
    f.eta.assign(static_cast<std::size_t>(n2), LaurentJet::zero(trunc));
    return f;
}

MetricJet assemble_metric(const PhmModel& m, const Fields& f, bool check_boundary)
{
    const int n = m.n();
    const int n2 = 2 * n;
    const int D = n2 + 2;
    if (f.ht.rows() != n2 || f.ht.cols() != n2 || static_cast<int>(f.eta.size()) != n2) {
        throw Error(ErrorCode::InvalidArgument, "field dimensions do not match the model");
    }
    if (check_boundary) {
        const double tol = 1e-10;
        if (f.s.trunc() <= 0 || (!f.s.is_zero() && f.s.min_deg() < 0) || std::abs(f.s.coefficient(0) - 4.0) > tol) {
            throw Error(ErrorCode::BoundaryMismatch, "s(0) must equal 4");
        }
        const MatrixC h = m.h_full();
        for (int A = 0; A < n2; ++A) {
            for (int B = 0; B < n2; ++B) {
                const LaurentJet& x = f.ht(A, B);
                if ((!x.is_zero() && x.min_deg() < 0) || std::abs(x.coefficient(0) - h(A, B)) > tol) {
                    throw Error(ErrorCode::BoundaryMismatch, "h~(0) must equal the Levi form");
                }
            }
            if (!f.eta[static_cast<std::size_t>(A)].is_zero() && f.eta[static_cast<std::size_t>(A)].min_deg() < 0) {
                throw Error(ErrorCode::BoundaryMismatch, "eta~ must be bounded at the boundary");
            }
        }
    }
    const int Tx = f.s.trunc() + 8;

    std::vector<LaurentJet> h_eta(static_cast<std::size_t>(n2), exact_zero());
    LaurentJet eta_h_eta = exact_zero();
    for (int A = 0; A < n2; ++A) {
        for (int B = 0; B < n2; ++B) {
            h_eta[static_cast<std::size_t>(A)] += f.ht(A, B) * f.eta[static_cast<std::size_t>(B)];
        }
        eta_h_eta += f.eta[static_cast<std::size_t>(A)] * h_eta[static_cast<std::size_t>(A)];
    }

    MetricJet mj;
    mj.n = n;
    mj.dim = D;
    mj.G = JetMatrix(D, D, exact_zero());
    mj.G(kInf, kInf) = LaurentJet::monomial(0.25, -2, Tx);
    mj.G(kT, kT) = f.s.shifted(-2) - eta_h_eta.shifted(1);
    for (int A = 0; A < n2; ++A) {
        mj.G(kT, frame_w(A)) = -h_eta[static_cast<std::size_t>(A)];
        mj.G(frame_w(A), kT) = mj.G(kT, frame_w(A));
        for (int B = 0; B < n2; ++B) {
            mj.G(frame_w(A), frame_w(B)) = -f.ht(A, B).shifted(-1);
        }
    }

    mj.ht_inv = invert_taylor(f.ht);
    const LaurentJet s_inv = invert(f.s);
    mj.Ginv = JetMatrix(D, D, exact_zero());
    mj.Ginv(kInf, kInf) = LaurentJet::monomial(4.0, 2, Tx);
    mj.Ginv(kT, kT) = s_inv.shifted(2);
    for (int A = 0; A < n2; ++A) {
        const LaurentJet eta_s = f.eta[static_cast<std::size_t>(A)] * s_inv;
        mj.Ginv(kT, frame_w(A)) = -eta_s.shifted(3);
        mj.Ginv(frame_w(A), kT) = mj.Ginv(kT, frame_w(A));
        for (int B = 0; B < n2; ++B) {
            mj.Ginv(frame_w(A), frame_w(B)) =
                -mj.ht_inv(A, B).shifted(1) + (eta_s * f.eta[static_cast<std::size_t>(B)]).shifted(4);
        }
    }
    return mj;
}

Complex frame_bracket(const PhmModel& m, int j, int k, int l)
{
    if (j == kInf || k == kInf || l == kInf) {
        return {};
    }
    return m.c()(j - 1, k - 1, l - 1);
}

ConnectionJet koszul(const MetricJet& mj, const PhmModel& m)
{
    const int D = mj.dim;
    JetMatrix dG(D, D);
    for (int K = 0; K < D; ++K) {
        for (int L = 0; L < D; ++L) {
            dG(K, L) = differentiate(mj.G(K, L));
        }
    }
    // Sparse list of nonzero frame brackets.
    struct Bracket {
        int j, k, l;
        Complex v;
    };
    std::vector<Bracket> br;
    for (int j = 1; j < D; ++j) {
        for (int k = 1; k < D; ++k) {
            for (int l = 1; l < D; ++l) {
                const Complex v = frame_bracket(m, j, k, l);
                if (v != Complex{}) {
                    br.push_back({j, k, l, v});
                }
            }
        }
    }
    // G([E_J, E_K], E_L) as a table indexed (J, K, L).
    std::vector<LaurentJet> GB(static_cast<std::size_t>(D * D * D), exact_zero());
    auto gb = [&](int j, int k, int l) -> LaurentJet& {
        return GB[static_cast<std::size_t>((j * D + k) * D + l)];
    };
    for (const auto& b : br) {
        for (int L = 0; L < D; ++L) {
            gb(b.j, b.k, L) += b.v * mj.G(b.l, L);
        }
    }

    ConnectionJet cj;
    cj.dim = D;
    cj.Gamma.assign(static_cast<std::size_t>(D * D * D), exact_zero());
    std::vector<LaurentJet> low(static_cast<std::size_t>(D));
    for (int J = 0; J < D; ++J) {
        for (int K = 0; K < D; ++K) {
            for (int L = 0; L < D; ++L) {
                LaurentJet v = gb(J, K, L) - gb(J, L, K) - gb(K, L, J);
                if (J == kInf) {
                    v += dG(K, L);
                }
                if (K == kInf) {
                    v += dG(J, L);
                }
                if (L == kInf) {
                    v -= dG(J, K);
                }
                low[static_cast<std::size_t>(L)] = 0.5 * v;
            }
            for (int M = 0; M < D; ++M) {
                LaurentJet acc = exact_zero();
                for (int L = 0; L < D; ++L) {
                    acc += mj.Ginv(M, L) * low[static_cast<std::size_t>(L)];
                }
                cj.Gamma[static_cast<std::size_t>((J * D + K) * D + M)] = std::move(acc);
            }
        }
    }
    return cj;
}

CurvatureJet curvature(const ConnectionJet& cj, const MetricJet& mj, const PhmModel& m, bool full)
{
    const int D = cj.dim;
    const int n = mj.n;
    struct Bracket {
        int j, k, l;
        Complex v;
    };
    std::vector<Bracket> br;
    for (int j = 1; j < D; ++j) {
        for (int k = 1; k < D; ++k) {
            for (int l = 1; l < D; ++l) {
                const Complex v = frame_bracket(m, j, k, l);
                if (v != Complex{}) {
                    br.push_back({j, k, l, v});
                }
            }
        }
    }
    auto G = [&](int j, int k, int l) -> const LaurentJet& { return cj(j, k, l); };

    CurvatureJet cv;
    cv.dim = D;
    std::vector<LaurentJet> tr(static_cast<std::size_t>(D), exact_zero());
    for (int M = 0; M < D; ++M) {
        for (int J = 0; J < D; ++J) {
            tr[static_cast<std::size_t>(M)] += G(J, M, J);
        }
    }

    cv.Ric = JetMatrix(D, D);
    for (int K = 0; K < D; ++K) {
        for (int L = 0; L < D; ++L) {
            LaurentJet v = differentiate(G(K, L, kInf));
            if (K == kInf) {
                v -= differentiate(tr[static_cast<std::size_t>(L)]);
            }
            for (int M = 0; M < D; ++M) {
                v += G(K, L, M) * tr[static_cast<std::size_t>(M)];
                for (int J = 0; J < D; ++J) {
                    v -= G(J, L, M) * G(K, M, J);
                }
            }
            for (const auto& b : br) {
                // -c_JK^M Gamma_ML^J with J = b.j, K = b.k, M = b.l
                if (b.k == K) {
                    v -= b.v * G(b.l, L, b.j);
                }
            }
            cv.Ric(K, L) = std::move(v);
        }
    }

    cv.Scal = exact_zero();
    cv.Ein = JetMatrix(D, D);
    const double lambda = 2.0 * (n + 2);
    for (int K = 0; K < D; ++K) {
        for (int L = 0; L < D; ++L) {
            cv.Scal += mj.Ginv(K, L) * cv.Ric(K, L);
            cv.Ein(K, L) = cv.Ric(K, L) + lambda * mj.G(K, L);
        }
    }

    if (full) {
        cv.Riem.assign(static_cast<std::size_t>(D * D * D * D), exact_zero());
        for (int J = 0; J < D; ++J) {
            for (int K = 0; K < D; ++K) {
                for (int L = 0; L < D; ++L) {
                    for (int P = 0; P < D; ++P) {
                        LaurentJet v = exact_zero();
                        if (J == kInf) {
                            v += differentiate(G(K, L, P));
                        }
                        if (K == kInf) {
                            v -= differentiate(G(J, L, P));
                        }
                        for (int M = 0; M < D; ++M) {
                            v += G(K, L, M) * G(J, M, P) - G(J, L, M) * G(K, M, P);
                            const Complex c = frame_bracket(m, J, K, M);
                            if (c != Complex{}) {
                                v -= c * G(M, L, P);
                            }
                        }
                        cv.Riem[static_cast<std::size_t>(((J * D + K) * D + L) * D + P)] = std::move(v);
                    }
                }
            }
        }
    }
    return cv;
}

ConnectionResiduals connection_residuals(const ConnectionJet& cj, const MetricJet& mj, const PhmModel& m)
{
    const int D = cj.dim;
    ConnectionResiduals r;
    for (int J = 0; J < D; ++J) {
        for (int K = 0; K < D; ++K) {
            for (int L = 0; L < D; ++L) {
                LaurentJet v = J == kInf ? differentiate(mj.G(K, L)) : exact_zero();
                for (int M = 0; M < D; ++M) {
                    v -= cj(J, K, M) * mj.G(M, L) + cj(J, L, M) * mj.G(M, K);
                }
                r.metric = std::max(r.metric, jet_max(v));
                LaurentJet t = cj(J, K, L) - cj(K, J, L);
                t -= exact_const(frame_bracket(m, J, K, L));
                r.torsion = std::max(r.torsion, jet_max(t));
            }
        }
    }
    return r;
}

double bianchi_residual(const CurvatureJet& cv)
{
    if (cv.Riem.empty()) {
        throw Error(ErrorCode::InvalidArgument, "bianchi_residual needs the full Riemann tensor");
    }
    const int D = cv.dim;
    double r = 0.0;
    for (int J = 0; J < D; ++J) {
        for (int K = 0; K < D; ++K) {
            for (int L = 0; L < D; ++L) {
                for (int P = 0; P < D; ++P) {
                    r = std::max(r, jet_max(cv.riem(J, K, L, P) + cv.riem(K, L, J, P) + cv.riem(L, J, K, P)));
                }
            }
        }
    }
    return r;
}

double ein_reality_residual(const CurvatureJet& cv, const PhmModel& m)
{
    const int D = cv.dim;
    const int n = m.n();
    double r = 0.0;
    for (int J = 0; J < D; ++J) {
        for (int K = 0; K < D; ++K) {
            r = std::max(r, max_coeff_diff(cv.Ein(sigma_frame(J, n), sigma_frame(K, n)), cv.Ein(J, K).conj()));
        }
    }
    return r;
}

std::vector<Prop41Entry> crosscheck_prop41_detailed(const PhmModel& m, const TwtConnection& twt, const Fields& f,
                                                    EtaLowering lowering, bool check_boundary, bool with_corrections)
{
    const int n = m.n();
    const int n2 = 2 * n;
    const int D = n2 + 2;
    const MetricJet mj = assemble_metric(m, f, check_boundary);
    const ConnectionJet cj = koszul(mj, m);
    const MatrixC h = m.h_full();

    // Moving frame e_a = P_a^b E_b: e_inf = E_inf, e_0 = E_0 - phi eta^A E_A, e_A = E_A.
    JetMatrix P(D, D, exact_zero());
    JetMatrix Pinv(D, D, exact_zero());
    for (int a = 0; a < D; ++a) {
        P(a, a) = exact_const(1.0);
        Pinv(a, a) = P(a, a);
    }
    for (int A = 0; A < n2; ++A) {
        P(kT, frame_w(A)) = -f.eta[static_cast<std::size_t>(A)].shifted(1);
        Pinv(kT, frame_w(A)) = f.eta[static_cast<std::size_t>(A)].shifted(1);
    }
    // psi[(K * D + J) * D + I] = psi_K^J(e_I) from the Koszul side.
    std::vector<LaurentJet> psi(static_cast<std::size_t>(D * D * D), exact_zero());
    for (int I = 0; I < D; ++I) {
        for (int K = 0; K < D; ++K) {
            // nabla_{e_I} e_K in the fixed frame.
            std::vector<LaurentJet> v(static_cast<std::size_t>(D), exact_zero());
            for (int a = 0; a < D; ++a) {
                if (P(I, a).is_zero()) {
                    continue;
                }
                for (int c = 0; c < D; ++c) {
                    LaurentJet t = exact_zero();
                    if (a == kInf) {
                        t += differentiate(P(K, c));
                    }
                    for (int b = 0; b < D; ++b) {
                        if (!P(K, b).is_zero()) {
                            t += P(K, b) * cj(a, b, c);
                        }
                    }
                    v[static_cast<std::size_t>(c)] += P(I, a) * t;
                }
            }
            for (int J = 0; J < D; ++J) {
                LaurentJet t = exact_zero();
                for (int c = 0; c < D; ++c) {
                    if (!Pinv(c, J).is_zero()) {
                        t += v[static_cast<std::size_t>(c)] * Pinv(c, J);
                    }
                }
                psi[static_cast<std::size_t>((K * D + J) * D + I)] = std::move(t);
            }
        }
    }

    // Closed-form side.
    const LaurentJet phi = LaurentJet::monomial(1.0, 1, kExactTrunc);
    const LaurentJet one = exact_const(1.0);
    const LaurentJet& s = f.s;
    const LaurentJet s_inv = invert(s);
    const LaurentJet Ns = differentiate(s);
    const JetMatrix& ht = f.ht;
    const JetMatrix& hti = mj.ht_inv;
    auto eps = [n](int A) { return A < n ? 1.0 : -1.0; };
    std::vector<LaurentJet> zeta(static_cast<std::size_t>(n2));
    std::vector<LaurentJet> eta_low(static_cast<std::size_t>(n2), exact_zero());
    std::vector<LaurentJet> h_zeta(static_cast<std::size_t>(n2), exact_zero());
    std::vector<LaurentJet> eta_ht(static_cast<std::size_t>(n2), exact_zero());
    for (int A = 0; A < n2; ++A) {
        const LaurentJet& e = f.eta[static_cast<std::size_t>(A)];
        zeta[static_cast<std::size_t>(A)] = e + (differentiate(e) * phi);
    }
    for (int A = 0; A < n2; ++A) {
        for (int B = 0; B < n2; ++B) {
            const LaurentJet hAB = lowering == EtaLowering::Evolving ? ht(A, B) : exact_const(h(A, B));
            eta_low[static_cast<std::size_t>(A)] += hAB * f.eta[static_cast<std::size_t>(B)];
            h_zeta[static_cast<std::size_t>(A)] += ht(A, B) * zeta[static_cast<std::size_t>(B)];
            eta_ht[static_cast<std::size_t>(A)] += ht(A, B) * f.eta[static_cast<std::size_t>(B)];
        }
    }
    // g_AB = -phi^{-1} h~_AB and its phi-derivative; g^AB = -phi h~^{-1}.
    JetMatrix g(n2, n2), Ng(n2, n2), ginv(n2, n2);
    for (int A = 0; A < n2; ++A) {
        for (int B = 0; B < n2; ++B) {
            g(A, B) = -ht(A, B).shifted(-1);
            Ng(A, B) = differentiate(g(A, B));
            ginv(A, B) = -hti(A, B).shifted(1);
        }
    }
    auto om0 = [&](int A, int B) { return twt.om(A, B, 0); };
    auto omC = [&](int A, int B, int C) { return twt.om(A, B, 1 + C); };

    std::vector<LaurentJet> tab(static_cast<std::size_t>(D * D * D), exact_zero());
    auto put = [&](int K, int J, int I) -> LaurentJet& { return tab[static_cast<std::size_t>((K * D + J) * D + I)]; };

    // psi_inf^inf, psi_inf^0, psi_inf^A
    put(kInf, kInf, kInf) = -phi.shifted(-2);
    put(kInf, kT, kT) = -one.shifted(-1) + 0.5 * (s_inv * Ns);
    for (int A = 0; A < n2; ++A) {
        put(kInf, kT, frame_w(A)) = -0.5 * (s_inv * h_zeta[static_cast<std::size_t>(A)]).shifted(1);
        put(kInf, frame_w(A), kT) = 0.5 * zeta[static_cast<std::size_t>(A)];
        for (int C = 0; C < n2; ++C) {
            LaurentJet t = exact_zero();
            for (int B = 0; B < n2; ++B) {
                t += ginv(A, B) * Ng(B, C);
            }
            put(kInf, frame_w(A), frame_w(C)) = 0.5 * t;
        }
    }
    // psi_0^inf, psi_0^0
    put(kT, kInf, kT) = 4.0 * s.shifted(-1) - 2.0 * Ns;
    for (int A = 0; A < n2; ++A) {
        put(kT, kInf, frame_w(A)) = 2.0 * h_zeta[static_cast<std::size_t>(A)].shifted(1);
    }
    put(kT, kT, kInf) = -one.shifted(-1) + 0.5 * (s_inv * Ns);
    // psi_0^A
    std::vector<std::vector<LaurentJet>> X(static_cast<std::size_t>(n2),
                                           std::vector<LaurentJet>(static_cast<std::size_t>(n2), exact_zero()));
    for (int C = 0; C < n2; ++C) {
        for (int Dd = 0; Dd < n2; ++Dd) {
            LaurentJet x = exact_const(-om0(C, Dd) + twt.A(Dd, C));
            for (int E = 0; E < n2; ++E) {
                x += (omC(C, Dd, E) - omC(E, Dd, C)) * f.eta[static_cast<std::size_t>(E)].shifted(1);
            }
            x += (I * eps(C)) * (f.eta[static_cast<std::size_t>(Dd)] * eta_low[static_cast<std::size_t>(C)]).shifted(2);
            X[static_cast<std::size_t>(C)][static_cast<std::size_t>(Dd)] = std::move(x);
        }
    }
    for (int A = 0; A < n2; ++A) {
        put(kT, frame_w(A), kInf) = -0.5 * zeta[static_cast<std::size_t>(A)];
        LaurentJet t0 = exact_zero();
        for (int B = 0; B < n2; ++B) {
            t0 += hti(A, B) * (-I * eps(B)) * eta_low[static_cast<std::size_t>(B)];
        }
        put(kT, frame_w(A), kT) = s * t0;
        for (int C = 0; C < n2; ++C) {
            LaurentJet t = exact_zero();
            for (int B = 0; B < n2; ++B) {
                LaurentJet inner = exact_zero();
                for (int Dd = 0; Dd < n2; ++Dd) {
                    inner += ht(B, Dd) * X[static_cast<std::size_t>(C)][static_cast<std::size_t>(Dd)];
                    inner += ht(C, Dd) * X[static_cast<std::size_t>(B)][static_cast<std::size_t>(Dd)];
                }
                inner -= (I * eps(C) * h(B, C)) * s.shifted(-1);
                t += hti(A, B) * inner;
            }
            put(kT, frame_w(A), frame_w(C)) = 0.5 * t;
        }
    }
    // psi_A^inf, psi_A^0
    for (int A = 0; A < n2; ++A) {
        put(frame_w(A), kInf, kT) = 2.0 * h_zeta[static_cast<std::size_t>(A)].shifted(1);
        put(frame_w(A), kT, kInf) = -0.5 * (s_inv * h_zeta[static_cast<std::size_t>(A)]).shifted(1);
        put(frame_w(A), kT, kT) = (-I * eps(A)) * eta_low[static_cast<std::size_t>(A)].shifted(1);
        for (int C = 0; C < n2; ++C) {
            put(frame_w(A), kInf, frame_w(C)) = -2.0 * Ng(A, C).shifted(2);
            LaurentJet t = exact_zero();
            for (int B = 0; B < n2; ++B) {
                t += ht(A, B) * put(kT, frame_w(B), frame_w(C));
            }
            put(frame_w(A), kT, frame_w(C)) = (s_inv * t).shifted(1);
        }
    }
    // psi_A^B
    for (int A = 0; A < n2; ++A) {
        for (int B = 0; B < n2; ++B) {
            LaurentJet tinf = exact_zero();
            for (int C = 0; C < n2; ++C) {
                tinf += hti(B, C) * differentiate(ht(A, C).shifted(-1));
            }
            put(frame_w(A), frame_w(B), kInf) = 0.5 * tinf.shifted(1);

            LaurentJet t0 = put(kT, frame_w(B), frame_w(A)) +
                            exact_const(om0(A, B) - twt.A(B, A));
            for (int C = 0; C < n2; ++C) {
                t0 += (omC(C, B, A) - omC(A, B, C)) * f.eta[static_cast<std::size_t>(C)].shifted(1);
            }
            t0 -= (I * eps(A)) * (f.eta[static_cast<std::size_t>(B)] * eta_low[static_cast<std::size_t>(A)]).shifted(2);
            put(frame_w(A), frame_w(B), kT) = std::move(t0);

            for (int C = 0; C < n2; ++C) {
                LaurentJet t = exact_zero();
                for (int Dd = 0; Dd < n2; ++Dd) {
                    LaurentJet inner = exact_zero();
                    for (int E = 0; E < n2; ++E) {
                        inner -= ht(A, E) * (omC(Dd, E, C) - omC(C, E, Dd));
                        inner -= ht(C, E) * (omC(Dd, E, A) - omC(A, E, Dd));
                        inner -= ht(Dd, E) * (omC(C, E, A) - omC(A, E, C));
                    }
                    if (with_corrections) {
                        // The [W_C, W_A] ~ theta-direction brackets seen through e_0 = T - phi eta^E W_E.
                        LaurentJet corr = (eps(C) * h(C, A)) * eta_ht[static_cast<std::size_t>(Dd)] -
                                          (eps(C) * h(C, Dd)) * eta_ht[static_cast<std::size_t>(A)] -
                                          (eps(A) * h(A, Dd)) * eta_ht[static_cast<std::size_t>(C)];
                        inner -= I * corr.shifted(1);
                    }
                    t += hti(B, Dd) * inner;
                }
                put(frame_w(A), frame_w(B), frame_w(C)) = 0.5 * t;
            }
        }
    }

    std::vector<Prop41Entry> out;
    for (int K = 0; K < D; ++K) {
        for (int J = 0; J < D; ++J) {
            for (int I2 = 0; I2 < D; ++I2) {
                const std::size_t i = static_cast<std::size_t>((K * D + J) * D + I2);
                out.push_back({K, J, I2, jet_max(tab[i] - psi[i])});
            }
        }
    }
    return out;
}

double crosscheck_prop41(const PhmModel& m, const TwtConnection& twt, const Fields& f, EtaLowering lowering,
                         bool check_boundary, bool with_corrections)
{
    double worst = 0.0;
    for (const auto& e : crosscheck_prop41_detailed(m, twt, f, lowering, check_boundary, with_corrections)) {
        worst = std::max(worst, e.residual);
    }
    return worst;
}

} // namespace ach
