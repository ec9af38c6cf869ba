#include "ach/solver.hpp"

#include "ach/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ach {

namespace {

struct Layout {
    int n2 = 0;
    std::vector<std::pair<int, int>> pairs;  // upper triangle A <= B

    explicit Layout(int n) : n2(2 * n)
    {
        for (int A = 0; A < n2; ++A) {
            for (int B = A; B < n2; ++B) {
                pairs.emplace_back(A, B);
            }
        }
    }
    int n_pairs() const { return static_cast<int>(pairs.size()); }
    int size() const { return 1 + n_pairs() + n2; }
    int h_index(int p) const { return 1 + p; }
    int eta_index(int A) const { return 1 + n_pairs() + A; }
};

LaurentJet widen(const LaurentJet& a, int trunc)
{
    if (trunc <= a.trunc()) {
        return a;
    }
    if (a.is_zero()) {
        return LaurentJet::zero(trunc);
    }
    std::vector<Complex> v(a.coeffs().begin(), a.coeffs().end());
    v.resize(static_cast<std::size_t>(trunc - a.min_deg()));
    return LaurentJet(a.min_deg(), std::move(v));
}

Fields map_fields(const Fields& f, int trunc, bool widen_window)
{
    Fields g = f;
    auto apply = [&](LaurentJet& x) { x = widen_window ? widen(x, trunc) : x.truncated(trunc); };
    apply(g.s);
    for (int A = 0; A < g.ht.rows(); ++A) {
        for (int B = 0; B < g.ht.cols(); ++B) {
            apply(g.ht(A, B));
        }
    }
    for (auto& e : g.eta) {
        apply(e);
    }
    return g;
}

// Taylor order of the eta~ unknown of stage k: stage 0 and stage 1 both carry eta~_0.
int eta_order(int k) { return k == 0 ? 0 : k - 1; }

void add_coefficient(LaurentJet& x, int k, Complex v)
{
    x.set_coefficient(k, x.coefficient(k) + v);
}

// Writes value into the u-slot `idx` of stage k (adds to the current coefficient).
void add_unknown(Fields& f, const Layout& lay, int k, int idx, Complex v)
{
    if (idx == 0) {
        add_coefficient(f.s, k, v);
    } else if (idx < 1 + lay.n_pairs()) {
        const auto [A, B] = lay.pairs[static_cast<std::size_t>(idx - 1)];
        add_coefficient(f.ht(A, B), k, v);
        if (A != B) {
            f.ht(B, A) = f.ht(A, B);
        }
    } else {
        add_coefficient(f.eta[static_cast<std::size_t>(idx - 1 - lay.n_pairs())], eta_order(k), v);
    }
}

CurvatureJet evaluate(const PhmModel& m, const Fields& f, MetricJet* metric_out = nullptr)
{
    MetricJet mj = assemble_metric(m, f);
    const ConnectionJet cj = koszul(mj, m);
    CurvatureJet cv = curvature(cj, mj, m);
    if (metric_out) {
        *metric_out = std::move(mj);
    }
    return cv;
}

// Full equation vector of stage k: (c_{k-2}(Ein_00), c_{k-1}(Ein_AB) for A <= B, c_{k-1}(Ein_0A)),
// with c_0(Ein_0A) at stage 0.
VectorC equations(const CurvatureJet& cv, const Layout& lay, int k)
{
    VectorC e(lay.size());
    e(0) = cv.Ein(kT, kT).coefficient(k - 2);
    for (int p = 0; p < lay.n_pairs(); ++p) {
        const auto [A, B] = lay.pairs[static_cast<std::size_t>(p)];
        e(lay.h_index(p)) = cv.Ein(frame_w(A), frame_w(B)).coefficient(k - 1);
    }
    for (int A = 0; A < lay.n2; ++A) {
        e(lay.eta_index(A)) = cv.Ein(kT, frame_w(A)).coefficient(eta_order(k));
    }
    return e;
}

VectorC stage_equations(const PhmModel& m, const Fields& f, const Layout& lay, int k, int trunc)
{
    // Stage equations only see coefficients below k + 2; a narrow window is much cheaper.
    const int narrow = std::min(trunc, std::max(k + 2, 2));
    try {
        return equations(evaluate(m, map_fields(f, narrow, false)), lay, k);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::OutOfWindow || narrow == trunc) {
            throw;
        }
    }
    return equations(evaluate(m, f), lay, k);
}

MatrixC sym_from_pairs(const Layout& lay, const VectorC& e, int offset)
{
    MatrixC X(lay.n2, lay.n2);
    for (int p = 0; p < lay.n_pairs(); ++p) {
        const auto [A, B] = lay.pairs[static_cast<std::size_t>(p)];
        X(A, B) = e(offset + p);
        X(B, A) = e(offset + p);
    }
    return X;
}

double pivot_ratio(const Eigen::PartialPivLU<MatrixC>& lu)
{
    const auto d = lu.matrixLU().diagonal().cwiseAbs();
    const double mx = d.maxCoeff();
    return mx > 0.0 ? d.minCoeff() / mx : 0.0;
}

// Selected unknowns and the reduced equation map of one stage.
struct StageSystem {
    std::vector<int> unknowns;
    bool tracefree = false;
    bool use_s = false;
    bool use_h = false;
    bool use_eta = false;
};

VectorC reduce(const StageSystem& sys, const Layout& lay, const MatrixC& hinv, const MatrixC& h, const VectorC& e,
               const Fields& f, int k)
{
    std::vector<Complex> out;
    if (sys.use_s) {
        out.push_back(e(0));
    }
    if (sys.use_h) {
        if (sys.tracefree) {
            const MatrixC E = sym_from_pairs(lay, e, 1);
            const Complex tr = (hinv * E).trace() / static_cast<double>(lay.n2);
            const MatrixC P = E - tr * h;
            for (const auto& [A, B] : lay.pairs) {
                out.push_back(P(A, B));
            }
            // Pins the trace of the new coefficient to zero.
            MatrixC X(lay.n2, lay.n2);
            for (int A = 0; A < lay.n2; ++A) {
                for (int B = 0; B < lay.n2; ++B) {
                    X(A, B) = f.ht(A, B).coefficient(k);
                }
            }
            out.push_back((hinv * X).trace());
        } else {
            for (int p = 0; p < lay.n_pairs(); ++p) {
                out.push_back(e(lay.h_index(p)));
            }
        }
    }
    if (sys.use_eta) {
        for (int A = 0; A < lay.n2; ++A) {
            out.push_back(e(lay.eta_index(A)));
        }
    }
    return Eigen::Map<VectorC>(out.data(), static_cast<Eigen::Index>(out.size()));
}

StageRecord solve_stage(SolverState& st, int k, const StageBlocks& blocks, bool obstructed)
{
    const PhmModel& m = st.model;
    const Layout lay(m.n());
    const MatrixC h = m.h_full();
    const MatrixC hinv = h.inverse();
    StageSystem sys;
    sys.use_s = blocks.s;
    sys.use_h = blocks.h;
    sys.tracefree = blocks.h_tracefree_only;
    sys.use_eta = blocks.eta;
    if (sys.use_s) {
        sys.unknowns.push_back(0);
    }
    if (sys.use_h) {
        for (int p = 0; p < lay.n_pairs(); ++p) {
            sys.unknowns.push_back(lay.h_index(p));
        }
    }
    if (sys.use_eta) {
        for (int A = 0; A < lay.n2; ++A) {
            sys.unknowns.push_back(lay.eta_index(A));
        }
    }

    auto residual_at = [&](const Fields& f) {
        return reduce(sys, lay, hinv, h, stage_equations(m, f, lay, k, st.trunc), f, k);
    };
    const VectorC e0 = residual_at(st.fields);
    const auto nu = static_cast<Eigen::Index>(sys.unknowns.size());
    MatrixC M(e0.size(), nu);
    for (Eigen::Index j = 0; j < nu; ++j) {
        Fields f = st.fields;
        add_unknown(f, lay, k, sys.unknowns[static_cast<std::size_t>(j)], 1.0);
        M.col(j) = residual_at(f) - e0;
    }

    StageRecord rec;
    rec.k = k;
    rec.unknowns = static_cast<int>(nu);
    rec.residual_before = e0.cwiseAbs().maxCoeff();

    // Blocks whose factor vanishes are solved in the least-squares sense; the
    // residual check below decides whether the stage equations were consistent.
    Eigen::CompleteOrthogonalDecomposition<MatrixC> cod;
    Eigen::PartialPivLU<MatrixC> lu;
    bool use_lu = false;
    if (M.rows() == M.cols()) {
        lu.compute(M);
        rec.pivot_ratio = pivot_ratio(lu);
        use_lu = rec.pivot_ratio >= 1e-8;
    }
    if (!use_lu) {
        cod.setThreshold(1e-8);
        cod.compute(M);
        rec.rank = static_cast<int>(cod.rank());
        if (M.rows() != M.cols()) {
            const auto R = cod.matrixQTZ().diagonal().head(std::max<Eigen::Index>(cod.rank(), 1)).cwiseAbs();
            rec.pivot_ratio = R.minCoeff() / R.maxCoeff();
        }
    } else {
        rec.rank = static_cast<int>(nu);
    }
    rec.rank_deficient = rec.rank < nu;
    auto solve_linear = [&](const VectorC& rhs) -> VectorC { return use_lu ? VectorC(lu.solve(rhs)) : VectorC(cod.solve(rhs)); };

    VectorC e = e0;
    const double target = st.opts.tol * (1.0 + rec.residual_before) * 1e-3;
    for (int iter = 0; iter < 4; ++iter) {
        const VectorC du = solve_linear(-e);
        for (Eigen::Index j = 0; j < nu; ++j) {
            add_unknown(st.fields, lay, k, sys.unknowns[static_cast<std::size_t>(j)], du(j));
        }
        e = residual_at(st.fields);
        if (e.cwiseAbs().maxCoeff() <= target) {
            break;
        }
    }
    rec.residual_after = e.cwiseAbs().maxCoeff();
    rec.consistent = rec.residual_after <= st.opts.tol * (1.0 + rec.residual_before);
    if (!rec.consistent && !obstructed) {
        throw Error(ErrorCode::SingularStage, "stage " + std::to_string(k) + " is singular (rank " +
                                                  std::to_string(rec.rank) + " of " + std::to_string(nu) +
                                                  ") and left residual " + std::to_string(rec.residual_after));
    }
    return rec;
}

int first_exceeding(const LaurentJet& x, double tol, int lo)
{
    for (int j = std::min(lo, x.min_deg()); j < x.trunc(); ++j) {
        if (std::abs(x.coefficient(j)) > tol) {
            return j;
        }
    }
    return x.trunc();
}

} // namespace

void refresh(SolverState& state)
{
    state.curv = evaluate(state.model, state.fields, &state.metric);
}

StageBlocks stage_blocks(int n, int k, bool extend_tracefree)
{
    StageBlocks b;
    if (k == 0) {
        b.eta = true;
    } else if (k <= n) {
        b.s = b.h = b.eta = true;
    } else if (k == n + 1) {
        b.s = b.h = true;
    } else if (k == n + 2 && extend_tracefree) {
        b.h = true;
        b.h_tracefree_only = true;
    }
    return b;
}

SolverState solve(const PhmModel& m, const SolverOptions& opts)
{
    const ValidationReport rep = validate(m);
    if (!rep.ok()) {
        throw Error(ErrorCode::ValidationFailed, rep.summary());
    }
    if (opts.trunc_extra < 3) {
        throw Error(ErrorCode::InvalidArgument, "trunc_extra must be at least 3");
    }
    const int n = m.n();
    SolverState st{m, opts, {}, n + opts.trunc_extra, -1, {}, {}, {}};
    st.fields = boundary_fields(m, st.trunc);
    const int last = opts.extend_tracefree ? n + 2 : n + 1;
    for (int k = 0; k <= last; ++k) {
        st.stages.push_back(solve_stage(st, k, stage_blocks(n, k, opts.extend_tracefree), k > n));
        st.solved_through = k;
    }
    refresh(st);
    return st;
}

const BlockFactor* ProbeResult::find(const std::string& name) const
{
    for (const auto& f : factors) {
        if (f.block == name) {
            return &f;
        }
    }
    return nullptr;
}

double predicted_factor(const std::string& block, int n, int k)
{
    const double kk = k;
    if (block == "s" || block == "s_schur") {
        return 2.0 * (n + 2 - kk);
    }
    if (block == "tracefree" || block == "hol") {
        return kk * kk - (n + 1) * kk - 2.0;
    }
    if (block == "trace") {
        return kk * kk - (2 * n + 1) * kk - 2.0;
    }
    if (block == "eta") {
        return (kk - (n + 1)) * (kk + 2.0);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown block " + block);
}

ProbeResult probe_matrix(const SolverState& state, int k)
{
    const PhmModel& m = state.model;
    const int n = m.n();
    const Layout lay(n);
    const MatrixC h = m.h_full();
    const MatrixC hinv = h.inverse();
    const int trunc = std::max(state.trunc, k + 3);
    const Fields base = map_fields(state.fields, trunc, true);

    const VectorC e0 = stage_equations(m, base, lay, k, trunc);
    ProbeResult pr;
    pr.k = k;
    pr.matrix = MatrixC(lay.size(), lay.size());
    pr.matrix.setZero();
    for (int j = 0; j < lay.size(); ++j) {
        if (k == 0 && j < lay.eta_index(0)) {
            continue;  // s_0 and h~_0 are boundary data
        }
        Fields f = base;
        add_unknown(f, lay, k, j, 1.0);
        pr.matrix.col(j) = stage_equations(m, f, lay, k, trunc) - e0;
    }
    const MatrixC& M = pr.matrix;
    const double scale = M.cwiseAbs().maxCoeff();
    const double tiny = 1e-8 * std::max(1.0, scale);
    {
        Eigen::PartialPivLU<MatrixC> lu(M);
        pr.pivot_ratio = pivot_ratio(lu);
        pr.singular = pr.pivot_ratio < 1e-8;
    }

    const int np = lay.n_pairs();
    auto pair_vector = [&](const MatrixC& X) {
        VectorC x(np);
        for (int p = 0; p < np; ++p) {
            x(p) = X(lay.pairs[static_cast<std::size_t>(p)].first, lay.pairs[static_cast<std::size_t>(p)].second);
        }
        return x;
    };
    const MatrixC Mhh = M.block(1, 1, np, np);
    auto h_response = [&](const MatrixC& X) { return sym_from_pairs(lay, Mhh * pair_vector(X), 0); };
    auto add = [&](const std::string& name, Complex raw, Complex scaled, double off) {
        pr.factors.push_back({name, raw, scaled, off, std::abs(raw) < tiny});
    };

    if (k >= 1) {
        // The s column and row also reach the h~ block; that coupling is the offblock part.
        const double off = std::max(M.block(0, 1, 1, np).cwiseAbs().maxCoeff(), M.block(1, 0, np, 1).cwiseAbs().maxCoeff());
        const Complex raw = M(0, 0);
        add("s", raw, raw / static_cast<double>(k), off);
    }
    if (k >= 1) {
        const MatrixC E = h_response(h);
        const Complex raw = (hinv * E).trace() / static_cast<double>(lay.n2);
        add("trace", raw, raw / 2.0, (E - raw * h).cwiseAbs().maxCoeff());
        // s after eliminating the trace direction of h~ it couples to.
        const Complex b = (M.block(0, 1, 1, np) * pair_vector(h))(0);
        const Complex c = (hinv * sym_from_pairs(lay, M.block(1, 0, np, 1), 0)).trace() / static_cast<double>(lay.n2);
        if (std::abs(raw) > tiny) {
            const Complex eff = M(0, 0) - b * c / raw;
            add("s_schur", eff, eff / static_cast<double>(k), 0.0);
        }
    }
    if (k >= 1 && n >= 2) {
        MatrixC S = MatrixC::Zero(lay.n2, lay.n2);
        S(0, n + 1) = S(n + 1, 0) = 1.0;
        const MatrixC X = S - (hinv * S).trace() / static_cast<double>(lay.n2) * h;
        const MatrixC E = h_response(X);
        const Complex raw = (X.adjoint() * E).trace() / (X.adjoint() * X).trace();
        add("tracefree", raw, raw / 2.0, (E - raw * X).cwiseAbs().maxCoeff());
    }
    if (k >= 1) {
        MatrixC X = MatrixC::Zero(lay.n2, lay.n2);
        X(0, 0) = 1.0;
        const MatrixC E = h_response(X);
        const Complex raw = E(0, 0);
        add("hol", raw, raw / 2.0, (E - raw * X).cwiseAbs().maxCoeff());
    }
    {
        const MatrixC Mee = M.block(1 + np, 1 + np, lay.n2, lay.n2);
        const Complex raw = (hinv * Mee).trace() / static_cast<double>(lay.n2);
        add("eta", raw, raw / 2.0, (Mee - raw * h).cwiseAbs().maxCoeff());
    }
    return pr;
}

Obstructions obstructions(const SolverState& state)
{
    const int n = state.model.n();
    Obstructions ob;
    ob.B = state.curv.Ein(kT, kT).coefficient(n);
    for (int A = 0; A < 2 * n; ++A) {
        ob.O.push_back(state.curv.Ein(kT, frame_w(A)).coefficient(n + 1));
    }
    return ob;
}

SolverState gauge_perturb(const SolverState& state, Complex kappa, const MatrixC& lambda, const VectorC& mu)
{
    const int n = state.model.n();
    const int n2 = 2 * n;
    if (lambda.rows() != n2 || lambda.cols() != n2 || mu.size() != n2) {
        throw Error(ErrorCode::InvalidArgument, "gauge perturbation has the wrong shape");
    }
    SolverState out = state;
    add_coefficient(out.fields.s, n + 2, kappa);
    for (int A = 0; A < n2; ++A) {
        for (int B = 0; B < n2; ++B) {
            add_coefficient(out.fields.ht(A, B), n + 2, 0.5 * (lambda(A, B) + lambda(B, A)));
        }
        add_coefficient(out.fields.eta[static_cast<std::size_t>(A)], n + 1, mu(A));
    }
    refresh(out);
    return out;
}

RescaleReport rescale_check(const PhmModel& m, double upsilon, const SolverOptions& opts)
{
    const int n = m.n();
    RescaleReport r;
    r.upsilon = upsilon;
    r.original = obstructions(solve(m, opts));
    r.rescaled = obstructions(solve(rescale_contact_form(m, upsilon), opts));
    const double w = std::exp(2.0 * (n + 2) * upsilon);
    r.B_mismatch = std::abs(r.rescaled.B * w - r.original.B);
    for (std::size_t A = 0; A < r.original.O.size(); ++A) {
        r.O_mismatch = std::max(r.O_mismatch, std::abs(r.rescaled.O[A] * w - r.original.O[A]));
    }
    return r;
}

std::vector<OrderEntry> residual_orders(const SolverState& state, double tol)
{
    const int n = state.model.n();
    const int n2 = 2 * n;
    const JetMatrix& E = state.curv.Ein;
    std::vector<OrderEntry> out;
    auto entry = [&](const std::string& name, int required, const std::vector<const LaurentJet*>& jets) {
        OrderEntry e;
        e.component = name;
        e.required = required;
        e.window = std::numeric_limits<int>::max();
        int first = std::numeric_limits<int>::max();
        for (const LaurentJet* j : jets) {
            e.window = std::min(e.window, j->trunc());
            const int f = first_exceeding(*j, tol, -2);
            if (f < j->trunc()) {
                first = std::min(first, f);
            }
        }
        if (first < e.window) {
            e.first_order = first;
        }
        e.ok = e.window > required && (!e.first_order || *e.first_order >= required);
        out.push_back(e);
    };
    std::vector<const LaurentJet*> infA, zeroA, AB;
    for (int A = 0; A < n2; ++A) {
        infA.push_back(&E(kInf, frame_w(A)));
        zeroA.push_back(&E(kT, frame_w(A)));
        for (int B = 0; B < n2; ++B) {
            AB.push_back(&E(frame_w(A), frame_w(B)));
        }
    }
    entry("inf,inf", n, {&E(kInf, kInf)});
    entry("inf,0", n, {&E(kInf, kT)});
    entry("inf,A", n, infA);
    entry("0,0", n, {&E(kT, kT)});
    entry("0,A", n + 1, zeroA);
    entry("A,B", n + 1, AB);
    return out;
}

bool orders_ok(const std::vector<OrderEntry>& table)
{
    return std::all_of(table.begin(), table.end(), [](const OrderEntry& e) { return e.ok; });
}

} // namespace ach
