#pragma once

// Order-by-order solution of the approximate Einstein equation in normal form.
//
// Stage k >= 1 fixes u_k = (s_k, h~_k, eta~_{k-1}) from
// e_k = (c_{k-2}(Ein_00), c_{k-1}(Ein_AB), c_{k-1}(Ein_0A)); stage 0 fixes eta~_0
// from c_0(Ein_0A). The eta~ factor vanishes at k = n+1, so stage n+1 solves
// s_{n+1}, h~_{n+1} only and eta~_n stays 0. Stage n+1 is solved in the
// least-squares sense: the h~_{alpha beta} factor also vanishes there, and the
// part of the equations it cannot reach is kept as a residual.

#include "ach/curvature.hpp"
#include "ach/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ach {

struct SolverOptions {
    int trunc_extra = 7;
    bool extend_tracefree = false;
    double tol = 1e-9;
};

struct StageRecord {
    int k = 0;
    int unknowns = 0;
    double residual_before = 0.0;
    double residual_after = 0.0;
    double pivot_ratio = 0.0;
    int rank = 0;
    bool rank_deficient = false;  // solved in the least-squares sense
    // Stage equations met to tolerance. Only stages past n may end inconsistent;
    // their leftover residual is an obstruction the recursion cannot remove.
    bool consistent = true;
};

struct SolverState {
    PhmModel model;
    SolverOptions opts;
    Fields fields;
    int trunc = 0;
    int solved_through = -1;
    MetricJet metric;
    CurvatureJet curv;
    std::vector<StageRecord> stages;
};

// Recomputes metric and curvature of state.fields.
void refresh(SolverState& state);

SolverState solve(const PhmModel& m, const SolverOptions& opts = {});

// Blocks of a stage: which unknown and equation groups participate.
struct StageBlocks {
    bool s = false;
    bool h = false;
    bool h_tracefree_only = false;
    bool eta = false;
};
StageBlocks stage_blocks(int n, int k, bool extend_tracefree);

struct BlockFactor {
    std::string block;  // "s", "trace", "tracefree", "hol", "eta"
    Complex raw{};      // response of the block's equation to a unit probe in the block
    Complex scaled{};   // raw rescaled to the Taylor normalization of the recursion polynomials
    double offblock = 0.0;  // size of the response outside the probed direction (0 for a clean block)
    bool singular = false;
};

struct ProbeResult {
    int k = 0;
    MatrixC matrix;  // d e_k / d u_k over all blocks (s, h~ upper triangle, eta~)
    std::vector<BlockFactor> factors;
    double pivot_ratio = 0.0;  // smallest / largest |U_ii| of the LU factor
    bool singular = false;

    const BlockFactor* find(const std::string& name) const;
};

// Linear part of u_k -> e_k at the state's current data, with every block probed
// regardless of obstruction. The window is widened as needed.
ProbeResult probe_matrix(const SolverState& state, int k);

// Expected factor of a block at stage k, in the normalization of BlockFactor::scaled.
double predicted_factor(const std::string& block, int n, int k);

struct Obstructions {
    Complex B{};
    std::vector<Complex> O;  // indexed by A (holomorphic then antiholomorphic)
};
Obstructions obstructions(const SolverState& state);

// s += kappa phi^{n+2}, h~ += lambda phi^{n+2}, eta~ += mu phi^{n+1}; lambda is symmetrized.
SolverState gauge_perturb(const SolverState& state, Complex kappa, const MatrixC& lambda, const VectorC& mu);

struct RescaleReport {
    double upsilon = 0.0;
    Obstructions original;
    Obstructions rescaled;
    double B_mismatch = 0.0;  // |B^ e^{2(n+2)u} - B|
    double O_mismatch = 0.0;  // max_A |O^_A e^{2(n+2)u} - O_A|
};
RescaleReport rescale_check(const PhmModel& m, double upsilon, const SolverOptions& opts = {});

struct OrderEntry {
    std::string component;  // "inf,inf", "inf,0", "inf,A", "0,0", "0,A", "A,B"
    int required = 0;
    // First phi-order whose coefficient exceeds tol; nullopt when all vanish through the window.
    std::optional<int> first_order;
    int window = 0;  // first order not known
    bool ok = false;
};
std::vector<OrderEntry> residual_orders(const SolverState& state, double tol = 1e-9);
bool orders_ok(const std::vector<OrderEntry>& table);

} // namespace ach
