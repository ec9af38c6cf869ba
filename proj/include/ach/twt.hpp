#pragma once

// Canonical (TWT) connection of a homogeneous almost pseudohermitian model.
//
// Indices A, B, C run over the 2n H-directions (0..n-1 holomorphic, n..2n-1
// antiholomorphic). A direction argument E runs over the full basis
// (0 = T, 1 + A = W_A).

#include "ach/model.hpp"

#include <initializer_list>
#include <span>
#include <vector>

namespace ach {

// Dense tensor over the 2n H-indices; the slot count is fixed at construction.
class HTensor {
public:
    HTensor() = default;
    HTensor(int n2, int rank) : n2_(n2), rank_(rank), data_(size_for(n2, rank)) {}

    int n2() const noexcept { return n2_; }
    int rank() const noexcept { return rank_; }

    Complex& operator()(int a, int b) { return data_[flat({a, b})]; }
    Complex operator()(int a, int b) const { return data_[flat({a, b})]; }
    Complex& operator()(int a, int b, int c) { return data_[flat({a, b, c})]; }
    Complex operator()(int a, int b, int c) const { return data_[flat({a, b, c})]; }
    Complex& at(std::span<const int> idx) { return data_[flat(idx)]; }
    Complex at(std::span<const int> idx) const { return data_[flat(idx)]; }

    std::size_t size() const noexcept { return data_.size(); }
    Complex& raw(std::size_t i) { return data_[i]; }
    Complex raw(std::size_t i) const { return data_[i]; }
    double max_abs() const noexcept;

private:
    static std::size_t size_for(int n2, int rank)
    {
        std::size_t s = 1;
        for (int i = 0; i < rank; ++i) {
            s *= static_cast<std::size_t>(n2);
        }
        return s;
    }
    std::size_t flat(std::initializer_list<int> idx) const
    {
        return flat(std::span<const int>(idx.begin(), idx.size()));
    }
    std::size_t flat(std::span<const int> idx) const
    {
        std::size_t f = 0;
        for (int i : idx) {
            f = f * static_cast<std::size_t>(n2_) + static_cast<std::size_t>(i);
        }
        return f;
    }

    int n2_ = 0;
    int rank_ = 0;
    std::vector<Complex> data_;
};

struct TwtConnection {
    int n = 0;
    // omega[E](A, B) = omega_A^B(E) for E in 0..2n (0 = T, 1 + C = W_C).
    std::vector<MatrixC> omega;
    // A^B_C (nonzero only for B, C of opposite type).
    MatrixC A;
    // A_{BC} = h_{BD} A^D_C; symmetric.
    MatrixC A_lower;
    // Q^C_{AB} = theta^C(Q(W_A, W_B)).
    HTensor Q;
    // Max residual of the assembled linear constraints.
    double residual = 0.0;

    Complex om(int a, int b, int e) const { return omega[static_cast<std::size_t>(e)](a, b); }
};

struct TwtCurvature {
    int n = 0;
    // Omega[A][B] is a (2n+1) x (2n+1) antisymmetric matrix of values on basis pairs.
    std::vector<std::vector<MatrixC>> Omega;
    // R_a^b_{r gb} = Omega_a^b(W_r, W_gb), holomorphic a, b, r and antiholomorphic gb (n^4 entries).
    HTensor R;

    const MatrixC& form(int a, int b) const
    {
        return Omega[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    }
};

TwtConnection solve_twt(const PhmModel& m);

// Residuals of the defining identities: torsion symmetry, metric condition,
// Tanno relation and vanishing set, and reality.
struct TwtInvariantResiduals {
    double torsion_symmetry = 0.0;
    double metric = 0.0;
    double tanno = 0.0;
    double reality = 0.0;
};
TwtInvariantResiduals twt_invariants(const PhmModel& m, const TwtConnection& c);

TwtCurvature curvature_forms(const PhmModel& m, const TwtConnection& c);

// Maximum deviation between the curvature forms and their expansion in R, A, Q
// and TWT covariant derivatives, over all frame pairs.
double verify_bd(const PhmModel& m, const TwtConnection& c, const TwtCurvature& curv);

// Same comparison split by form (0: Omega_a^b, 1: Omega_a^bb) and slot class
// (0: W^W, 1: Wb^Wb, 2: W^Wb, 3: W^T, 4: Wb^T).
struct BdResidual {
    double max = 0.0;
    double slot[2][5] = {};
    // Size of the Q*Q term added to the Wb^Wb slot of Omega_a^bb.
    double tanno_quadratic = 0.0;
};
BdResidual verify_bd_detailed(const PhmModel& m, const TwtConnection& c, const TwtCurvature& curv);

// Reality of the curvature forms: Omega_{sA}^{sB}(sE, sF) = conj(Omega_A^B(E, F)).
double curvature_reality_residual(const PhmModel& m, const TwtCurvature& curv);

} // namespace ach
