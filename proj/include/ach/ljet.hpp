#pragma once

// Truncated Laurent series in the defining function phi.
//
// A jet stores the coefficients of phi^k for min_deg <= k < trunc. Powers at or
// above trunc are unknown; every operation propagates that window so a
// coefficient read back from a result is exact up to floating point.

#include <complex>
#include <initializer_list>
#include <span>
#include <vector>

namespace ach {

using Complex = std::complex<double>;

class LaurentJet {
public:
    // Zero jet with an empty window (trunc = 0).
    LaurentJet() = default;

    // Coefficients of phi^min_deg, phi^(min_deg+1), ...; trunc = min_deg + coeffs.size().
    LaurentJet(int min_deg, std::vector<Complex> coeffs);
    LaurentJet(int min_deg, std::initializer_list<Complex> coeffs);

    static LaurentJet zero(int trunc);
    static LaurentJet constant(Complex c, int trunc);
    // c * phi^power, known to trunc.
    static LaurentJet monomial(Complex c, int power, int trunc);

    int min_deg() const noexcept { return min_deg_; }
    int trunc() const noexcept { return trunc_; }
    bool is_zero() const noexcept { return coeffs_.empty(); }
    std::span<const Complex> coeffs() const noexcept { return coeffs_; }

    // Coefficient of phi^k. Throws OutOfWindow if k >= trunc; zero below min_deg.
    Complex coefficient(int k) const;
    // Leading coefficient; zero for the zero jet.
    Complex leading() const noexcept { return coeffs_.empty() ? Complex{} : coeffs_.front(); }

    // Largest |coefficient| of phi^k over k in [lo, hi), clipped to the window.
    double max_abs(int lo, int hi) const noexcept;

    // Drops every power >= t (t may only tighten the window).
    LaurentJet truncated(int t) const;
    // Multiplication by phi^p (exact).
    LaurentJet shifted(int p) const;
    // Sets coefficient of phi^k (k < trunc), growing the stored range downward if needed.
    void set_coefficient(int k, Complex c);

    LaurentJet conj() const;
    LaurentJet operator-() const;

    LaurentJet& operator+=(const LaurentJet& rhs);
    LaurentJet& operator-=(const LaurentJet& rhs);
    LaurentJet& operator*=(Complex s);

    friend LaurentJet operator+(LaurentJet a, const LaurentJet& b) { return a += b; }
    friend LaurentJet operator-(LaurentJet a, const LaurentJet& b) { return a -= b; }
    friend LaurentJet operator*(LaurentJet a, Complex s) { return a *= s; }
    friend LaurentJet operator*(Complex s, LaurentJet a) { return a *= s; }
    friend LaurentJet operator*(const LaurentJet& a, const LaurentJet& b);

    bool operator==(const LaurentJet&) const = default;

private:
    void normalize();

    int min_deg_ = 0;
    int trunc_ = 0;
    std::vector<Complex> coeffs_;
};

LaurentJet add(const LaurentJet& a, const LaurentJet& b);
LaurentJet mul(const LaurentJet& a, const LaurentJet& b);
// Multiplicative inverse; throws LeadingZero for the zero jet.
LaurentJet invert(const LaurentJet& a);
// Principal square root; throws OddLeadingDegree or NonPositiveLeading.
LaurentJet sqrt(const LaurentJet& a, double imag_tol = 1e-9);
// d/dphi.
LaurentJet differentiate(const LaurentJet& a);
Complex coefficient(const LaurentJet& a, int k);

// Maximum coefficient distance between a and b over their common window.
double max_coeff_diff(const LaurentJet& a, const LaurentJet& b);

} // namespace ach
