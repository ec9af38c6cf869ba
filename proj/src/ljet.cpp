#include "ach/ljet.hpp"

#include "ach/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ach {

namespace {

constexpr double kZeroCutoff = 1e-300;

} // namespace

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::LeadingZero: return "LeadingZero";
    case ErrorCode::OddLeadingDegree: return "OddLeadingDegree";
    case ErrorCode::NonPositiveLeading: return "NonPositiveLeading";
    case ErrorCode::OutOfWindow: return "OutOfWindow";
    case ErrorCode::NonPositiveLevi: return "NonPositiveLevi";
    case ErrorCode::JacobiViolation: return "JacobiViolation";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::IncompatibleJ: return "IncompatibleJ";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::BoundaryMismatch: return "BoundaryMismatch";
    case ErrorCode::SingularStage: return "SingularStage";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

LaurentJet::LaurentJet(int min_deg, std::vector<Complex> coeffs)
    : min_deg_(min_deg), trunc_(min_deg + static_cast<int>(coeffs.size())), coeffs_(std::move(coeffs))
{
    normalize();
}

LaurentJet::LaurentJet(int min_deg, std::initializer_list<Complex> coeffs)
    : LaurentJet(min_deg, std::vector<Complex>(coeffs))
{}

LaurentJet LaurentJet::zero(int trunc)
{
    LaurentJet z;
    z.min_deg_ = trunc;
    z.trunc_ = trunc;
    return z;
}

LaurentJet LaurentJet::constant(Complex c, int trunc) { return monomial(c, 0, trunc); }

LaurentJet LaurentJet::monomial(Complex c, int power, int trunc)
{
    if (power >= trunc) {
        return zero(trunc);
    }
    std::vector<Complex> v(static_cast<std::size_t>(trunc - power));
    v[0] = c;
    return LaurentJet(power, std::move(v));
}

void LaurentJet::normalize()
{
    std::size_t lead = 0;
    while (lead < coeffs_.size() && std::abs(coeffs_[lead]) < kZeroCutoff) {
        ++lead;
    }
    if (lead == coeffs_.size()) {
        coeffs_.clear();
        min_deg_ = trunc_;
        return;
    }
    if (lead > 0) {
        coeffs_.erase(coeffs_.begin(), coeffs_.begin() + static_cast<std::ptrdiff_t>(lead));
        min_deg_ += static_cast<int>(lead);
    }
}

Complex LaurentJet::coefficient(int k) const
{
    if (k >= trunc_) {
        throw Error(ErrorCode::OutOfWindow,
                    "coefficient of phi^" + std::to_string(k) + " requested but jet is known only below phi^" +
                        std::to_string(trunc_));
    }
    if (k < min_deg_) {
        return {};
    }
    return coeffs_[static_cast<std::size_t>(k - min_deg_)];
}

double LaurentJet::max_abs(int lo, int hi) const noexcept
{
    double m = 0.0;
    for (int k = std::max(lo, min_deg_); k < std::min(hi, trunc_); ++k) {
        m = std::max(m, std::abs(coeffs_[static_cast<std::size_t>(k - min_deg_)]));
    }
    return m;
}

LaurentJet LaurentJet::truncated(int t) const
{
    if (t >= trunc_) {
        return *this;
    }
    if (t <= min_deg_) {
        return zero(t);
    }
    return LaurentJet(min_deg_, std::vector<Complex>(coeffs_.begin(), coeffs_.begin() + (t - min_deg_)));
}

LaurentJet LaurentJet::shifted(int p) const
{
    LaurentJet r = *this;
    r.min_deg_ += p;
    r.trunc_ += p;
    return r;
}

void LaurentJet::set_coefficient(int k, Complex c)
{
    if (k >= trunc_) {
        throw Error(ErrorCode::OutOfWindow, "set_coefficient beyond truncation");
    }
    if (coeffs_.empty()) {
        min_deg_ = k;
        coeffs_.assign(static_cast<std::size_t>(trunc_ - k), Complex{});
    } else if (k < min_deg_) {
        coeffs_.insert(coeffs_.begin(), static_cast<std::size_t>(min_deg_ - k), Complex{});
        min_deg_ = k;
    }
    coeffs_[static_cast<std::size_t>(k - min_deg_)] = c;
    normalize();
}

LaurentJet LaurentJet::conj() const
{
    LaurentJet r = *this;
    for (auto& c : r.coeffs_) {
        c = std::conj(c);
    }
    return r;
}

LaurentJet LaurentJet::operator-() const
{
    LaurentJet r = *this;
    for (auto& c : r.coeffs_) {
        c = -c;
    }
    return r;
}

LaurentJet& LaurentJet::operator+=(const LaurentJet& rhs)
{
    const int t = std::min(trunc_, rhs.trunc_);
    const int lo = std::min(min_deg_, rhs.min_deg_);
    if (lo >= t) {
        *this = zero(t);
        return *this;
    }
    std::vector<Complex> v(static_cast<std::size_t>(t - lo));
    for (int k = std::max(lo, min_deg_); k < std::min(t, trunc_); ++k) {
        v[static_cast<std::size_t>(k - lo)] = coeffs_[static_cast<std::size_t>(k - min_deg_)];
    }
    for (int k = std::max(lo, rhs.min_deg_); k < std::min(t, rhs.trunc_); ++k) {
        v[static_cast<std::size_t>(k - lo)] += rhs.coeffs_[static_cast<std::size_t>(k - rhs.min_deg_)];
    }
    min_deg_ = lo;
    trunc_ = t;
    coeffs_ = std::move(v);
    normalize();
    return *this;
}

LaurentJet& LaurentJet::operator-=(const LaurentJet& rhs) { return *this += -rhs; }

LaurentJet& LaurentJet::operator*=(Complex s)
{
    for (auto& c : coeffs_) {
        c *= s;
    }
    normalize();
    return *this;
}

LaurentJet operator*(const LaurentJet& a, const LaurentJet& b)
{
    const int t = std::min(a.trunc_ + b.min_deg_, b.trunc_ + a.min_deg_);
    if (a.is_zero() || b.is_zero()) {
        return LaurentJet::zero(t);
    }
    const int lo = a.min_deg_ + b.min_deg_;
    const int len = t - lo;
    std::vector<Complex> v(static_cast<std::size_t>(len));
    const int na = std::min(static_cast<int>(a.coeffs_.size()), len);
    const int nb = std::min(static_cast<int>(b.coeffs_.size()), len);
    for (int i = 0; i < na; ++i) {
        const Complex ai = a.coeffs_[static_cast<std::size_t>(i)];
        const int jmax = std::min(nb, len - i);
        for (int j = 0; j < jmax; ++j) {
            v[static_cast<std::size_t>(i + j)] += ai * b.coeffs_[static_cast<std::size_t>(j)];
        }
    }
    return LaurentJet(lo, std::move(v));
}

LaurentJet add(const LaurentJet& a, const LaurentJet& b) { return a + b; }

LaurentJet mul(const LaurentJet& a, const LaurentJet& b) { return a * b; }

LaurentJet invert(const LaurentJet& a)
{
    if (a.is_zero()) {
        throw Error(ErrorCode::LeadingZero, "cannot invert a jet that vanishes to its truncation");
    }
    const auto c = a.coeffs();
    const std::size_t w = c.size();
    std::vector<Complex> d(w);
    const Complex inv0 = 1.0 / c[0];
    d[0] = inv0;
    for (std::size_t k = 1; k < w; ++k) {
        Complex acc{};
        for (std::size_t j = 1; j <= k; ++j) {
            acc += c[j] * d[k - j];
        }
        d[k] = -acc * inv0;
    }
    return LaurentJet(-a.min_deg(), std::move(d));
}

LaurentJet sqrt(const LaurentJet& a, double imag_tol)
{
    if (a.is_zero()) {
        throw Error(ErrorCode::LeadingZero, "square root of the zero jet");
    }
    if (a.min_deg() % 2 != 0) {
        throw Error(ErrorCode::OddLeadingDegree, "leading power " + std::to_string(a.min_deg()) + " is odd");
    }
    const auto c = a.coeffs();
    if (!(c[0].real() > 0.0) || std::abs(c[0].imag()) > imag_tol * std::abs(c[0].real())) {
        throw Error(ErrorCode::NonPositiveLeading, "leading coefficient is not a positive real");
    }
    const std::size_t w = c.size();
    std::vector<Complex> r(w);
    r[0] = std::sqrt(c[0].real());
    for (std::size_t k = 1; k < w; ++k) {
        Complex acc = c[k];
        for (std::size_t j = 1; j < k; ++j) {
            acc -= r[j] * r[k - j];
        }
        r[k] = acc / (2.0 * r[0]);
    }
    return LaurentJet(a.min_deg() / 2, std::move(r));
}

LaurentJet differentiate(const LaurentJet& a)
{
    if (a.is_zero()) {
        return LaurentJet::zero(a.trunc() - 1);
    }
    const auto c = a.coeffs();
    std::vector<Complex> d(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        d[i] = c[i] * static_cast<double>(a.min_deg() + static_cast<int>(i));
    }
    return LaurentJet(a.min_deg() - 1, std::move(d));
}

Complex coefficient(const LaurentJet& a, int k) { return a.coefficient(k); }

double max_coeff_diff(const LaurentJet& a, const LaurentJet& b)
{
    const int t = std::min(a.trunc(), b.trunc());
    const int lo = std::min(a.min_deg(), b.min_deg());
    double m = 0.0;
    for (int k = lo; k < t; ++k) {
        m = std::max(m, std::abs(a.coefficient(k) - b.coefficient(k)));
    }
    return m;
}

} // namespace ach
