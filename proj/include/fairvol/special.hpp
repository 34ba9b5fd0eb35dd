#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fairvol/errors.hpp"
#include "fairvol/quadrature.hpp"

namespace fairvol {

// Hurst-Holder exponent constrained to the open interval (0, 1).
// Implicit construction from double is intentional: every construction site
// is a validation site.
class HurstValue {
public:
    HurstValue(double h) : h_(h) {
        if (!(h > 0.0) || !(h < 1.0) || !std::isfinite(h))
            throw std::domain_error("HurstValue: H must lie in (0,1), got " + std::to_string(h));
    }
    double value() const noexcept { return h_; }

private:
    double h_;
};

// Gamma function for x > 0, and for negative non-integer x via the reflection
// formula (needed internally when a variant requires Gamma(1-2H) with
// H > 1/2). Non-positive integers are poles.
inline double gamma_fn(double x) {
    if (!std::isfinite(x)) throw std::domain_error("gamma_fn: non-finite argument");
    if (x <= 0.0 && x == std::floor(x))
        throw std::domain_error("gamma_fn: pole at non-positive integer " + std::to_string(x));
    if (x > 0.0) return std::tgamma(x);
    // reflection: Gamma(x) = pi / (sin(pi x) * Gamma(1 - x))
    return std::numbers::pi / (std::sin(std::numbers::pi * x) * std::tgamma(1.0 - x));
}

// A(H) = Gamma(H+1/2)^2 / (2H * sin(pi H) * Gamma(2H)).
// A(1/2) = 1 exactly; this is the variance scale of the unnormalized
// moving-average kernel, so increment SDs carry a factor sqrt(A(H)).
inline double a_const(HurstValue h) {
    const double H = h.value();
    const double g = gamma_fn(H + 0.5);
    return g * g / (2.0 * H * std::sin(std::numbers::pi * H) * gamma_fn(2.0 * H));
}

// The five equivalent closed/integral forms of the fBm normalization V_H.
// Two of them have removable singularities at H = 1/2.
enum class VhVariant : std::uint8_t {
    IntegralForm,    // (1/(2H) + integral) / Gamma(H+1/2)^2, integral evaluated numerically
    Gamma1m2H,       // Gamma(1-2H) cos(pi H) / (pi H)             [removable at H=1/2]
    ReflectionForm,  // Gamma(H) Gamma(1-H) / (pi Gamma(1+2H))
    Gamma2m2H,       // Gamma(2-2H) cos(pi H) / (pi H (1-2H))       [removable at H=1/2]
    SineForm,        // 1 / (2H sin(pi H) Gamma(2H))
};

// What to do when a singular variant is requested within kSingularWindow of
// H = 1/2: substitute the (well-defined) limit via SineForm, or refuse.
enum class SingularityPolicy : std::uint8_t { UseLimit, Throw };

inline constexpr double kSingularWindow = 1e-6;

inline double j_integral(HurstValue h);  // defined below

// V_H under the requested variant. All variants agree on (0,1); the integral
// form runs adaptive quadrature and is intended for cross-checking rather
// than hot paths.
inline double v_const(HurstValue h, VhVariant variant = VhVariant::SineForm,
                      SingularityPolicy policy = SingularityPolicy::UseLimit) {
    const double H = h.value();
    const double pi = std::numbers::pi;
    const bool near_half = std::abs(H - 0.5) < kSingularWindow;
    switch (variant) {
        case VhVariant::SineForm:
            return 1.0 / (2.0 * H * std::sin(pi * H) * gamma_fn(2.0 * H));
        case VhVariant::ReflectionForm:
            return gamma_fn(H) * gamma_fn(1.0 - H) / (pi * gamma_fn(1.0 + 2.0 * H));
        case VhVariant::Gamma1m2H:
            if (near_half) {
                if (policy == SingularityPolicy::Throw)
                    throw std::domain_error("v_const: Gamma1m2H variant is singular at H = 1/2");
                return v_const(h, VhVariant::SineForm);
            }
            return gamma_fn(1.0 - 2.0 * H) * std::cos(pi * H) / (pi * H);
        case VhVariant::Gamma2m2H:
            if (near_half) {
                if (policy == SingularityPolicy::Throw)
                    throw std::domain_error("v_const: Gamma2m2H variant is singular at H = 1/2");
                return v_const(h, VhVariant::SineForm);
            }
            return gamma_fn(2.0 - 2.0 * H) * std::cos(pi * H) / (pi * H * (1.0 - 2.0 * H));
        case VhVariant::IntegralForm: {
            const double g = gamma_fn(H + 0.5);
            return (1.0 / (2.0 * H) + j_integral(h)) / (g * g);
        }
    }
    throw std::invalid_argument("v_const: unknown variant");
}

// Covariance of fBm with Var(W_H(1)) = V_H:
//   Cov(W_H(t), W_H(s)) = (V_H/2) (|t|^{2H} + |s|^{2H} - |t-s|^{2H}).
inline double fbm_covariance(double t, double s, HurstValue h) {
    if (!std::isfinite(t) || !std::isfinite(s))
        throw std::invalid_argument("fbm_covariance: non-finite time");
    const double H2 = 2.0 * h.value();
    const double v = v_const(h);
    return 0.5 * v *
           (std::pow(std::abs(t), H2) + std::pow(std::abs(s), H2) - std::pow(std::abs(t - s), H2));
}

// Autocovariance of step-`lag_step` fBm increments k grid steps apart:
//   gamma(k) = (V_H/2) lag_step^{2H} (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}).
// gamma(0) = V_H lag_step^{2H}; identically zero for k >= 1 at H = 1/2.
inline double fgn_autocov(std::size_t k, double lag_step, HurstValue h) {
    if (!(lag_step > 0.0) || !std::isfinite(lag_step))
        throw std::invalid_argument("fgn_autocov: lag_step must be positive");
    const double H2 = 2.0 * h.value();
    const double kd = static_cast<double>(k);
    const double v = v_const(h);
    const double bracket = std::pow(kd + 1.0, H2) - 2.0 * std::pow(kd, H2) +
                           std::pow(std::abs(kd - 1.0), H2);
    return 0.5 * v * std::pow(lag_step, H2) * bracket;
}

// Leading-order SD of an increment over |lag| when the local exponent is H
// and the local volatility scale is nu: |lag|^H * nu * sqrt(A(H)).
inline double increment_sd(double lag, HurstValue h, double nu) {
    if (!(nu >= 0.0) || !std::isfinite(nu))
        throw std::invalid_argument("increment_sd: nu must be finite and >= 0");
    if (!std::isfinite(lag)) throw std::invalid_argument("increment_sd: non-finite lag");
    return std::pow(std::abs(lag), h.value()) * nu * std::sqrt(a_const(h));
}

namespace detail {

// Exponent of the substitution u = w^k used to flatten integrable endpoint
// singularities; k = 12 keeps all transformed integrands bounded for
// H in [0.05, 0.95] with margin.
inline constexpr double kSoftenPower = 12.0;

template <typename F>
double integrate_softened_unit(const F& f, double abs_tol, double rel_tol) {
    const double k = kSoftenPower;
    auto g = [&](double w) {
        const double u = std::pow(w, k);
        return f(u) * k * std::pow(w, k - 1.0);
    };
    return integrate_checked(g, 0.0, 1.0, abs_tol, rel_tol, 4000);
}

// C(q) = int_1^inf cos(x) x^{-q} dx and S(q) = int_1^inf sin(x) x^{-q} dx.
// Integration by parts raises q by one per step:
//   C(q) = -sin(1) + q S(q+1),   S(q) = cos(1) - q C(q+1),
// so the pair is reduced until q >= 8, where direct quadrature on [1, X]
// plus the crude bound  |int_X^inf| <= X^{1-q}/(q-1) < 1e-14  suffices.
inline double osc_tail_direct(double q, bool cosine) {
    const double X = 64.0;
    auto f = [&](double x) {
        return (cosine ? std::cos(x) : std::sin(x)) * std::pow(x, -q);
    };
    return integrate_checked(f, 1.0, X, 1e-14, 1e-13, 4000);
}

inline double osc_tail(double q, bool cosine) {
    if (q >= 8.0) return osc_tail_direct(q, cosine);
    if (cosine) return -std::sin(1.0) + q * osc_tail(q + 1.0, false);
    return std::cos(1.0) - q * osc_tail(q + 1.0, true);
}

}  // namespace detail

// J(H) = int_0^inf ((u+1)^{H-1/2} - u^{H-1/2})^2 du, evaluated by quadrature
// only (no use of the closed-form identity J(H) = A(H) - 1/(2H), which tests
// verify independently). The tail is mapped onto [0,1] exactly via u -> 1/s:
//   J = int_0^1 f(u) du + int_0^1 ((1+s)^{H-1/2} - 1)^2 s^{-2H-1} ds,
// then both pieces are softened with u = w^12 and assembled in w directly.
// The singular powers are folded into a single pow(w, .) per piece whose
// exponent stays in (-1, 23] on the admissible H range; the bare factored
// forms u^{2a} and s^{-2a-2} would overflow at deep-bisection nodes.
inline double j_integral(HurstValue h) {
    const double a = h.value() - 0.5;
    const double k = detail::kSoftenPower;
    auto head = [a, k](double w) {
        if (w <= 0.0) return 0.0;
        const double u = std::pow(w, k);
        if (a >= 0.0) {
            const double d = std::pow(u + 1.0, a) - std::pow(u, a);
            return d * d * k * std::pow(w, k - 1.0);
        }
        // ((u+1)^a - u^a)^2 = u^{2a} expm1(a log1p(1/u))^2; 1/u may round to
        // inf, in which case the bracket collapses to (-1)^2 = 1.
        const double b = std::expm1(a * std::log1p(1.0 / u));
        return b * b * k * std::pow(w, 2.0 * a * k + k - 1.0);
    };
    auto tail = [a, k](double w) {
        if (w <= 0.0) return 0.0;
        const double s = std::pow(w, k);
        // y = ((1+s)^a - 1)/s, finite down to the underflow floor of s.
        const double y = s > 0.0 ? std::expm1(a * std::log1p(s)) / s : a;
        return y * y * k * std::pow(w, k - 2.0 * a * k - 1.0);
    };
    const double part1 = integrate_checked(head, 0.0, 1.0, 1e-14, 2e-13, 4000);
    const double part2 = integrate_checked(tail, 0.0, 1.0, 1e-14, 2e-13, 4000);
    return part1 + part2;
}

// I(H) = int_0^inf (1 - cos x) x^{-2H-1} dx
//      = int_0^1 2 sin^2(x/2) x^{-2H-1} dx + 1/(2H) - C(2H+1).
// Known closed form pi / (2 Gamma(2H+1) sin(pi H)) is used only in tests.
inline double i_cosine(HurstValue h) {
    const double p = 2.0 * h.value() + 1.0;
    const double k = detail::kSoftenPower;
    // 2 sin^2(x/2) x^{-p} softened with x = w^k and folded into one power of
    // w: 6 (sin(x/2)/(x/2))^2 w^{k(2-p)+k-1}; the bare x^{-p} would overflow
    // once adaptive bisection drives x below ~1e-106.
    auto head = [p, k](double w) {
        if (w <= 0.0) return 0.0;
        const double x = std::pow(w, k);
        double q = 1.0;
        if (x > 0.0) {
            const double half = 0.5 * x;
            const double r = std::sin(half) / half;
            q = r * r;
        }
        return 6.0 * q * std::pow(w, k * (2.0 - p) + k - 1.0);
    };
    const double part1 = integrate_checked(head, 0.0, 1.0, 1e-14, 2e-13, 4000);
    const double part2 = 1.0 / (p - 1.0);
    const double part3 = detail::osc_tail(p, true);
    return part1 + part2 - part3;
}

// Standard normal CDF.
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// Quantile of the standard normal law. Rational initial guess (Acklam)
// polished with one Halley step against erfc; accurate to ~1e-15, far inside
// the 1e-9 contract used by the confidence-interval formulas.
inline double normal_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0))
        throw std::domain_error("normal_quantile: p must lie in (0,1)");
    static constexpr double A[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double B[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double C[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double D[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) /
            ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q /
            (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) /
            ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0);
    }
    // Halley refinement
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace fairvol
