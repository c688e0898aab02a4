#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <variant>

#include "metriq/errors.hpp"

namespace metriq {

/// Decay rates below this are treated as "no decay at all": the metric
/// carries no information and scores 100 everywhere.
inline constexpr double LAMBDA_FLOOR = 1e-9;

/// Lower clamp for asymmetric-Gaussian widths. A width at the floor turns
/// that side of the score function into a step.
inline constexpr double SIGMA_FLOOR = 1e-9;

/// Shifted exponential: density 0 up to the threshold c, then decaying
/// at rate lambda.
struct ExpParams {
    double c = 0.0;       // threshold; full score at or below it
    double lambda = 0.0;  // decay rate, inverse metric units

    bool informative() const { return lambda >= LAMBDA_FLOOR; }
    bool valid() const {
        return std::isfinite(c) && std::isfinite(lambda) && c >= 0.0 && lambda >= 0.0;
    }
};

/// Asymmetric Gaussian: a shared peak at mu with independent left and
/// right widths, normalized over the whole real line.
struct AGaussParams {
    double mu = 0.0;
    double sigma1 = 1.0;  // width left of the peak
    double sigma2 = 1.0;  // width right of the peak

    /// Copy with widths raised to SIGMA_FLOOR and mu floored at 0.
    AGaussParams clamped() const {
        AGaussParams p = *this;
        if (!(p.mu > 0.0)) p.mu = 0.0;
        if (!(p.sigma1 > SIGMA_FLOOR)) p.sigma1 = SIGMA_FLOOR;
        if (!(p.sigma2 > SIGMA_FLOOR)) p.sigma2 = SIGMA_FLOOR;
        return p;
    }

    bool valid() const {
        return std::isfinite(mu) && std::isfinite(sigma1) && std::isfinite(sigma2) &&
               mu >= 0.0 && sigma1 > 0.0 && sigma2 > 0.0;
    }
};

enum class Family { Exponential, AsymGauss };

inline std::string family_name(Family f) {
    return f == Family::Exponential ? "exp" : "agauss";
}

namespace detail {

inline constexpr double ERF_SERIES_CUTOFF = 3.0;
// Largest double strictly below 1; keeps |erf(x)| < 1 for every finite x.
inline constexpr double ONE_MINUS_ULP = 0x1.fffffffffffffp-1;

// erf on [0, cutoff] by the all-positive-term rearrangement of the power
// series: erf(x) = 2/sqrt(pi) * x * exp(-x^2) * sum_n (2x^2)^n / (2n+1)!!.
// No alternating cancellation, evaluated in long double.
inline long double erf_series(long double a) {
    const long double two_over_sqrt_pi = 1.1283791670955125738961589031215L;
    long double a2 = a * a;
    long double term = 1.0L;
    long double sum = 1.0L;
    for (int n = 0; n < 200; ++n) {
        term *= 2.0L * a2 / static_cast<long double>(2 * n + 3);
        sum += term;
        if (term < sum * 1e-22L) break;
    }
    return two_over_sqrt_pi * a * std::exp(-a2) * sum;
}

// erfc on (cutoff, inf) by the Laplace continued fraction
//   sqrt(pi) e^{x^2} erfc(x) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))),
// evaluated bottom-up. Converges rapidly for x >= 3.
inline long double erfc_cf(long double a) {
    const long double sqrt_pi = 1.7724538509055160272981674833411L;
    long double t = a;
    for (int k = 64; k >= 1; --k) {
        t = a + (static_cast<long double>(k) / 2.0L) / t;
    }
    long double e = std::exp(-a * a);
    if (e == 0.0L) return 0.0L;
    return e / (sqrt_pi * t);
}

}  // namespace detail

/// Error function. Odd by construction (computed on |x|, sign restored),
/// absolute error below 1e-12, and strictly inside (-1, 1) for every
/// finite argument: where the true value rounds to 1 in double precision
/// the result saturates one ulp below instead.
inline double erf(double x) {
    if (!std::isfinite(x)) throw numeric_error("erf: non-finite input");
    if (x == 0.0) return 0.0;
    long double a = std::fabs(static_cast<long double>(x));
    long double r = (a <= detail::ERF_SERIES_CUTOFF) ? detail::erf_series(a)
                                                     : 1.0L - detail::erfc_cf(a);
    double out = static_cast<double>(r);
    if (out >= 1.0) out = detail::ONE_MINUS_ULP;
    return x < 0.0 ? -out : out;
}

/// Density of the shifted exponential: 0 for x <= c, lambda*exp(-lambda(x-c))
/// above the threshold.
inline double exp_pdf(double x, const ExpParams& p) {
    if (!std::isfinite(x) || x < 0.0) throw numeric_error("exp_pdf: x must be finite and >= 0");
    if (!p.valid()) throw numeric_error("exp_pdf: invalid parameters");
    if (!p.informative()) throw numeric_error("exp_pdf: density undefined for uninformative parameters");
    if (x <= p.c) return 0.0;
    return p.lambda * std::exp(-p.lambda * (x - p.c));
}

/// Score in [0, 100]: full score at or below the threshold, exponential
/// decay beyond it. Parameters with lambda below LAMBDA_FLOOR carry no
/// information and score 100 for every input.
inline double exp_score(double x, const ExpParams& p) {
    if (!std::isfinite(x) || x < 0.0) throw numeric_error("exp_score: x must be finite and >= 0");
    if (!p.valid()) throw numeric_error("exp_score: invalid parameters");
    if (!p.informative()) return 100.0;
    if (x <= p.c) return 100.0;
    return 100.0 * std::exp(-p.lambda * (x - p.c));
}

/// Asymmetric Gaussian density: shared amplitude 2/(sqrt(2 pi)(s1+s2)),
/// left piece uses sigma1, right piece sigma2; continuous at mu.
/// Defined for any finite x so the full-line normalization can be checked.
inline double agauss_pdf(double x, const AGaussParams& p) {
    if (!std::isfinite(x)) throw numeric_error("agauss_pdf: non-finite x");
    if (!p.valid()) throw numeric_error("agauss_pdf: invalid parameters");
    const double sqrt_two_pi = 2.5066282746310005024157652848110;
    double amp = 2.0 / (sqrt_two_pi * (p.sigma1 + p.sigma2));
    double sigma = (x < p.mu) ? p.sigma1 : p.sigma2;
    double z = (x - p.mu) / sigma;
    return amp * std::exp(-0.5 * z * z);
}

/// Score in [0, 100]: 100 * (1 - erf(|x - mu| / (sigma_side * sqrt(2)))),
/// where the side-specific width applies (sigma1 below the peak, sigma2 at
/// or above it). Exactly 100 at the peak, strictly positive everywhere.
inline double agauss_score(double x, const AGaussParams& p) {
    if (!std::isfinite(x) || x < 0.0) throw numeric_error("agauss_score: x must be finite and >= 0");
    if (!p.valid()) throw numeric_error("agauss_score: invalid parameters");
    double sigma = (x < p.mu) ? p.sigma1 : p.sigma2;
    const double sqrt_two = 1.4142135623730950488016887242097;
    double z = std::fabs(x - p.mu) / (sigma * sqrt_two);
    return 100.0 * (1.0 - metriq::erf(z));
}

/// Fitted model for one metric: one of the two families plus the
/// "uninformative" marker for degenerate exponential fits.
struct FittedParams {
    std::variant<ExpParams, AGaussParams> params;
    bool uninformative = false;

    FittedParams() : params(ExpParams{}) {}
    explicit FittedParams(ExpParams p, bool uninf = false) : params(p), uninformative(uninf) {
        if (!uninf && !p.informative()) uninformative = true;
    }
    explicit FittedParams(AGaussParams p) : params(p.clamped()) {}

    Family family() const {
        return std::holds_alternative<ExpParams>(params) ? Family::Exponential : Family::AsymGauss;
    }
    const ExpParams& as_exp() const { return std::get<ExpParams>(params); }
    const AGaussParams& as_agauss() const { return std::get<AGaussParams>(params); }

    double score(double x) const {
        if (uninformative) return 100.0;
        if (family() == Family::Exponential) return exp_score(x, as_exp());
        return agauss_score(x, as_agauss());
    }

    double pdf(double x) const {
        if (family() == Family::Exponential) return exp_pdf(x, as_exp());
        return agauss_pdf(x, as_agauss());
    }
};

}  // namespace metriq
