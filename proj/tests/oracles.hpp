#pragma once

// Independent reference computations for the test suite. Everything here
// is deliberately implemented by a different route than the library code
// it checks: series where the library uses closed forms, quadrature where
// it uses algebra, exhaustive pair enumeration where it uses rank sums.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace oracles {

// --- adaptive Simpson quadrature in long double ----------------------------

namespace detail {
template <class F>
long double simpson_rec(F&& f, long double a, long double b, long double fa, long double fm,
                        long double fb, long double whole, long double eps, int depth) {
    long double m = 0.5L * (a + b);
    long double lm = 0.5L * (a + m), rm = 0.5L * (m + b);
    long double flm = f(lm), frm = f(rm);
    long double left = (m - a) / 6.0L * (fa + 4.0L * flm + fm);
    long double right = (b - m) / 6.0L * (fm + 4.0L * frm + fb);
    long double err = left + right - whole;
    if (depth <= 0 || std::fabs(static_cast<double>(err)) <= 15.0L * eps)
        return left + right + err / 15.0L;
    return simpson_rec(f, a, m, fa, flm, fm, left, eps / 2.0L, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, eps / 2.0L, depth - 1);
}
}  // namespace detail

template <class F>
long double integrate(F&& f, long double a, long double b, long double eps = 1e-13L) {
    long double m = 0.5L * (a + b);
    long double fa = f(a), fm = f(m), fb = f(b);
    long double whole = (b - a) / 6.0L * (fa + 4.0L * fm + fb);
    return detail::simpson_rec(f, a, b, fa, fm, fb, whole, eps, 48);
}

// --- error function references ---------------------------------------------

// Alternating Maclaurin series, summed to convergence in long double.
// Numerically sound for |x| <= ~3.5 (beyond that, cancellation dominates).
inline long double erf_maclaurin(long double x) {
    const long double two_over_sqrt_pi = 1.1283791670955125738961589031215L;
    long double term = x;  // n = 0: x / (0! * 1)
    long double sum = x;
    long double x2 = x * x;
    for (int n = 1; n < 300; ++n) {
        term *= -x2 / static_cast<long double>(n);
        long double contrib = term / static_cast<long double>(2 * n + 1);
        sum += contrib;
        if (std::fabs(static_cast<double>(contrib)) < 1e-22) break;
    }
    return two_over_sqrt_pi * sum;
}

// Defining integral, valid for any |x| a quadrature can reach.
inline long double erf_quadrature(long double x) {
    if (x < 0.0L) return -erf_quadrature(-x);
    long double upper = std::min(x, 7.0L);  // erf is 1 to < 1e-21 beyond 7
    const long double two_over_sqrt_pi = 1.1283791670955125738961589031215L;
    long double integral =
        integrate([](long double t) { return std::exp(-t * t); }, 0.0L, upper, 1e-16L);
    long double r = two_over_sqrt_pi * integral;
    return r > 1.0L ? 1.0L : r;
}

// --- AUC by exhaustive pair enumeration ------------------------------------

inline double auc_bruteforce(std::span<const double> probs, std::span<const int> labels) {
    double score = 0.0;
    std::size_t n1 = 0, n0 = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (labels[i] != 1) continue;
        ++n1;
        for (std::size_t j = 0; j < probs.size(); ++j) {
            if (labels[j] == 1) continue;
            if (probs[i] > probs[j]) score += 1.0;
            else if (probs[i] == probs[j]) score += 0.5;
        }
    }
    for (int l : labels) n0 += (l != 1);
    return score / (static_cast<double>(n1) * static_cast<double>(n0));
}

}  // namespace oracles
