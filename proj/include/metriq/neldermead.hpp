#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace metriq {

struct NmOptions {
    int max_iters = 2000;
    double rel_tol = 1e-8;  // relative simplex diameter at convergence
};

struct NmResult {
    std::vector<double> x;
    double fx = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Derivative-free simplex minimization (Nelder-Mead with the classic
/// reflection/expansion/contraction/shrink coefficients). Deterministic:
/// vertex ordering is a stable sort, so identical inputs walk identical
/// paths. The returned point is the best vertex ever evaluated, which is
/// never worse than the starting point.
template <typename F>
NmResult nelder_mead(F&& f, const std::vector<double>& x0, const NmOptions& opts = {}) {
    const std::size_t n = x0.size();
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, shrink = 0.5;

    std::vector<std::vector<double>> xs(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        double step = x0[i] != 0.0 ? 0.05 * std::fabs(x0[i]) : 0.00025;
        xs[i + 1][i] += step;
    }
    std::vector<double> fs(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fs[i] = f(xs[i]);

    std::vector<std::size_t> order(n + 1);
    auto sort_order = [&] {
        for (std::size_t i = 0; i <= n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    };
    auto diameter = [&]() {
        const auto& best = xs[order[0]];
        double scale = 1.0;
        for (double v : best) scale = std::max(scale, std::fabs(v));
        double d = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                d = std::max(d, std::fabs(xs[order[i]][j] - best[j]));
        return d / scale;
    };

    NmResult result;
    sort_order();
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        result.iterations = iter;
        if (diameter() < opts.rel_tol) {
            result.converged = true;
            break;
        }
        std::size_t worst = order[n];
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) centroid[j] += xs[order[i]][j];
        for (double& c : centroid) c /= static_cast<double>(n);

        auto at = [&](double coef) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j)
                p[j] = centroid[j] + coef * (centroid[j] - xs[worst][j]);
            return p;
        };

        auto xr = at(alpha);
        double fr = f(xr);
        if (fr < fs[order[0]]) {
            auto xe = at(alpha * gamma);
            double fe = f(xe);
            if (fe < fr) {
                xs[worst] = std::move(xe);
                fs[worst] = fe;
            } else {
                xs[worst] = std::move(xr);
                fs[worst] = fr;
            }
        } else if (fr < fs[order[n - 1]]) {
            xs[worst] = std::move(xr);
            fs[worst] = fr;
        } else {
            bool outside = fr < fs[worst];
            auto xc = at(outside ? rho : -rho);
            double fc = f(xc);
            if (fc < std::min(fr, fs[worst])) {
                xs[worst] = std::move(xc);
                fs[worst] = fc;
            } else {
                const auto& best = xs[order[0]];
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == order[0]) continue;
                    for (std::size_t j = 0; j < n; ++j)
                        xs[i][j] = best[j] + shrink * (xs[i][j] - best[j]);
                    fs[i] = f(xs[i]);
                }
            }
        }
        sort_order();
    }
    result.x = xs[order[0]];
    result.fx = fs[order[0]];
    return result;
}

}  // namespace metriq
