#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "metriq/corpus.hpp"
#include "metriq/distmodel.hpp"
#include "metriq/errors.hpp"
#include "metriq/neldermead.hpp"

namespace metriq {

struct FitOptions {
    std::size_t min_samples = 30;
    double lambda_cap = 1e9;   // spreads below 1/cap are degenerate
    int max_iters = 2000;      // simplex budget for the numeric fit
    double rel_tol = 1e-8;
};

struct ExpFit {
    ExpParams params;
    bool uninformative = false;
    double nll = 0.0;  // closed-boundary convention; 0 when uninformative
};

struct AGaussFit {
    AGaussParams params;
    bool converged = false;
    double nll = 0.0;
    int iterations = 0;
};

namespace detail {

inline void check_samples(std::span<const double> samples, std::size_t min_samples,
                          const char* who) {
    if (samples.size() < min_samples)
        throw numeric_error(std::string(who) + ": need at least " + std::to_string(min_samples) +
                            " samples, got " + std::to_string(samples.size()));
    for (double v : samples)
        if (!std::isfinite(v) || v < 0.0)
            throw numeric_error(std::string(who) + ": samples must be finite and >= 0");
}

// type-7 quantile (linear interpolation between closest ranks)
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    std::size_t lo = static_cast<std::size_t>(h);
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

/// Closed-form maximum likelihood for the shifted exponential:
/// c = min(samples), lambda = 1/(mean - c). Zero (or near-zero) spread has
/// no finite decay rate and is flagged uninformative instead.
inline ExpFit fit_exponential(std::span<const double> samples, const FitOptions& opts = {}) {
    detail::check_samples(samples, std::max<std::size_t>(opts.min_samples, 1), "fit_exponential");
    double c = *std::min_element(samples.begin(), samples.end());
    double sum = 0.0;
    for (double v : samples) sum += v;
    double mean = sum / static_cast<double>(samples.size());
    double spread = mean - c;

    ExpFit fit;
    if (!(spread > 1.0 / opts.lambda_cap)) {
        fit.params = ExpParams{c, 0.0};
        fit.uninformative = true;
        return fit;
    }
    double lambda = 1.0 / spread;
    fit.params = ExpParams{c, lambda};
    fit.uninformative = lambda < LAMBDA_FLOOR;
    if (!fit.uninformative) {
        // -sum log(lambda e^{-lambda (x-c)}) over x >= c equals n(1 - log lambda)
        double n = static_cast<double>(samples.size());
        fit.nll = n * (1.0 - std::log(lambda));
    }
    return fit;
}

/// Exact negative log-likelihood of the asymmetric Gaussian, evaluated in
/// log space so distant samples cost their squared z-score instead of
/// underflowing. Empty input is the empty product: 0.
inline double agauss_nll(std::span<const double> samples, const AGaussParams& p) {
    if (!p.valid()) throw numeric_error("agauss_nll: invalid parameters");
    const double sqrt_two_pi = 2.5066282746310005024157652848110;
    double log_norm = std::log(sqrt_two_pi * (p.sigma1 + p.sigma2) / 2.0);
    double nll = 0.0;
    for (double x : samples) {
        double sigma = (x < p.mu) ? p.sigma1 : p.sigma2;
        double z = (x - p.mu) / sigma;
        nll += log_norm + 0.5 * z * z;
    }
    return nll;
}

/// Start point for the numeric fit: mu at the mode of a Freedman-Diaconis
/// histogram (leftmost maximal bin center), widths from one-sided RMS
/// deviations about it (floored). Cheap and scale-aware.
inline AGaussParams agauss_init(std::span<const double> samples) {
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    double lo = sorted.front(), hi = sorted.back();
    if (!(hi > lo)) throw numeric_error("agauss_init: degenerate data (zero spread)");

    double n = static_cast<double>(sorted.size());
    double iqr = detail::quantile_sorted(sorted, 0.75) - detail::quantile_sorted(sorted, 0.25);
    double width = 2.0 * iqr / std::cbrt(n);
    if (!(width > 0.0)) width = (hi - lo) / std::ceil(std::sqrt(n));
    std::size_t nbins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
    nbins = std::clamp<std::size_t>(nbins, 1, 1 << 20);
    width = (hi - lo) / static_cast<double>(nbins);

    std::vector<std::size_t> counts(nbins, 0);
    for (double v : sorted) {
        auto idx = static_cast<std::size_t>((v - lo) / width);
        counts[std::min(idx, nbins - 1)] += 1;
    }
    std::size_t mode_bin = 0;
    for (std::size_t i = 1; i < nbins; ++i)
        if (counts[i] > counts[mode_bin]) mode_bin = i;
    double mu0 = lo + (static_cast<double>(mode_bin) + 0.5) * width;

    double ss1 = 0.0, ss2 = 0.0;
    std::size_t n1 = 0, n2 = 0;
    for (double v : sorted) {
        double d = v - mu0;
        if (v < mu0) {
            ss1 += d * d;
            ++n1;
        } else {
            ss2 += d * d;
            ++n2;
        }
    }
    double s10 = n1 ? std::sqrt(ss1 / static_cast<double>(n1)) : SIGMA_FLOOR;
    double s20 = n2 ? std::sqrt(ss2 / static_cast<double>(n2)) : SIGMA_FLOOR;
    return AGaussParams{mu0, s10, s20}.clamped();
}

/// Numeric maximum likelihood for the asymmetric Gaussian via Nelder-Mead
/// on the exact likelihood, started from agauss_init. Constraints (mu >= 0,
/// widths >= SIGMA_FLOOR) are enforced by clamping, and the result is never
/// worse than the start point.
inline AGaussFit fit_agauss(std::span<const double> samples, const FitOptions& opts = {}) {
    detail::check_samples(samples, std::max<std::size_t>(opts.min_samples, 2), "fit_agauss");
    AGaussParams init = agauss_init(samples);
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());

    auto clamp_point = [](const std::vector<double>& v) {
        return AGaussParams{v[0], v[1], v[2]}.clamped();
    };
    auto objective = [&](const std::vector<double>& v) {
        return agauss_nll(sorted, clamp_point(v));
    };
    NmOptions nm;
    nm.max_iters = opts.max_iters;
    nm.rel_tol = opts.rel_tol;
    auto res = nelder_mead(objective, {init.mu, init.sigma1, init.sigma2}, nm);

    AGaussFit fit;
    fit.params = clamp_point(res.x);
    fit.converged = res.converged;
    fit.nll = res.fx;
    fit.iterations = res.iterations;
    return fit;
}

struct FitDiag {
    std::size_t n = 0;
    double nll = 0.0;
    bool converged = true;
};

/// Fitted parameters for every metric of one language, plus per-metric fit
/// diagnostics. Metrics with too few observations appear in `omitted`.
struct ParamSet {
    Language language = Language::Other;
    std::map<std::string, FittedParams> metrics;
    std::map<std::string, FitDiag> diagnostics;
    std::map<std::string, std::size_t> omitted;

    const FittedParams* find(const std::string& metric) const {
        auto it = metrics.find(metric);
        return it == metrics.end() ? nullptr : &it->second;
    }
};

/// Fits every registry metric available in `language` from the normalized
/// corpus: exponential metrics by the closed form, asymmetric-Gaussian
/// metrics by the numeric likelihood fit. Fits are independent per metric.
inline ParamSet fit_all(const std::vector<MetricVector>& corpus,
                        const std::vector<MetricDef>& defs, Language language,
                        const FitOptions& opts = {}) {
    std::size_t n_lang = 0;
    for (const auto& v : corpus)
        if (v.language == language) ++n_lang;
    if (n_lang == 0)
        throw numeric_error("fit_all: no records for language " + language_name(language));

    ParamSet ps;
    ps.language = language;
    for (const auto& def : defs) {
        if (!def.languages.count(language)) continue;
        std::vector<double> samples;
        samples.reserve(n_lang);
        for (const auto& v : corpus) {
            if (v.language != language) continue;
            auto it = v.values.find(def.name);
            if (it != v.values.end()) samples.push_back(it->second);
        }
        if (samples.size() < opts.min_samples) {
            ps.omitted[def.name] = samples.size();
            ps.diagnostics[def.name] = FitDiag{samples.size(), 0.0, false};
            continue;
        }
        if (def.family == Family::Exponential) {
            auto fit = fit_exponential(samples, opts);
            ps.metrics[def.name] = FittedParams(fit.params, fit.uninformative);
            ps.diagnostics[def.name] = FitDiag{samples.size(), fit.nll, true};
        } else {
            double lo = *std::min_element(samples.begin(), samples.end());
            double hi = *std::max_element(samples.begin(), samples.end());
            if (!(hi > lo)) {
                // constant non-monotonic metric: nothing to fit
                ps.omitted[def.name] = samples.size();
                ps.diagnostics[def.name] = FitDiag{samples.size(), 0.0, false};
                continue;
            }
            auto fit = fit_agauss(samples, opts);
            ps.metrics[def.name] = FittedParams(fit.params);
            ps.diagnostics[def.name] = FitDiag{samples.size(), fit.nll, fit.converged};
        }
    }
    return ps;
}

// ---------------------------------------------------------------------------
// JSON serialization

inline nlohmann::json paramset_to_json(const ParamSet& ps) {
    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& [name, fp] : ps.metrics) {
        nlohmann::json params;
        if (fp.family() == Family::Exponential) {
            params = {{"c", fp.as_exp().c}, {"lambda", fp.as_exp().lambda}};
        } else {
            const auto& g = fp.as_agauss();
            params = {{"mu", g.mu}, {"sigma1", g.sigma1}, {"sigma2", g.sigma2}};
        }
        FitDiag diag;
        if (auto it = ps.diagnostics.find(name); it != ps.diagnostics.end()) diag = it->second;
        metrics[name] = {{"family", family_name(fp.family())},
                         {"params", params},
                         {"uninformative", fp.uninformative},
                         {"n", diag.n},
                         {"nll", diag.nll},
                         {"converged", diag.converged}};
    }
    nlohmann::json j = {{"language", language_name(ps.language)}, {"metrics", metrics}};
    if (!ps.omitted.empty()) {
        nlohmann::json omitted = nlohmann::json::object();
        for (const auto& [name, n] : ps.omitted) omitted[name] = n;
        j["omitted"] = omitted;
    }
    return j;
}

inline ParamSet paramset_from_json(const nlohmann::json& j) {
    ParamSet ps;
    if (!j.is_object() || !j.contains("language") || !j.contains("metrics"))
        throw schema_error("paramset: expected object with 'language' and 'metrics'");
    ps.language = parse_language(j.at("language").get<std::string>());
    for (const auto& [name, m] : j.at("metrics").items()) {
        if (!find_metric(name)) throw schema_error("paramset: unknown metric '" + name + "'");
        std::string family = m.at("family").get<std::string>();
        const auto& params = m.at("params");
        bool uninformative = m.value("uninformative", false);
        FittedParams fp;
        if (family == "exp") {
            ExpParams p{params.at("c").get<double>(), params.at("lambda").get<double>()};
            if (!p.valid()) throw schema_error("paramset: invalid exp params for " + name);
            fp = FittedParams(p, uninformative);
        } else if (family == "agauss") {
            AGaussParams p{params.at("mu").get<double>(), params.at("sigma1").get<double>(),
                           params.at("sigma2").get<double>()};
            if (!std::isfinite(p.mu) || p.mu < 0.0 || !std::isfinite(p.sigma1) ||
                !std::isfinite(p.sigma2) || p.sigma1 < 0.0 || p.sigma2 < 0.0)
                throw schema_error("paramset: invalid agauss params for " + name);
            fp = FittedParams(p.clamped());
        } else {
            throw schema_error("paramset: unknown family '" + family + "' for " + name);
        }
        ps.metrics[name] = fp;
        ps.diagnostics[name] =
            FitDiag{m.value("n", std::size_t{0}), m.value("nll", 0.0), m.value("converged", true)};
    }
    if (j.contains("omitted"))
        for (const auto& [name, n] : j.at("omitted").items())
            ps.omitted[name] = n.get<std::size_t>();
    return ps;
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw schema_error("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw schema_error(path + ": " + e.what());
    }
    return j;
}

inline void write_json_file(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw schema_error("cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out) throw schema_error("write failed for " + path);
}

/// Loads a parameter file: either a single ParamSet or a map of language
/// name -> ParamSet (the bundled reference fixture uses the latter shape).
inline ParamSet load_paramset(const std::string& path,
                              std::optional<Language> language = std::nullopt) {
    auto j = read_json_file(path);
    if (j.contains("language")) {
        ParamSet ps = paramset_from_json(j);
        if (language && ps.language != *language)
            throw schema_error("paramset: " + path + " is for " + language_name(ps.language) +
                               ", expected " + language_name(*language));
        return ps;
    }
    if (!language)
        throw schema_error("paramset: " + path +
                           " holds multiple languages; a language must be selected");
    std::string key = language_name(*language);
    if (!j.contains(key))
        throw schema_error("paramset: " + path + " has no entry for language " + key);
    return paramset_from_json(j.at(key));
}

}  // namespace metriq
