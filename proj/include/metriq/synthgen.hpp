#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "metriq/calibrate.hpp"
#include "metriq/corpus.hpp"
#include "metriq/distmodel.hpp"
#include "metriq/errors.hpp"
#include "metriq/prng.hpp"

namespace metriq {

/// Inverse-CDF draws from the shifted exponential; min(samples) >= c.
inline std::vector<double> sample_exponential(const ExpParams& p, std::size_t n,
                                              std::uint64_t seed) {
    if (!p.valid() || !p.informative())
        throw numeric_error("sample_exponential: uninformative parameters");
    SplitMix64 rng(seed);
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double u = rng.next_double();  // in [0, 1); log(1-u) is finite
        out.push_back(p.c - std::log1p(-u) / p.lambda);
    }
    return out;
}

/// Asymmetric-Gaussian draws: pick the left side with probability
/// sigma1/(sigma1+sigma2), reflect a half-normal of that side's width
/// about mu, and redraw anything negative (truncation at 0).
inline std::vector<double> sample_agauss(const AGaussParams& p, std::size_t n,
                                         std::uint64_t seed) {
    if (!p.valid()) throw numeric_error("sample_agauss: invalid parameters");
    SplitMix64 rng(seed);
    double left_prob = p.sigma1 / (p.sigma1 + p.sigma2);
    std::vector<double> out;
    out.reserve(n);
    while (out.size() < n) {
        bool left = rng.next_double() < left_prob;
        double z = std::fabs(rng.next_normal());
        double x = left ? p.mu - z * p.sigma1 : p.mu + z * p.sigma2;
        if (x < 0.0) continue;
        out.push_back(x);
    }
    return out;
}

struct StarModel {
    double base = 50.0;
    double beta = 4.0;
    double noise_sigma = 0.5;
};

/// Recipe for a synthetic corpus: per-metric generator parameters plus a
/// star model that ties stars to the latent quality, giving the supervised
/// stage a controllable signal.
struct SynthSpec {
    Language language = Language::Python;
    std::size_t n_repos = 200;
    std::uint64_t seed = 42;
    StarModel star_model;
    ParamSet params;
};

/// Generates records whose normalized values reproduce the generator draws.
/// Counters are written against unit denominators; the two schema-derived
/// metrics need per-record encoding instead:
///   - file_complexity rides on the cyclomatic counter, so `files` is set
///     to cyclomatic/file_complexity (and duplicated_files scaled back up);
///   - comment_lines self-normalizes, so the counter stores x/(1-x). Its
///     normalized value can never reach 1; draws at or above 1 are clamped
///     just below with a warning.
/// Stars follow round(base * exp(beta * latent/100 + N(0, noise))), where
/// latent is the uniform-weight mean score under the generator parameters.
inline std::vector<RepoRecord> gen_corpus(const SynthSpec& spec,
                                          std::vector<std::string>* warnings = nullptr) {
    if (spec.n_repos < 1) throw config_error("gen_corpus: n_repos must be >= 1");
    if (!(spec.star_model.noise_sigma >= 0.0))
        throw config_error("gen_corpus: noise_sigma must be >= 0");
    if (!(spec.star_model.base > 0.0)) throw config_error("gen_corpus: base must be > 0");
    if (spec.params.metrics.empty()) throw config_error("gen_corpus: no generator metrics");

    // generator metrics in registry order, for a stable draw sequence
    std::vector<const MetricDef*> gens;
    for (const auto& def : registry())
        if (spec.params.metrics.count(def.name)) gens.push_back(&def);
    if (gens.size() != spec.params.metrics.size())
        throw config_error("gen_corpus: generator parameter set names unknown metrics");

    bool clamped_comment = false;
    std::vector<RepoRecord> records;
    records.reserve(spec.n_repos);
    int width = static_cast<int>(std::to_string(spec.n_repos - 1).size());
    for (std::size_t i = 0; i < spec.n_repos; ++i) {
        SplitMix64 rng(mix_seed(spec.seed, i));
        std::map<std::string, double> drawn;
        double latent_sum = 0.0;
        for (const MetricDef* def : gens) {
            const FittedParams& fp = spec.params.metrics.at(def->name);
            double x;
            if (fp.family() == Family::Exponential) {
                if (fp.uninformative) {
                    x = fp.as_exp().c;  // degenerate: all mass at the threshold
                } else {
                    double u = rng.next_double();
                    x = fp.as_exp().c - std::log1p(-u) / fp.as_exp().lambda;
                }
            } else {
                const auto& g = fp.as_agauss();
                double left_prob = g.sigma1 / (g.sigma1 + g.sigma2);
                for (;;) {
                    bool left = rng.next_double() < left_prob;
                    double z = std::fabs(rng.next_normal());
                    x = left ? g.mu - z * g.sigma1 : g.mu + z * g.sigma2;
                    if (x >= 0.0) break;
                }
            }
            drawn[def->name] = x;
            latent_sum += fp.score(x);
        }
        double latent = latent_sum / static_cast<double>(gens.size());
        double noise = spec.star_model.noise_sigma > 0.0
                           ? spec.star_model.noise_sigma * rng.next_normal()
                           : 0.0;
        double stars = spec.star_model.base *
                       std::exp(spec.star_model.beta * latent / 100.0 + noise);

        RepoRecord rec;
        std::string idx = std::to_string(i);
        rec.repo_id = "synth-" + std::string(static_cast<std::size_t>(width) - idx.size(), '0') + idx;
        rec.language = spec.language;
        rec.stars = std::llround(stars);
        rec.name_text = "synthetic repository " + idx;
        rec.denominators.ncloc = 1;
        rec.denominators.loc = 1;
        rec.denominators.files = 1;
        rec.denominators.statements = 1;

        auto cyc = drawn.find("cyclomatic_complexity");
        auto fc = drawn.find("file_complexity");
        if (fc != drawn.end()) {
            double x_fc = std::max(fc->second, 1e-12);
            double x_cc = cyc != drawn.end() ? std::max(cyc->second, 1e-12) : x_fc;
            rec.denominators.files = x_cc / x_fc;
            rec.raw["cyclomatic_complexity"] = x_cc;
        } else if (cyc != drawn.end()) {
            rec.raw["cyclomatic_complexity"] = cyc->second;
        }
        for (const auto& [name, x] : drawn) {
            if (name == "cyclomatic_complexity" || name == "file_complexity") continue;
            if (name == "comment_lines") {
                double v = x;
                if (v >= 1.0 - 1e-9) {
                    v = 1.0 - 1e-9;
                    clamped_comment = true;
                }
                double counter = v / (1.0 - v);
                rec.raw["comment_lines"] = counter;
                rec.denominators.comment_lines = counter;
            } else if (name == "duplicated_files") {
                rec.raw["duplicated_files"] = x * rec.denominators.files;
            } else {
                rec.raw[name] = x;
            }
        }
        records.push_back(std::move(rec));
    }
    if (clamped_comment)
        detail::warn(warnings,
                     "gen_corpus: comment_lines draws >= 1 clamped; its normalized value is a "
                     "ratio below 1 by construction");
    return records;
}

// ---------------------------------------------------------------------------
// JSON serialization

inline nlohmann::json synthspec_to_json(const SynthSpec& spec) {
    return {{"language", language_name(spec.language)},
            {"n_repos", spec.n_repos},
            {"seed", spec.seed},
            {"star_model",
             {{"base", spec.star_model.base},
              {"beta", spec.star_model.beta},
              {"noise_sigma", spec.star_model.noise_sigma}}},
            {"params", paramset_to_json(spec.params)}};
}

inline SynthSpec synthspec_from_json(const nlohmann::json& j, const std::string& base_dir = ".") {
    SynthSpec spec;
    spec.language = parse_language(j.at("language").get<std::string>());
    spec.n_repos = j.at("n_repos").get<std::size_t>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("star_model")) {
        const auto& sm = j.at("star_model");
        spec.star_model.base = sm.value("base", spec.star_model.base);
        spec.star_model.beta = sm.value("beta", spec.star_model.beta);
        spec.star_model.noise_sigma = sm.value("noise_sigma", spec.star_model.noise_sigma);
    }
    if (j.contains("params")) {
        spec.params = paramset_from_json(j.at("params"));
    } else if (j.contains("params_path")) {
        spec.params =
            load_paramset(base_dir + "/" + j.at("params_path").get<std::string>(), spec.language);
    } else {
        throw schema_error("synthspec: needs 'params' or 'params_path'");
    }
    return spec;
}

inline SynthSpec load_synthspec(const std::string& path) {
    auto j = read_json_file(path);
    std::string dir = ".";
    if (auto pos = path.find_last_of('/'); pos != std::string::npos) dir = path.substr(0, pos);
    return synthspec_from_json(j, dir);
}

}  // namespace metriq
