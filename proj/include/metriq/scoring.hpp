#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "metriq/calibrate.hpp"
#include "metriq/corpus.hpp"
#include "metriq/errors.hpp"

namespace metriq {

/// Importance-derived weights at both granularities: `global` drives the
/// overall score, `per_dimension` drives the dimension sub-scores. Each
/// block sums to 1.
struct WeightSet {
    Language language = Language::Other;
    std::map<std::string, double> raw;     // importances as learned, sum 1
    std::map<std::string, double> global;  // raw renormalized exactly to 1
    std::map<Dimension, std::map<std::string, double>> per_dimension;
};

/// A repository's scores at every granularity.
struct ScoreProfile {
    std::string repo_id;
    std::map<std::string, double> per_metric;
    std::map<Dimension, double> per_dimension;
    double overall = 0.0;
    double coverage = 0.0;  // fraction of the weighted metric set present
};

/// Scores one normalized vector against fitted parameters (dispatching on
/// each metric's family). Masked metrics are absent from the result; a
/// value whose metric has no fitted parameters is an error naming it.
inline std::map<std::string, double> score_vector(const MetricVector& v, const ParamSet& params) {
    if (v.language != params.language)
        throw config_error("score_vector: vector language " + language_name(v.language) +
                           " does not match parameters for " + language_name(params.language));
    std::map<std::string, double> scores;
    for (const auto& [metric, value] : v.values) {
        const FittedParams* fp = params.find(metric);
        if (!fp)
            throw numeric_error("score_vector: no fitted parameters for metric '" + metric +
                                "' (repo " + v.repo_id + ")");
        scores[metric] = fp->score(value);
    }
    return scores;
}

/// Turns learned importances into a WeightSet: globally renormalized to
/// sum exactly 1, and renormalized again inside each dimension. A
/// dimension whose importances sum to 0 falls back to uniform weights and
/// a warning.
inline WeightSet derive_weights(const std::map<std::string, double>& raw_importances,
                                const std::vector<MetricDef>& defs, Language language,
                                std::vector<std::string>* warnings = nullptr) {
    double total = 0.0;
    for (const auto& [name, w] : raw_importances) {
        const MetricDef* def = find_metric(name);
        if (!def) throw schema_error("derive_weights: unknown metric '" + name + "'");
        if (!(w >= 0.0)) throw numeric_error("derive_weights: negative importance for " + name);
        total += w;
    }
    if (std::fabs(total - 1.0) > 1e-6)
        throw numeric_error("derive_weights: raw importances sum to " + std::to_string(total) +
                            ", expected 1");

    WeightSet ws;
    ws.language = language;
    ws.raw = raw_importances;
    for (const auto& [name, w] : raw_importances) ws.global[name] = w / total;

    for (Dimension dim : {Dimension::Maintainability, Dimension::Reliability,
                          Dimension::Functionality}) {
        std::map<std::string, double> members;
        double dim_total = 0.0;
        for (const auto& def : defs) {
            if (def.dimension != dim || !def.languages.count(language)) continue;
            auto it = raw_importances.find(def.name);
            if (it == raw_importances.end()) continue;
            members[def.name] = it->second;
            dim_total += it->second;
        }
        if (members.empty()) continue;
        if (dim_total > 0.0) {
            for (auto& [name, w] : members) w /= dim_total;
        } else {
            detail::warn(warnings, "derive_weights: dimension " + dimension_name(dim) +
                                       " has zero total importance; using uniform weights");
            for (auto& [name, w] : members) w = 1.0 / static_cast<double>(members.size());
        }
        ws.per_dimension[dim] = std::move(members);
    }
    return ws;
}

namespace detail {

// weighted mean over whichever metrics are present, weights renormalized
// over that subset; zero weight mass over a non-empty subset -> uniform
inline double weighted_mean(const std::map<std::string, double>& scores,
                            const std::map<std::string, double>& weights,
                            const std::vector<std::string>& members) {
    double mass = 0.0;
    for (const auto& name : members) mass += weights.at(name);
    double acc = 0.0;
    if (mass > 0.0) {
        for (const auto& name : members) acc += weights.at(name) / mass * scores.at(name);
    } else {
        for (const auto& name : members) acc += scores.at(name);
        acc /= static_cast<double>(members.size());
    }
    return acc;
}

}  // namespace detail

/// Aggregates per-metric scores into dimension scores and the overall
/// score. Weights renormalize over the metrics actually present, so every
/// aggregate stays a convex combination of its member scores.
inline ScoreProfile overall_score(const std::string& repo_id,
                                  const std::map<std::string, double>& scores,
                                  const WeightSet& w) {
    if (scores.empty()) throw numeric_error("overall_score: empty score set for " + repo_id);
    ScoreProfile profile;
    profile.repo_id = repo_id;
    profile.per_metric = scores;

    std::vector<std::string> present;
    for (const auto& [name, score] : scores) {
        if (!w.global.count(name))
            throw numeric_error("overall_score: metric '" + name + "' has no weight");
        present.push_back(name);
    }
    profile.overall = detail::weighted_mean(scores, w.global, present);
    profile.coverage =
        w.global.empty() ? 0.0
                         : static_cast<double>(present.size()) / static_cast<double>(w.global.size());

    for (const auto& [dim, weights] : w.per_dimension) {
        std::vector<std::string> members;
        for (const auto& [name, weight] : weights)
            if (scores.count(name)) members.push_back(name);
        if (members.empty()) continue;
        profile.per_dimension[dim] = detail::weighted_mean(scores, weights, members);
    }
    return profile;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json weightset_to_json(const WeightSet& ws) {
    nlohmann::json per_dim = nlohmann::json::object();
    for (const auto& [dim, weights] : ws.per_dimension) {
        nlohmann::json block = nlohmann::json::object();
        for (const auto& [name, w] : weights) block[name] = w;
        per_dim[dimension_name(dim)] = block;
    }
    nlohmann::json raw = nlohmann::json::object(), global = nlohmann::json::object();
    for (const auto& [name, w] : ws.raw) raw[name] = w;
    for (const auto& [name, w] : ws.global) global[name] = w;
    return {{"language", language_name(ws.language)},
            {"raw", raw},
            {"global", global},
            {"per_dimension", per_dim}};
}

inline WeightSet weightset_from_json(const nlohmann::json& j) {
    WeightSet ws;
    ws.language = parse_language(j.at("language").get<std::string>());
    for (const auto& [name, w] : j.at("raw").items()) ws.raw[name] = w.get<double>();
    for (const auto& [name, w] : j.at("global").items()) ws.global[name] = w.get<double>();
    for (const auto& [dim_name, block] : j.at("per_dimension").items()) {
        Dimension dim;
        if (dim_name == "maintainability")
            dim = Dimension::Maintainability;
        else if (dim_name == "reliability")
            dim = Dimension::Reliability;
        else if (dim_name == "functionality")
            dim = Dimension::Functionality;
        else
            throw schema_error("weights: unknown dimension '" + dim_name + "'");
        for (const auto& [name, w] : block.items()) ws.per_dimension[dim][name] = w.get<double>();
    }
    return ws;
}

inline std::vector<std::string> score_csv_header() {
    std::vector<std::string> header = {"repo_id", "overall", "maintainability", "reliability",
                                       "functionality"};
    for (const auto& def : registry()) header.push_back(def.name);
    header.push_back("coverage");
    return header;
}

inline void write_scores_csv(const std::vector<ScoreProfile>& profiles, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw schema_error("scores: cannot write " + path);
    out << csv::to_line(score_csv_header());
    for (const auto& p : profiles) {
        csv::Row row;
        row.push_back(p.repo_id);
        row.push_back(csv::format_double(p.overall));
        for (Dimension dim : {Dimension::Maintainability, Dimension::Reliability,
                              Dimension::Functionality}) {
            auto it = p.per_dimension.find(dim);
            row.push_back(it == p.per_dimension.end() ? std::string()
                                                      : csv::format_double(it->second));
        }
        for (const auto& def : registry()) {
            auto it = p.per_metric.find(def.name);
            row.push_back(it == p.per_metric.end() ? std::string()
                                                   : csv::format_double(it->second));
        }
        row.push_back(csv::format_double(p.coverage));
        out << csv::to_line(row);
    }
    if (!out) throw schema_error("scores: write failed for " + path);
}

/// Reads a score CSV back, checking schema and [0, 100] ranges; used to
/// validate emitted files.
inline std::vector<ScoreProfile> read_scores_csv(const std::string& path) {
    auto rows = csv::read_file(path);
    if (rows.empty()) throw schema_error("scores: " + path + " is empty");
    auto expected = score_csv_header();
    if (rows.front() != expected) throw schema_error("scores: unexpected header in " + path);
    std::vector<ScoreProfile> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != expected.size())
            throw schema_error("scores: ragged row at line " + std::to_string(r + 1));
        ScoreProfile p;
        p.repo_id = row[0];
        auto score_at = [&](std::size_t i, double lo, double hi) -> std::optional<double> {
            if (row[i].empty()) return std::nullopt;
            double v = csv::parse_double(row[i], expected[i] + " at line " + std::to_string(r + 1));
            if (!(v >= lo && v <= hi))
                throw schema_error("scores: " + expected[i] + "=" + row[i] + " out of range at line " +
                                   std::to_string(r + 1));
            return v;
        };
        p.overall = score_at(1, 0.0, 100.0).value();
        if (auto v = score_at(2, 0.0, 100.0)) p.per_dimension[Dimension::Maintainability] = *v;
        if (auto v = score_at(3, 0.0, 100.0)) p.per_dimension[Dimension::Reliability] = *v;
        if (auto v = score_at(4, 0.0, 100.0)) p.per_dimension[Dimension::Functionality] = *v;
        for (std::size_t i = 5; i + 1 < expected.size(); ++i)
            if (auto v = score_at(i, 0.0, 100.0)) p.per_metric[expected[i]] = *v;
        p.coverage = score_at(expected.size() - 1, 0.0, 1.0).value();
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace metriq
