#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "metriq/corpus.hpp"
#include "metriq/csv.hpp"
#include "metriq/errors.hpp"

namespace metriq {

struct ConfusionMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool precision_defined = true;  // false when no positive predictions
    bool recall_defined = true;     // false when no positive labels
};

/// Thresholded confusion-matrix metrics; prediction is prob >= threshold.
/// Precision and recall report 0 (flagged) when their denominator is 0.
inline ConfusionMetrics confusion_metrics(std::span<const double> probs,
                                          std::span<const int> labels, double threshold = 0.5) {
    if (probs.size() != labels.size() || probs.empty())
        throw config_error("confusion_metrics: probs and labels must have equal nonzero length");
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        bool predicted = probs[i] >= threshold;
        bool actual = labels[i] == 1;
        if (predicted && actual) ++tp;
        else if (predicted) ++fp;
        else if (actual) ++fn;
        else ++tn;
    }
    ConfusionMetrics m;
    m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(probs.size());
    if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    else m.precision_defined = false;
    if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    else m.recall_defined = false;
    if (m.precision_defined && m.recall_defined && m.precision + m.recall > 0.0)
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

/// Mann-Whitney AUC: (concordant pairs + half the ties) / (n1 * n0),
/// computed from midranks in O(n log n).
inline double auc_roc(std::span<const double> probs, std::span<const int> labels) {
    if (probs.size() != labels.size() || probs.empty())
        throw config_error("auc_roc: probs and labels must have equal nonzero length");
    std::size_t n1 = 0;
    for (int label : labels) n1 += static_cast<std::size_t>(label == 1);
    std::size_t n0 = probs.size() - n1;
    if (n1 == 0 || n0 == 0) throw numeric_error("auc_roc: both classes must be present");

    std::vector<std::size_t> order(probs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });

    double positive_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && probs[order[j]] == probs[order[i]]) ++j;
        double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1) positive_rank_sum += midrank;
        i = j;
    }
    double u = positive_rank_sum - 0.5 * static_cast<double>(n1) * static_cast<double>(n1 + 1);
    return u / (static_cast<double>(n1) * static_cast<double>(n0));
}

/// Coefficient of determination, 1 - SS_res/SS_tot.
inline double r_squared(std::span<const double> preds, std::span<const double> targets) {
    if (preds.size() != targets.size() || preds.size() < 2)
        throw config_error("r_squared: need matching inputs of length >= 2");
    double mean = 0.0;
    for (double t : targets) mean += t;
    mean /= static_cast<double>(targets.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        ss_res += (targets[i] - preds[i]) * (targets[i] - preds[i]);
        ss_tot += (targets[i] - mean) * (targets[i] - mean);
    }
    if (!(ss_tot > 0.0)) throw numeric_error("r_squared: targets are constant, R2 undefined");
    return 1.0 - ss_res / ss_tot;
}

struct HistogramBin {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;
};

/// Equal-width histogram over [0, 100]; the last bin is closed on the
/// right so a score of exactly 100 lands in it.
inline std::vector<HistogramBin> histogram(std::span<const double> scores, std::size_t bins) {
    if (bins < 1) throw config_error("histogram: need at least one bin");
    std::vector<HistogramBin> out(bins);
    double width = 100.0 / static_cast<double>(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        out[b].lower = static_cast<double>(b) * width;
        out[b].upper = static_cast<double>(b + 1) * width;
    }
    for (double s : scores) {
        auto idx = static_cast<std::size_t>(std::clamp(s, 0.0, 100.0) / width);
        out[std::min(idx, bins - 1)].count += 1;
    }
    return out;
}

inline void write_histogram_csv(const std::vector<HistogramBin>& hist, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw schema_error("histogram: cannot write " + path);
    out << "bin_lower,bin_upper,count\n";
    for (const auto& bin : hist)
        out << csv::format_double(bin.lower) << ',' << csv::format_double(bin.upper) << ','
            << bin.count << '\n';
    if (!out) throw schema_error("histogram: write failed for " + path);
}

inline std::vector<HistogramBin> read_histogram_csv(const std::string& path) {
    auto rows = csv::read_file(path);
    if (rows.empty() || rows.front() != csv::Row{"bin_lower", "bin_upper", "count"})
        throw schema_error("histogram: bad header in " + path);
    std::vector<HistogramBin> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 3) throw schema_error("histogram: ragged row in " + path);
        HistogramBin bin;
        bin.lower = csv::parse_double(rows[r][0], "bin_lower");
        bin.upper = csv::parse_double(rows[r][1], "bin_upper");
        bin.count = static_cast<std::size_t>(csv::parse_int(rows[r][2], "count"));
        out.push_back(bin);
    }
    return out;
}

/// Explanatory-power report for one language (classification on quantile
/// labels, regression on log-stars).
struct EvalReport {
    Language language = Language::Other;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
    double r2 = 0.0;
    bool r2_defined = true;
    std::size_t n_train = 0;
    std::size_t n_val = 0;
    double threshold = 0.5;
    std::uint64_t seed = 0;
};

inline nlohmann::json report_to_json(const EvalReport& r) {
    nlohmann::json j = {{"language", language_name(r.language)},
                        {"accuracy", r.accuracy},
                        {"precision", r.precision},
                        {"recall", r.recall},
                        {"f1", r.f1},
                        {"auc_roc", r.auc},
                        {"n_train", r.n_train},
                        {"n_val", r.n_val},
                        {"threshold", r.threshold},
                        {"seed", r.seed}};
    if (r.r2_defined) j["r2"] = r.r2;
    else j["r2"] = nullptr;
    return j;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
    EvalReport r;
    r.language = parse_language(j.at("language").get<std::string>());
    r.accuracy = j.at("accuracy").get<double>();
    r.precision = j.at("precision").get<double>();
    r.recall = j.at("recall").get<double>();
    r.f1 = j.at("f1").get<double>();
    r.auc = j.at("auc_roc").get<double>();
    if (j.at("r2").is_null()) r.r2_defined = false;
    else r.r2 = j.at("r2").get<double>();
    r.n_train = j.at("n_train").get<std::size_t>();
    r.n_val = j.at("n_val").get<std::size_t>();
    r.threshold = j.at("threshold").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    return r;
}

}  // namespace metriq
