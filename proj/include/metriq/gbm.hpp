#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "metriq/errors.hpp"
#include "metriq/prng.hpp"

namespace metriq {

/// A repository ready for supervised learning: stars plus its per-metric
/// scores (0-100).
struct ScoredRepo {
    std::string repo_id;
    long long stars = 0;
    std::map<std::string, double> scores;
};

struct LabeledExample {
    std::string repo_id;
    std::vector<double> features;
    int label = 0;  // 1 = top quantile by stars, 0 = bottom quantile
};

/// Value imputed for masked metrics before training: a missing metric is
/// treated as "no evidence against", the same value a below-threshold
/// observation would score.
inline constexpr double IMPUTED_SCORE = 100.0;

/// Quantile labeling: sort by stars descending (ties by repo_id ascending),
/// label the first floor(q*n) records 1 and the last floor(q*n) records 0,
/// discard the middle. Features are laid out in feature_names order.
inline std::vector<LabeledExample> make_labels(const std::vector<ScoredRepo>& records,
                                               const std::vector<std::string>& feature_names,
                                               double q = 0.2) {
    if (!(q > 0.0 && q <= 0.5)) throw config_error("make_labels: q must be in (0, 0.5]");
    std::size_t take = static_cast<std::size_t>(q * static_cast<double>(records.size()));
    if (take == 0) throw numeric_error("make_labels: too few records for quantile q");

    std::vector<const ScoredRepo*> order;
    order.reserve(records.size());
    for (const auto& r : records) order.push_back(&r);
    std::sort(order.begin(), order.end(), [](const ScoredRepo* a, const ScoredRepo* b) {
        if (a->stars != b->stars) return a->stars > b->stars;
        return a->repo_id < b->repo_id;
    });

    auto vectorize = [&](const ScoredRepo& r) {
        std::vector<double> x;
        x.reserve(feature_names.size());
        for (const auto& name : feature_names) {
            auto it = r.scores.find(name);
            x.push_back(it == r.scores.end() ? IMPUTED_SCORE : it->second);
        }
        return x;
    };

    std::vector<LabeledExample> out;
    out.reserve(2 * take);
    for (std::size_t i = 0; i < take; ++i)
        out.push_back({order[i]->repo_id, vectorize(*order[i]), 1});
    for (std::size_t i = records.size() - take; i < records.size(); ++i)
        out.push_back({order[i]->repo_id, vectorize(*order[i]), 0});
    return out;
}

/// Stratified 4:1 split with a seeded Fisher-Yates shuffle inside each
/// label class; the validation share rounds toward train.
inline std::pair<std::vector<LabeledExample>, std::vector<LabeledExample>> split_train_val(
    const std::vector<LabeledExample>& examples, std::uint64_t seed) {
    std::pair<std::vector<LabeledExample>, std::vector<LabeledExample>> out;
    for (int label : {1, 0}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < examples.size(); ++i)
            if (examples[i].label == label) idx.push_back(i);
        if (idx.size() < 2)
            throw numeric_error("split_train_val: class " + std::to_string(label) +
                                " has fewer than 2 members");
        SplitMix64 rng(mix_seed(seed, static_cast<std::uint64_t>(label)));
        for (std::size_t i = idx.size() - 1; i > 0; --i) {
            std::size_t j = rng.next_below(i + 1);
            std::swap(idx[i], idx[j]);
        }
        std::size_t n_val = idx.size() / 5;
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < n_val ? out.second : out.first).push_back(examples[idx[i]]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Regression trees

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double gain = 0.0;   // sum-of-squares reduction of the split
    double value = 0.0;  // leaf output
    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> x) const {
        int i = 0;
        while (!nodes[i].is_leaf())
            i = (x[nodes[i].feature] < nodes[i].threshold) ? nodes[i].left : nodes[i].right;
        return nodes[i].value;
    }
};

struct GbmHyper {
    int trees = 100;
    double eta = 0.1;
    int max_depth = 3;
    int min_leaf = 5;
};

namespace detail {

// Builds one least-squares tree on the residuals. Candidate thresholds are
// midpoints of consecutive distinct sorted feature values; the best split
// strictly maximizes gain, ties resolved toward the lower feature index and
// lower threshold by search order. Leaf value is sum(r)/sum(w) over leaf
// members, 0 when the denominator vanishes.
inline RegressionTree build_tree(const std::vector<std::vector<double>>& x,
                                 const std::vector<double>& residual,
                                 const std::vector<double>& weight, const GbmHyper& hyper) {
    RegressionTree tree;
    const std::size_t n_features = x.empty() ? 0 : x.front().size();

    auto leaf_value = [&](const std::vector<std::size_t>& rows) {
        double num = 0.0, den = 0.0;
        for (std::size_t i : rows) {
            num += residual[i];
            den += weight[i];
        }
        return den > 0.0 ? num / den : 0.0;
    };

    struct Best {
        double gain = 0.0;
        int feature = -1;
        double threshold = 0.0;
        std::size_t split_at = 0;  // boundary in the sorted order
    };

    auto grow = [&](auto&& self, std::vector<std::size_t> rows, int depth) -> int {
        int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        bool can_split = depth < hyper.max_depth &&
                         rows.size() >= 2 * static_cast<std::size_t>(hyper.min_leaf);
        Best best;
        std::vector<std::size_t> best_order;
        if (can_split) {
            double sum = 0.0, sum_sq = 0.0;
            for (std::size_t i : rows) {
                sum += residual[i];
                sum_sq += residual[i] * residual[i];
            }
            double n = static_cast<double>(rows.size());
            double parent_sse = sum_sq - sum * sum / n;

            std::vector<std::size_t> order(rows);
            for (std::size_t f = 0; f < n_features; ++f) {
                std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                    return x[a][f] < x[b][f];
                });
                double left_sum = 0.0, left_sq = 0.0;
                for (std::size_t k = 1; k < order.size(); ++k) {
                    double prev = x[order[k - 1]][f];
                    left_sum += residual[order[k - 1]];
                    left_sq += residual[order[k - 1]] * residual[order[k - 1]];
                    if (x[order[k]][f] <= prev) continue;  // not a distinct-value boundary
                    if (k < static_cast<std::size_t>(hyper.min_leaf) ||
                        order.size() - k < static_cast<std::size_t>(hyper.min_leaf))
                        continue;
                    double nl = static_cast<double>(k);
                    double nr = n - nl;
                    double right_sum = sum - left_sum;
                    double right_sq = sum_sq - left_sq;
                    double sse = (left_sq - left_sum * left_sum / nl) +
                                 (right_sq - right_sum * right_sum / nr);
                    double gain = parent_sse - sse;
                    if (gain > best.gain) {
                        double next = x[order[k]][f];
                        double thr = prev + 0.5 * (next - prev);
                        // adjacent doubles can round the midpoint onto prev,
                        // which would desynchronize predict from the partition
                        if (!(thr > prev && thr <= next)) continue;
                        best.gain = gain;
                        best.feature = static_cast<int>(f);
                        best.threshold = thr;
                        best.split_at = k;
                        best_order = order;
                    }
                }
            }
        }

        if (best.feature < 0) {
            tree.nodes[node_id].value = leaf_value(rows);
            return node_id;
        }
        std::vector<std::size_t> left_rows(best_order.begin(),
                                           best_order.begin() + static_cast<long>(best.split_at));
        std::vector<std::size_t> right_rows(best_order.begin() + static_cast<long>(best.split_at),
                                            best_order.end());
        tree.nodes[node_id].feature = best.feature;
        tree.nodes[node_id].threshold = best.threshold;
        tree.nodes[node_id].gain = best.gain;
        int left = self(self, std::move(left_rows), depth + 1);
        int right = self(self, std::move(right_rows), depth + 1);
        tree.nodes[node_id].left = left;
        tree.nodes[node_id].right = right;
        return node_id;
    };

    std::vector<std::size_t> all(x.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    grow(grow, std::move(all), 0);
    return tree;
}

inline double sigmoid_clamped(double f) {
    f = std::clamp(f, -36.0, 36.0);
    return 1.0 / (1.0 + std::exp(-f));
}

}  // namespace detail

struct GBMModel {
    enum class Kind { Classifier, Regressor };
    Kind kind = Kind::Classifier;
    double f0 = 0.0;
    double eta = 0.1;
    std::size_t n_features = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> feature_names;
    std::vector<RegressionTree> trees;

    double raw_score(std::span<const double> x) const {
        if (x.size() != n_features)
            throw config_error("gbm: feature count " + std::to_string(x.size()) +
                               " does not match model (" + std::to_string(n_features) + ")");
        double f = f0;
        for (const auto& t : trees) f += eta * t.predict(x);
        return f;
    }
};

/// Classifier probability: sigmoid of the raw ensemble score, with the raw
/// score clamped to +-36 so saturated ensembles stay inside (0, 1).
inline double predict_proba(const GBMModel& model, std::span<const double> x) {
    if (model.kind != GBMModel::Kind::Classifier)
        throw config_error("predict_proba: model is not a classifier");
    return detail::sigmoid_clamped(model.raw_score(x));
}

inline double predict(const GBMModel& model, std::span<const double> x) {
    return model.kind == GBMModel::Kind::Classifier ? predict_proba(model, x)
                                                    : model.raw_score(x);
}

struct TrainResult {
    GBMModel model;
    /// Training loss trace; entry 0 is the prior-only model, entry t the
    /// loss after t trees. Logistic loss for classifiers, MSE for regressors.
    std::vector<double> train_loss;
};

/// Boosted binomial-deviance classifier. The prior is log(n1/n0); each
/// round fits a least-squares tree to the gradient residuals c - p and
/// replaces leaf outputs with Newton steps sum(r)/sum(p(1-p)).
inline TrainResult train_gbc(const std::vector<std::vector<double>>& x,
                             const std::vector<int>& y, const GbmHyper& hyper = {},
                             std::vector<std::string> feature_names = {},
                             std::uint64_t seed = 0) {
    if (x.empty() || x.size() != y.size()) throw config_error("train_gbc: bad training data");
    std::size_t n1 = 0;
    for (int label : y) {
        if (label != 0 && label != 1) throw config_error("train_gbc: labels must be 0/1");
        n1 += static_cast<std::size_t>(label);
    }
    std::size_t n0 = y.size() - n1;
    if (n0 == 0 || n1 == 0) throw numeric_error("train_gbc: both classes must be present");

    TrainResult result;
    GBMModel& model = result.model;
    model.kind = GBMModel::Kind::Classifier;
    model.f0 = std::log(static_cast<double>(n1) / static_cast<double>(n0));
    model.eta = hyper.eta;
    model.n_features = x.front().size();
    model.seed = seed;
    model.feature_names = std::move(feature_names);

    std::size_t n = x.size();
    std::vector<double> f(n, model.f0), p(n), residual(n), weight(n);
    auto update_probs = [&] {
        for (std::size_t i = 0; i < n; ++i) p[i] = detail::sigmoid_clamped(f[i]);
    };
    auto log_loss = [&] {
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            loss -= y[i] == 1 ? std::log(p[i]) : std::log(1.0 - p[i]);
        return loss / static_cast<double>(n);
    };

    update_probs();
    result.train_loss.push_back(log_loss());
    for (int t = 0; t < hyper.trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            residual[i] = static_cast<double>(y[i]) - p[i];
            weight[i] = p[i] * (1.0 - p[i]);
        }
        auto tree = detail::build_tree(x, residual, weight, hyper);
        for (std::size_t i = 0; i < n; ++i) f[i] += hyper.eta * tree.predict(x[i]);
        model.trees.push_back(std::move(tree));
        update_probs();
        result.train_loss.push_back(log_loss());
    }
    return result;
}

/// Boosted squared-loss regressor sharing the tree machinery; the prior is
/// the target mean and leaf outputs are residual means.
inline TrainResult train_gbr(const std::vector<std::vector<double>>& x,
                             const std::vector<double>& y, const GbmHyper& hyper = {},
                             std::vector<std::string> feature_names = {},
                             std::uint64_t seed = 0) {
    if (x.empty() || x.size() != y.size()) throw config_error("train_gbr: bad training data");

    TrainResult result;
    GBMModel& model = result.model;
    model.kind = GBMModel::Kind::Regressor;
    double sum = 0.0;
    for (double v : y) sum += v;
    model.f0 = sum / static_cast<double>(y.size());
    model.eta = hyper.eta;
    model.n_features = x.front().size();
    model.seed = seed;
    model.feature_names = std::move(feature_names);

    std::size_t n = x.size();
    std::vector<double> f(n, model.f0), residual(n);
    const std::vector<double> unit_weight(n, 1.0);
    auto mse = [&] {
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) loss += (y[i] - f[i]) * (y[i] - f[i]);
        return loss / static_cast<double>(n);
    };

    result.train_loss.push_back(mse());
    for (int t = 0; t < hyper.trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - f[i];
        auto tree = detail::build_tree(x, residual, unit_weight, hyper);
        for (std::size_t i = 0; i < n; ++i) f[i] += hyper.eta * tree.predict(x[i]);
        model.trees.push_back(std::move(tree));
        result.train_loss.push_back(mse());
    }
    return result;
}

/// Per-feature share of total split gain across all trees; sums to 1.
/// Features that never split get 0. A model with no splits at all has no
/// importances to report.
inline std::vector<double> feature_importances(const GBMModel& model) {
    std::vector<double> gains(model.n_features, 0.0);
    double total = 0.0;
    for (const auto& tree : model.trees) {
        for (const auto& node : tree.nodes) {
            if (node.is_leaf()) continue;
            gains[static_cast<std::size_t>(node.feature)] += node.gain;
            total += node.gain;
        }
    }
    if (!(total > 0.0)) throw numeric_error("feature_importances: model has no splits");
    for (double& g : gains) g /= total;
    return gains;
}

// ---------------------------------------------------------------------------
// JSON serialization

inline nlohmann::json model_to_json(const GBMModel& model) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : model.trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& node : tree.nodes) {
            if (node.is_leaf()) {
                nodes.push_back({{"value", node.value}});
            } else {
                nodes.push_back({{"feature", node.feature},
                                 {"threshold", node.threshold},
                                 {"left", node.left},
                                 {"right", node.right},
                                 {"gain", node.gain}});
            }
        }
        trees.push_back({{"nodes", nodes}});
    }
    return {{"kind", model.kind == GBMModel::Kind::Classifier ? "classifier" : "regressor"},
            {"f0", model.f0},
            {"eta", model.eta},
            {"n_features", model.n_features},
            {"seed", model.seed},
            {"feature_names", model.feature_names},
            {"trees", trees}};
}

inline GBMModel model_from_json(const nlohmann::json& j) {
    GBMModel model;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "classifier")
        model.kind = GBMModel::Kind::Classifier;
    else if (kind == "regressor")
        model.kind = GBMModel::Kind::Regressor;
    else
        throw schema_error("model: unknown kind '" + kind + "'");
    model.f0 = j.at("f0").get<double>();
    model.eta = j.at("eta").get<double>();
    model.n_features = j.at("n_features").get<std::size_t>();
    model.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("feature_names"))
        model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    for (const auto& tj : j.at("trees")) {
        RegressionTree tree;
        for (const auto& nj : tj.at("nodes")) {
            TreeNode node;
            if (nj.contains("value")) {
                node.value = nj.at("value").get<double>();
            } else {
                node.feature = nj.at("feature").get<int>();
                node.threshold = nj.at("threshold").get<double>();
                node.left = nj.at("left").get<int>();
                node.right = nj.at("right").get<int>();
                node.gain = nj.at("gain").get<double>();
            }
            tree.nodes.push_back(node);
        }
        if (tree.nodes.empty()) throw schema_error("model: empty tree");
        tree.nodes.shrink_to_fit();
        model.trees.push_back(std::move(tree));
    }
    return model;
}

}  // namespace metriq
