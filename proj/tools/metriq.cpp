// metriq: distribution-based code quality scoring pipeline.
//
// Subcommands mirror the pipeline stages: ingest -> fit -> train-weights ->
// score -> evaluate, plus synth for generating test corpora. Every command
// writes its declared outputs plus a run manifest, validates each output by
// re-reading it, and never mutates its inputs.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "metriq/adapters.hpp"
#include "metriq/calibrate.hpp"
#include "metriq/corpus.hpp"
#include "metriq/errors.hpp"
#include "metriq/evalreport.hpp"
#include "metriq/gbm.hpp"
#include "metriq/manifest.hpp"
#include "metriq/scoring.hpp"
#include "metriq/synthgen.hpp"

namespace {

using namespace metriq;

struct RunConfig {
    std::string language;
    std::string corpus, params, weights, output, outdir, input, model_output, spec, colmap;
    std::string adapter = "canonical";
    double q = 0.2;
    std::uint64_t seed = 0;
    int bins = 20;
    std::size_t min_samples = 30;
    bool strict = false;
    bool no_filter = false;
    std::vector<std::string> patterns;
    GbmHyper gbm;
};

// config file values act as defaults; flags override them
void apply_config_file(RunConfig& cfg, const std::string& path) {
    auto j = read_json_file(path);
    cfg.language = j.value("language", cfg.language);
    cfg.corpus = j.value("corpus", cfg.corpus);
    cfg.params = j.value("params", cfg.params);
    cfg.weights = j.value("weights", cfg.weights);
    cfg.output = j.value("output", cfg.output);
    cfg.outdir = j.value("outdir", cfg.outdir);
    cfg.colmap = j.value("colmap", cfg.colmap);
    cfg.q = j.value("q", cfg.q);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.bins = j.value("bins", cfg.bins);
    cfg.min_samples = j.value("min_samples", cfg.min_samples);
    cfg.strict = j.value("strict", cfg.strict);
    if (j.contains("filter_patterns"))
        cfg.patterns = j.at("filter_patterns").get<std::vector<std::string>>();
    if (j.contains("gbm")) {
        const auto& g = j.at("gbm");
        cfg.gbm.trees = g.value("trees", cfg.gbm.trees);
        cfg.gbm.eta = g.value("eta", cfg.gbm.eta);
        cfg.gbm.max_depth = g.value("max_depth", cfg.gbm.max_depth);
        cfg.gbm.min_leaf = g.value("min_leaf", cfg.gbm.min_leaf);
    }
}

std::string need(const std::string& value, const char* flag) {
    if (value.empty()) throw config_error(std::string("missing required option --") + flag);
    return value;
}

Language need_language(const std::string& value) {
    std::string v = need(value, "language");
    for (Language l : {Language::Java, Language::Python, Language::JavaScript,
                       Language::TypeScript, Language::Other})
        if (language_name(l) == v) return l;
    throw config_error("unknown language '" + v + "'");
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

std::vector<std::string> language_features(Language lang) {
    std::vector<std::string> names;
    for (const auto& def : registry())
        if (def.languages.count(lang)) names.push_back(def.name);
    return names;
}

// corpus rows of other languages are skipped with a note
std::vector<RepoRecord> keep_language(std::vector<RepoRecord> records, Language lang) {
    std::vector<RepoRecord> kept;
    for (auto& rec : records)
        if (rec.language == lang) kept.push_back(std::move(rec));
    if (kept.empty())
        throw numeric_error("corpus has no rows for language " + language_name(lang));
    if (kept.size() != records.size())
        std::cerr << "note: " << records.size() - kept.size() << " rows of other languages skipped\n";
    return kept;
}

struct ScoredCorpus {
    std::vector<ScoredRepo> repos;
    std::vector<ScoreProfile> profiles;
};

ScoredCorpus score_corpus(const std::vector<RepoRecord>& records, const ParamSet& params,
                          const WeightSet* weights) {
    ScoredCorpus out;
    for (const auto& rec : records) {
        MetricVector v = normalize(rec, registry());
        auto scores = score_vector(v, params);
        out.repos.push_back({rec.repo_id, rec.stars, scores});
        if (weights) out.profiles.push_back(overall_score(rec.repo_id, scores, *weights));
    }
    return out;
}

struct SplitData {
    std::vector<std::vector<double>> x_train, x_val;
    std::vector<int> y_train, y_val;
    std::vector<LabeledExample> train, val;
};

SplitData label_and_split(const std::vector<ScoredRepo>& repos,
                          const std::vector<std::string>& features, double q,
                          std::uint64_t seed) {
    auto labeled = make_labels(repos, features, q);
    auto [train, val] = split_train_val(labeled, seed);
    SplitData d;
    for (const auto& ex : train) {
        d.x_train.push_back(ex.features);
        d.y_train.push_back(ex.label);
    }
    for (const auto& ex : val) {
        d.x_val.push_back(ex.features);
        d.y_val.push_back(ex.label);
    }
    d.train = std::move(train);
    d.val = std::move(val);
    return d;
}

// ---------------------------------------------------------------------------
// commands

int cmd_ingest(const RunConfig& cfg) {
    std::string input = need(cfg.input, "input");
    std::string output = need(cfg.output, "output");
    std::vector<std::string> warnings;
    ColumnMap colmap = cfg.colmap.empty() ? default_column_map() : load_column_map(cfg.colmap);

    std::vector<RepoRecord> records;
    if (cfg.adapter == "canonical")
        records = ingest_canonical(input, &warnings);
    else if (cfg.adapter == "sonarqube")
        records = ingest_sonarqube(input, colmap, &warnings);
    else if (cfg.adapter == "ck")
        records = ingest_ck(input, colmap, &warnings);
    else
        throw config_error("unknown adapter '" + cfg.adapter + "'");
    print_warnings(warnings);

    std::size_t dropped = 0;
    if (!cfg.no_filter) {
        auto patterns = cfg.patterns.empty() ? default_filter_patterns() : cfg.patterns;
        auto [kept, removed] = filter_non_engineering(records, patterns);
        dropped = removed.size();
        records = std::move(kept);
    }
    write_canonical(records, output);
    ingest_canonical(output);  // validate what we wrote

    write_manifest({"ingest", 0, {input}, {output},
                    {{"adapter", cfg.adapter}, {"dropped", dropped}}},
                   output + ".manifest.json");
    std::cout << "ingest: " << records.size() << " repositories kept, " << dropped
              << " filtered -> " << output << '\n';
    return 0;
}

int cmd_fit(const RunConfig& cfg) {
    std::string corpus_path = need(cfg.corpus, "corpus");
    std::string output = need(cfg.output, "output");
    Language lang = need_language(cfg.language);

    std::vector<std::string> warnings;
    auto records = keep_language(ingest_canonical(corpus_path, &warnings), lang);
    print_warnings(warnings);
    auto vectors = normalize_all(records, registry());

    FitOptions opts;
    opts.min_samples = cfg.min_samples;
    ParamSet ps = fit_all(vectors, registry(), lang, opts);
    if (cfg.strict)
        for (const auto& [name, diag] : ps.diagnostics)
            if (ps.metrics.count(name) && !diag.converged)
                throw numeric_error("fit: metric " + name + " did not converge (strict mode)");

    write_json_file(paramset_to_json(ps), output);
    load_paramset(output);  // validate

    write_manifest({"fit", 0, {corpus_path}, {output},
                    {{"language", language_name(lang)}, {"min_samples", cfg.min_samples}}},
                   output + ".manifest.json");
    std::cout << "fit: " << ps.metrics.size() << " metrics fitted, " << ps.omitted.size()
              << " omitted -> " << output << '\n';
    return 0;
}

int cmd_train_weights(const RunConfig& cfg) {
    std::string corpus_path = need(cfg.corpus, "corpus");
    std::string params_path = need(cfg.params, "params");
    std::string weights_out = need(cfg.weights, "output-weights");
    std::string model_out = need(cfg.model_output, "output-model");

    std::optional<Language> lang_hint;
    if (!cfg.language.empty()) lang_hint = need_language(cfg.language);
    ParamSet params = load_paramset(params_path, lang_hint);
    Language lang = params.language;

    auto records = keep_language(ingest_canonical(corpus_path), lang);
    auto scored = score_corpus(records, params, nullptr);
    auto features = language_features(lang);
    auto split = label_and_split(scored.repos, features, cfg.q, cfg.seed);

    auto result = train_gbc(split.x_train, split.y_train, cfg.gbm, features, cfg.seed);
    auto importances = feature_importances(result.model);
    std::map<std::string, double> raw;
    for (std::size_t i = 0; i < features.size(); ++i) raw[features[i]] = importances[i];

    std::vector<std::string> warnings;
    WeightSet ws = derive_weights(raw, registry(), lang, &warnings);
    print_warnings(warnings);

    write_json_file(weightset_to_json(ws), weights_out);
    write_json_file(model_to_json(result.model), model_out);
    weightset_from_json(read_json_file(weights_out));  // validate
    model_from_json(read_json_file(model_out));

    write_manifest({"train-weights", cfg.seed, {corpus_path, params_path},
                    {weights_out, model_out},
                    {{"q", cfg.q},
                     {"trees", cfg.gbm.trees},
                     {"eta", cfg.gbm.eta},
                     {"max_depth", cfg.gbm.max_depth},
                     {"min_leaf", cfg.gbm.min_leaf}}},
                   weights_out + ".manifest.json");
    std::cout << "train-weights: " << split.train.size() << " train / " << split.val.size()
              << " val examples -> " << weights_out << ", " << model_out << '\n';
    return 0;
}

int cmd_score(const RunConfig& cfg) {
    std::string corpus_path = need(cfg.corpus, "corpus");
    std::string params_path = need(cfg.params, "params");
    std::string weights_path = need(cfg.weights, "weights");
    std::string output = need(cfg.output, "output");

    WeightSet ws = weightset_from_json(read_json_file(weights_path));
    ParamSet params = load_paramset(params_path, ws.language);
    auto records = keep_language(ingest_canonical(corpus_path), ws.language);
    auto scored = score_corpus(records, params, &ws);

    write_scores_csv(scored.profiles, output);
    read_scores_csv(output);  // validate

    write_manifest({"score", 0, {corpus_path, params_path, weights_path}, {output},
                    {{"language", language_name(ws.language)}}},
                   output + ".manifest.json");
    std::cout << "score: " << scored.profiles.size() << " repositories -> " << output << '\n';
    return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
    std::string corpus_path = need(cfg.corpus, "corpus");
    std::string params_path = need(cfg.params, "params");
    std::string weights_path = need(cfg.weights, "weights");
    std::string outdir = need(cfg.outdir, "outdir");
    if (cfg.bins < 1) throw config_error("--bins must be >= 1");

    WeightSet ws = weightset_from_json(read_json_file(weights_path));
    ParamSet params = load_paramset(params_path, ws.language);
    Language lang = ws.language;
    auto records = keep_language(ingest_canonical(corpus_path), lang);
    auto scored = score_corpus(records, params, &ws);
    auto features = language_features(lang);
    auto split = label_and_split(scored.repos, features, cfg.q, cfg.seed);

    // classification half of the report
    auto gbc = train_gbc(split.x_train, split.y_train, cfg.gbm, features, cfg.seed);
    std::vector<double> probs;
    for (const auto& x : split.x_val) probs.push_back(predict_proba(gbc.model, x));
    auto cm = confusion_metrics(probs, split.y_val, 0.5);
    double auc = auc_roc(probs, split.y_val);

    // regression half: log10(1 + stars) on the same split
    std::map<std::string, long long> stars;
    for (const auto& r : scored.repos) stars[r.repo_id] = r.stars;
    auto log_stars = [&](const LabeledExample& ex) {
        return std::log10(1.0 + static_cast<double>(stars.at(ex.repo_id)));
    };
    std::vector<double> y_train, y_val;
    for (const auto& ex : split.train) y_train.push_back(log_stars(ex));
    for (const auto& ex : split.val) y_val.push_back(log_stars(ex));
    auto gbr = train_gbr(split.x_train, y_train, cfg.gbm, features, cfg.seed);
    std::vector<double> preds;
    for (const auto& x : split.x_val) preds.push_back(predict(gbr.model, x));

    EvalReport report;
    report.language = lang;
    report.accuracy = cm.accuracy;
    report.precision = cm.precision;
    report.recall = cm.recall;
    report.f1 = cm.f1;
    report.auc = auc;
    try {
        report.r2 = r_squared(preds, y_val);
    } catch (const numeric_error&) {
        report.r2_defined = false;
    }
    report.n_train = split.train.size();
    report.n_val = split.val.size();
    report.seed = cfg.seed;

    std::filesystem::create_directories(outdir);
    std::string report_path = outdir + "/report.json";
    std::string hist_path = outdir + "/hist_" + language_name(lang) + ".csv";
    std::vector<double> overall;
    for (const auto& p : scored.profiles) overall.push_back(p.overall);
    write_json_file(report_to_json(report), report_path);
    write_histogram_csv(histogram(overall, static_cast<std::size_t>(cfg.bins)), hist_path);
    report_from_json(read_json_file(report_path));  // validate
    read_histogram_csv(hist_path);

    write_manifest({"evaluate", cfg.seed, {corpus_path, params_path, weights_path},
                    {report_path, hist_path},
                    {{"q", cfg.q}, {"bins", cfg.bins}, {"threshold", 0.5}}},
                   outdir + "/manifest.json");
    std::cout << "evaluate: accuracy " << cm.accuracy << ", auc " << auc << " -> " << report_path
              << '\n';
    return 0;
}

int cmd_synth(const RunConfig& cfg) {
    std::string spec_path = need(cfg.spec, "spec");
    std::string output = need(cfg.output, "output");

    SynthSpec spec = load_synthspec(spec_path);
    std::vector<std::string> warnings;
    auto records = gen_corpus(spec, &warnings);
    print_warnings(warnings);

    write_canonical(records, output);
    ingest_canonical(output);  // validate

    write_manifest({"synth", spec.seed, {spec_path}, {output},
                    {{"n_repos", spec.n_repos}, {"language", language_name(spec.language)}}},
                   output + ".manifest.json");
    std::cout << "synth: " << records.size() << " repositories -> " << output << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"metriq: distribution-based code quality scoring"};
    app.require_subcommand(1);

    std::string config_path;
    if (const char* env = std::getenv("METRIQ_CONFIG")) config_path = env;
    app.add_option("--config", config_path, "JSON run configuration (flags override it)");

    // Resolve the config file before the real parse so flags override it.
    try {
        for (int i = 1; i + 1 < argc; ++i)
            if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
        if (!config_path.empty()) apply_config_file(cfg, config_path);
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    auto* ingest = app.add_subcommand("ingest", "convert a scanner export to the canonical corpus");
    ingest->add_option("--adapter", cfg.adapter, "canonical | sonarqube | ck");
    ingest->add_option("--input", cfg.input, "scanner export CSV");
    ingest->add_option("--output", cfg.output, "canonical corpus CSV to write");
    ingest->add_option("--colmap", cfg.colmap, "column mapping JSON (default: built-in table)");
    ingest->add_option("--pattern", cfg.patterns, "non-engineering filter substring (repeatable)");
    ingest->add_flag("--no-filter", cfg.no_filter, "skip non-engineering filtering");

    auto* fit = app.add_subcommand("fit", "fit per-metric distributions from a corpus");
    fit->add_option("--corpus", cfg.corpus, "canonical corpus CSV");
    fit->add_option("--language", cfg.language, "language to fit");
    fit->add_option("--output", cfg.output, "parameter JSON to write");
    fit->add_option("--min-samples", cfg.min_samples, "minimum observations per metric");
    fit->add_flag("--strict", cfg.strict, "fail on non-converged fits");

    auto* train = app.add_subcommand("train-weights", "learn importance weights from star labels");
    train->add_option("--corpus", cfg.corpus, "canonical corpus CSV");
    train->add_option("--params", cfg.params, "fitted parameter JSON");
    train->add_option("--language", cfg.language, "language (for multi-language parameter files)");
    train->add_option("--q", cfg.q, "label quantile (default 0.2)");
    train->add_option("--seed", cfg.seed, "split seed");
    train->add_option("--output-weights", cfg.weights, "weight JSON to write");
    train->add_option("--output-model", cfg.model_output, "model JSON to write");
    train->add_option("--trees", cfg.gbm.trees, "boosting iterations");
    train->add_option("--eta", cfg.gbm.eta, "learning rate");
    train->add_option("--max-depth", cfg.gbm.max_depth, "tree depth limit");
    train->add_option("--min-leaf", cfg.gbm.min_leaf, "minimum examples per leaf");

    auto* score = app.add_subcommand("score", "emit score profiles for a corpus");
    score->add_option("--corpus", cfg.corpus, "canonical corpus CSV");
    score->add_option("--params", cfg.params, "fitted parameter JSON");
    score->add_option("--weights", cfg.weights, "weight JSON");
    score->add_option("--output", cfg.output, "score CSV to write");

    auto* evaluate = app.add_subcommand("evaluate", "report explanatory power and score histograms");
    evaluate->add_option("--corpus", cfg.corpus, "canonical corpus CSV");
    evaluate->add_option("--params", cfg.params, "fitted parameter JSON");
    evaluate->add_option("--weights", cfg.weights, "weight JSON");
    evaluate->add_option("--q", cfg.q, "label quantile (default 0.2)");
    evaluate->add_option("--seed", cfg.seed, "split seed");
    evaluate->add_option("--outdir", cfg.outdir, "output directory");
    evaluate->add_option("--bins", cfg.bins, "histogram bins (default 20)");
    evaluate->add_option("--trees", cfg.gbm.trees, "boosting iterations");
    evaluate->add_option("--eta", cfg.gbm.eta, "learning rate");
    evaluate->add_option("--max-depth", cfg.gbm.max_depth, "tree depth limit");
    evaluate->add_option("--min-leaf", cfg.gbm.min_leaf, "minimum examples per leaf");

    auto* synth = app.add_subcommand("synth", "generate a synthetic corpus from a spec");
    synth->add_option("--spec", cfg.spec, "synthesis spec JSON");
    synth->add_option("--output", cfg.output, "canonical corpus CSV to write");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(ingest)) return cmd_ingest(cfg);
        if (app.got_subcommand(fit)) return cmd_fit(cfg);
        if (app.got_subcommand(train)) return cmd_train_weights(cfg);
        if (app.got_subcommand(score)) return cmd_score(cfg);
        if (app.got_subcommand(evaluate)) return cmd_evaluate(cfg);
        if (app.got_subcommand(synth)) return cmd_synth(cfg);
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const schema_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
