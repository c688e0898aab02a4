#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "metriq/csv.hpp"
#include "metriq/distmodel.hpp"
#include "metriq/errors.hpp"

namespace metriq {

enum class Language { Java, Python, JavaScript, TypeScript, Other };

inline std::string language_name(Language l) {
    switch (l) {
        case Language::Java: return "java";
        case Language::Python: return "python";
        case Language::JavaScript: return "javascript";
        case Language::TypeScript: return "typescript";
        default: return "other";
    }
}

inline Language parse_language(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "java") return Language::Java;
    if (s == "python") return Language::Python;
    if (s == "javascript") return Language::JavaScript;
    if (s == "typescript") return Language::TypeScript;
    return Language::Other;
}

enum class Dimension { Maintainability, Reliability, Functionality };

inline std::string dimension_name(Dimension d) {
    switch (d) {
        case Dimension::Maintainability: return "maintainability";
        case Dimension::Reliability: return "reliability";
        default: return "functionality";
    }
}

/// How a raw counter is scaled to a size-independent value.
enum class Normalizer {
    NCLOC,                // / non-comment lines of code
    NCLOC_PLUS_COMMENTS,  // / (ncloc + comment lines)
    LOC,                  // / lines of code
    FILES,                // / number of files
    STATEMENTS,           // / number of statements
    CLASS_MEAN,           // already a per-class mean; passed through
    NONE,
};

struct MetricDef {
    std::string name;        // canonical metric name
    Dimension dimension;
    Family family;           // which distribution family models it
    Normalizer normalizer;
    std::set<Language> languages;  // where the metric is available
    std::string source;      // raw counter it reads (usually == name)
};

/// The built-in registry: 20 metrics, 12 maintainability / 3 reliability /
/// 5 functionality, 8 of them modeled as asymmetric Gaussians and 12 as
/// shifted exponentials. The coupling/cohesion metrics exist only for Java.
inline const std::vector<MetricDef>& registry() {
    static const std::set<Language> kAll = {Language::Java, Language::Python,
                                            Language::JavaScript, Language::TypeScript,
                                            Language::Other};
    static const std::set<Language> kJava = {Language::Java};
    static const std::vector<MetricDef> defs = {
        {"cyclomatic_complexity", Dimension::Maintainability, Family::AsymGauss, Normalizer::NCLOC, kAll, "cyclomatic_complexity"},
        {"file_complexity", Dimension::Maintainability, Family::Exponential, Normalizer::FILES, kAll, "cyclomatic_complexity"},
        {"cognitive_complexity", Dimension::Maintainability, Family::AsymGauss, Normalizer::NCLOC, kAll, "cognitive_complexity"},
        {"code_smells", Dimension::Maintainability, Family::Exponential, Normalizer::NCLOC, kAll, "code_smells"},
        {"cbo", Dimension::Maintainability, Family::AsymGauss, Normalizer::CLASS_MEAN, kJava, "cbo"},
        {"fan_in", Dimension::Maintainability, Family::AsymGauss, Normalizer::CLASS_MEAN, kJava, "fan_in"},
        {"fan_out", Dimension::Maintainability, Family::AsymGauss, Normalizer::CLASS_MEAN, kJava, "fan_out"},
        {"dit", Dimension::Maintainability, Family::Exponential, Normalizer::CLASS_MEAN, kJava, "dit"},
        {"noc", Dimension::Maintainability, Family::Exponential, Normalizer::CLASS_MEAN, kJava, "noc"},
        {"lcom", Dimension::Maintainability, Family::Exponential, Normalizer::CLASS_MEAN, kJava, "lcom"},
        {"tcc", Dimension::Maintainability, Family::AsymGauss, Normalizer::CLASS_MEAN, kJava, "tcc"},
        {"lcc", Dimension::Maintainability, Family::AsymGauss, Normalizer::CLASS_MEAN, kJava, "lcc"},
        {"violations", Dimension::Reliability, Family::Exponential, Normalizer::NCLOC, kAll, "violations"},
        {"critical_violations", Dimension::Reliability, Family::Exponential, Normalizer::NCLOC, kAll, "critical_violations"},
        {"info_violations", Dimension::Reliability, Family::Exponential, Normalizer::NCLOC, kAll, "info_violations"},
        {"lines_to_cover", Dimension::Functionality, Family::Exponential, Normalizer::NCLOC, kAll, "lines_to_cover"},
        {"comment_lines", Dimension::Functionality, Family::AsymGauss, Normalizer::NCLOC_PLUS_COMMENTS, kAll, "comment_lines"},
        {"duplicated_blocks", Dimension::Functionality, Family::Exponential, Normalizer::STATEMENTS, kAll, "duplicated_blocks"},
        {"duplicated_files", Dimension::Functionality, Family::Exponential, Normalizer::FILES, kAll, "duplicated_files"},
        {"duplicated_lines", Dimension::Functionality, Family::Exponential, Normalizer::LOC, kAll, "duplicated_lines"},
    };
    return defs;
}

inline const MetricDef* find_metric(const std::string& name) {
    for (const auto& def : registry())
        if (def.name == name) return &def;
    return nullptr;
}

/// One repository's identity plus its raw counters. `raw` holds the metric
/// counters keyed by canonical column name; the comment_lines column feeds
/// both the raw map and the denominator of its own normalization rule.
struct RepoRecord {
    std::string repo_id;
    Language language = Language::Other;
    long long stars = 0;
    std::string name_text;
    struct Denominators {
        double ncloc = 0;
        double loc = 0;
        double comment_lines = 0;
        double files = 0;
        double statements = 0;
        bool operator==(const Denominators&) const = default;
    } denominators;
    std::map<std::string, double> raw;

    bool operator==(const RepoRecord&) const = default;
};

/// Normalized metric values for one repository; metrics absent from the
/// map are masked (unavailable for the language or missing in the data).
struct MetricVector {
    std::string repo_id;
    Language language = Language::Other;
    std::map<std::string, double> values;

    bool has(const std::string& metric) const { return values.count(metric) > 0; }
};

namespace detail {

// the canonical header, in order; class-metric columns may be omitted
inline const std::vector<std::string>& canonical_columns() {
    static const std::vector<std::string> cols = {
        "repo_id", "language", "stars", "name_text", "ncloc", "loc", "comment_lines",
        "files", "statements", "cyclomatic_complexity", "cognitive_complexity",
        "code_smells", "violations", "critical_violations", "info_violations",
        "lines_to_cover", "duplicated_blocks", "duplicated_files", "duplicated_lines",
        "cbo", "fan_in", "fan_out", "dit", "noc", "lcom", "tcc", "lcc"};
    return cols;
}

inline constexpr std::size_t N_REQUIRED_COLUMNS = 19;  // everything before cbo

inline const std::vector<std::string>& class_metric_names() {
    static const std::vector<std::string> names = {"cbo", "fan_in", "fan_out", "dit",
                                                   "noc",  "lcom",  "tcc",     "lcc"};
    return names;
}

inline bool is_class_metric(const std::string& name) {
    const auto& names = class_metric_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

inline void warn(std::vector<std::string>* warnings, std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
}

inline double parse_counter(const std::string& cell, const std::string& column, std::size_t line) {
    double v = csv::parse_double(cell, column + " at line " + std::to_string(line));
    if (v < 0.0)
        throw schema_error("negative counter " + column + "=" + cell + " at line " +
                           std::to_string(line));
    return v;
}

}  // namespace detail

/// Reads a canonical corpus CSV. Unknown columns are skipped with a
/// warning; a missing required column is a schema error naming it; a
/// negative counter is a row error citing the line.
inline std::vector<RepoRecord> ingest_canonical(const std::string& path,
                                                std::vector<std::string>* warnings = nullptr) {
    auto rows = csv::read_file(path);
    if (rows.empty()) throw schema_error("corpus: " + path + " is empty");
    const auto& header = rows.front();
    const auto& canonical = detail::canonical_columns();

    std::map<std::string, std::size_t> col_index;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (std::find(canonical.begin(), canonical.end(), header[i]) == canonical.end()) {
            detail::warn(warnings, "corpus: ignoring unknown column '" + header[i] + "'");
            continue;
        }
        if (!col_index.emplace(header[i], i).second)
            throw schema_error("corpus: duplicate column '" + header[i] + "'");
    }
    for (std::size_t i = 0; i < detail::N_REQUIRED_COLUMNS; ++i)
        if (!col_index.count(canonical[i]))
            throw schema_error("corpus: missing required column '" + canonical[i] + "'");

    std::vector<RepoRecord> records;
    std::set<std::string> seen_ids;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        std::size_t line = r + 1;
        if (row.size() != header.size())
            throw schema_error("corpus: row at line " + std::to_string(line) + " has " +
                               std::to_string(row.size()) + " fields, header has " +
                               std::to_string(header.size()));
        auto cell = [&](const std::string& name) -> const std::string& {
            return row[col_index.at(name)];
        };
        auto has_col = [&](const std::string& name) { return col_index.count(name) > 0; };

        RepoRecord rec;
        rec.repo_id = cell("repo_id");
        if (rec.repo_id.empty())
            throw schema_error("corpus: empty repo_id at line " + std::to_string(line));
        if (!seen_ids.insert(rec.repo_id).second)
            throw schema_error("corpus: duplicate repo_id '" + rec.repo_id + "' at line " +
                               std::to_string(line));
        rec.language = parse_language(cell("language"));
        rec.name_text = cell("name_text");
        if (!cell("stars").empty()) {
            long long stars = csv::parse_int(cell("stars"), "stars at line " + std::to_string(line));
            if (stars < 0)
                throw schema_error("negative counter stars=" + cell("stars") + " at line " +
                                   std::to_string(line));
            rec.stars = stars;
        }
        auto denom = [&](const std::string& name) -> double {
            const auto& v = cell(name);
            return v.empty() ? 0.0 : detail::parse_counter(v, name, line);
        };
        rec.denominators.ncloc = denom("ncloc");
        rec.denominators.loc = denom("loc");
        rec.denominators.comment_lines = denom("comment_lines");
        rec.denominators.files = denom("files");
        rec.denominators.statements = denom("statements");
        if (!cell("comment_lines").empty())
            rec.raw["comment_lines"] = rec.denominators.comment_lines;

        for (std::size_t i = 9; i < canonical.size(); ++i) {
            const std::string& name = canonical[i];
            if (!has_col(name)) continue;
            const auto& v = cell(name);
            if (v.empty()) continue;
            rec.raw[name] = detail::parse_counter(v, name, line);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

/// Writes records back in the canonical schema (all 27 columns). Numbers
/// use the shortest round-trip decimal form; missing counters stay empty.
inline void write_canonical(const std::vector<RepoRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw schema_error("corpus: cannot write " + path);
    const auto& canonical = detail::canonical_columns();
    out << csv::to_line(canonical);
    for (const auto& rec : records) {
        csv::Row row;
        row.push_back(rec.repo_id);
        row.push_back(language_name(rec.language));
        row.push_back(std::to_string(rec.stars));
        row.push_back(rec.name_text);
        row.push_back(csv::format_double(rec.denominators.ncloc));
        row.push_back(csv::format_double(rec.denominators.loc));
        row.push_back(rec.raw.count("comment_lines")
                          ? csv::format_double(rec.raw.at("comment_lines"))
                          : std::string());
        row.push_back(csv::format_double(rec.denominators.files));
        row.push_back(csv::format_double(rec.denominators.statements));
        for (std::size_t i = 9; i < canonical.size(); ++i) {
            auto it = rec.raw.find(canonical[i]);
            row.push_back(it == rec.raw.end() ? std::string() : csv::format_double(it->second));
        }
        out << csv::to_line(row);
    }
    if (!out) throw schema_error("corpus: write failed for " + path);
}

/// Default substrings that flag non-engineering repositories.
inline const std::vector<std::string>& default_filter_patterns() {
    static const std::vector<std::string> patterns = {
        "awesome", "guide", "interview", "tutorial", "cheatsheet",
        "roadmap", "book",  "course",    "list of"};
    return patterns;
}

/// Partitions records into (kept, dropped): dropped iff any pattern occurs
/// case-insensitively in name_text.
inline std::pair<std::vector<RepoRecord>, std::vector<RepoRecord>> filter_non_engineering(
    const std::vector<RepoRecord>& records, const std::vector<std::string>& patterns) {
    if (patterns.empty()) throw config_error("filter: pattern list must not be empty");
    std::vector<std::string> lowered;
    lowered.reserve(patterns.size());
    for (const auto& p : patterns) lowered.push_back(detail::lower(p));
    std::pair<std::vector<RepoRecord>, std::vector<RepoRecord>> out;
    for (const auto& rec : records) {
        std::string text = detail::lower(rec.name_text);
        bool dropped = std::any_of(lowered.begin(), lowered.end(), [&](const std::string& p) {
            return text.find(p) != std::string::npos;
        });
        (dropped ? out.second : out.first).push_back(rec);
    }
    return out;
}

/// One class measurement row from a class-level scanner. Metrics that the
/// scanner could not define for the class are simply absent.
struct ClassRow {
    std::string repo_id;
    std::string class_name;
    std::map<std::string, double> values;
};

/// Mean of each class metric over all classes of one repository; classes
/// where a metric is undefined are excluded from that metric's mean.
inline std::map<std::string, double> aggregate_class_rows(const std::vector<ClassRow>& rows) {
    if (rows.empty()) throw schema_error("aggregate: no class rows");
    const std::string& repo = rows.front().repo_id;
    std::map<std::string, double> sum;
    std::map<std::string, std::size_t> count;
    for (const auto& row : rows) {
        if (row.repo_id != repo)
            throw schema_error("aggregate: mixed repo_ids '" + repo + "' and '" + row.repo_id + "'");
        for (const auto& [name, value] : row.values) {
            sum[name] += value;
            count[name] += 1;
        }
    }
    std::map<std::string, double> means;
    for (const auto& [name, s] : sum) means[name] = s / static_cast<double>(count.at(name));
    return means;
}

/// Applies each metric's normalization rule to one record. Metrics missing
/// from the record, or unavailable for its language, are masked. A zero
/// denominator under a present metric is an error naming both.
inline MetricVector normalize(const RepoRecord& rec, const std::vector<MetricDef>& defs) {
    MetricVector v;
    v.repo_id = rec.repo_id;
    v.language = rec.language;
    for (const auto& def : defs) {
        if (!def.languages.count(rec.language)) continue;
        auto it = rec.raw.find(def.source);
        if (it == rec.raw.end()) continue;
        double raw = it->second;
        double den = 1.0;
        std::string den_name;
        switch (def.normalizer) {
            case Normalizer::NCLOC: den = rec.denominators.ncloc; den_name = "ncloc"; break;
            case Normalizer::NCLOC_PLUS_COMMENTS:
                den = rec.denominators.ncloc + rec.denominators.comment_lines;
                den_name = "ncloc+comment_lines";
                break;
            case Normalizer::LOC: den = rec.denominators.loc; den_name = "loc"; break;
            case Normalizer::FILES: den = rec.denominators.files; den_name = "files"; break;
            case Normalizer::STATEMENTS: den = rec.denominators.statements; den_name = "statements"; break;
            case Normalizer::CLASS_MEAN:
            case Normalizer::NONE: den = 1.0; break;
        }
        if (!(den > 0.0))
            throw schema_error("normalize: denominator " + den_name + " is 0 for metric " +
                               def.name + " in repo " + rec.repo_id);
        v.values[def.name] = raw / den;
    }
    return v;
}

inline std::vector<MetricVector> normalize_all(const std::vector<RepoRecord>& records,
                                               const std::vector<MetricDef>& defs) {
    std::vector<MetricVector> out;
    out.reserve(records.size());
    for (const auto& rec : records) out.push_back(normalize(rec, defs));
    return out;
}

}  // namespace metriq
