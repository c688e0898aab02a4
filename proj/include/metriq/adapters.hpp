#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "metriq/corpus.hpp"

namespace metriq {

/// Scanner-column to canonical-column renames. The defaults cover the
/// usual SonarQube measure keys and CK class.csv headers; a JSON file with
/// the same two-level shape replaces them, so new scanner versions are a
/// configuration change.
struct ColumnMap {
    std::map<std::string, std::string> sonarqube;
    std::map<std::string, std::string> ck;
};

inline ColumnMap default_column_map() {
    ColumnMap m;
    m.sonarqube = {
        {"project", "repo_id"},
        {"component", "repo_id"},
        {"language", "language"},
        {"stars", "stars"},
        {"name", "name_text"},
        {"description", "name_text"},
        {"ncloc", "ncloc"},
        {"lines", "loc"},
        {"comment_lines", "comment_lines"},
        {"files", "files"},
        {"statements", "statements"},
        {"complexity", "cyclomatic_complexity"},
        {"cognitive_complexity", "cognitive_complexity"},
        {"code_smells", "code_smells"},
        {"violations", "violations"},
        {"critical_violations", "critical_violations"},
        {"info_violations", "info_violations"},
        {"lines_to_cover", "lines_to_cover"},
        {"duplicated_blocks", "duplicated_blocks"},
        {"duplicated_files", "duplicated_files"},
        {"duplicated_lines", "duplicated_lines"},
    };
    m.ck = {
        {"project", "repo_id"}, {"repo", "repo_id"}, {"class", "class_name"},
        {"cbo", "cbo"},         {"fanin", "fan_in"}, {"fanout", "fan_out"},
        {"dit", "dit"},         {"noc", "noc"},      {"lcom", "lcom"},
        {"tcc", "tcc"},         {"lcc", "lcc"},
    };
    return m;
}

inline ColumnMap load_column_map(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw schema_error("colmap: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw schema_error("colmap: " + path + ": " + e.what());
    }
    ColumnMap m;
    for (auto& [adapter, table] : j.items()) {
        auto* dst = adapter == "sonarqube" ? &m.sonarqube : adapter == "ck" ? &m.ck : nullptr;
        if (!dst) throw schema_error("colmap: unknown adapter '" + adapter + "'");
        for (auto& [src, canonical] : table.items())
            (*dst)[src] = canonical.get<std::string>();
    }
    return m;
}

/// Per-repository scanner export -> canonical records. Only mapped columns
/// are consumed; everything else is skipped with a warning. repo_id is the
/// one column that must survive the mapping.
inline std::vector<RepoRecord> ingest_sonarqube(const std::string& path, const ColumnMap& colmap,
                                                std::vector<std::string>* warnings = nullptr) {
    auto rows = csv::read_file(path);
    if (rows.empty()) throw schema_error("sonarqube: " + path + " is empty");
    const auto& header = rows.front();
    std::map<std::string, std::size_t> cols;  // canonical -> column index
    for (std::size_t i = 0; i < header.size(); ++i) {
        auto it = colmap.sonarqube.find(header[i]);
        if (it == colmap.sonarqube.end()) {
            detail::warn(warnings, "sonarqube: ignoring unmapped column '" + header[i] + "'");
            continue;
        }
        if (!cols.emplace(it->second, i).second)
            throw schema_error("sonarqube: two columns map to '" + it->second + "'");
    }
    if (!cols.count("repo_id")) throw schema_error("sonarqube: missing required column 'repo_id'");

    std::vector<RepoRecord> records;
    std::set<std::string> seen;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        std::size_t line = r + 1;
        if (row.size() != header.size())
            throw schema_error("sonarqube: ragged row at line " + std::to_string(line));
        auto cell = [&](const std::string& name) -> std::string {
            auto it = cols.find(name);
            return it == cols.end() ? std::string() : row[it->second];
        };
        RepoRecord rec;
        rec.repo_id = cell("repo_id");
        if (rec.repo_id.empty())
            throw schema_error("sonarqube: empty repo_id at line " + std::to_string(line));
        if (!seen.insert(rec.repo_id).second)
            throw schema_error("sonarqube: duplicate repo_id '" + rec.repo_id + "'");
        rec.language = parse_language(cell("language"));
        rec.name_text = cell("name_text");
        if (!cell("stars").empty()) {
            long long stars = csv::parse_int(cell("stars"), "stars at line " + std::to_string(line));
            if (stars < 0) throw schema_error("sonarqube: negative stars at line " + std::to_string(line));
            rec.stars = stars;
        }
        auto denom = [&](const std::string& name) {
            auto v = cell(name);
            return v.empty() ? 0.0 : detail::parse_counter(v, name, line);
        };
        rec.denominators.ncloc = denom("ncloc");
        rec.denominators.loc = denom("loc");
        rec.denominators.comment_lines = denom("comment_lines");
        rec.denominators.files = denom("files");
        rec.denominators.statements = denom("statements");
        if (!cell("comment_lines").empty()) rec.raw["comment_lines"] = rec.denominators.comment_lines;
        const auto& canonical = detail::canonical_columns();
        for (std::size_t i = 9; i < canonical.size(); ++i) {
            auto v = cell(canonical[i]);
            if (v.empty()) continue;
            rec.raw[canonical[i]] = detail::parse_counter(v, canonical[i], line);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

/// Class-level CK export -> one canonical record per repository holding
/// the per-class means. tcc/lcc report -1 where CK could not define them;
/// those classes are excluded from the affected means.
inline std::vector<RepoRecord> ingest_ck(const std::string& path, const ColumnMap& colmap,
                                         std::vector<std::string>* warnings = nullptr) {
    auto rows = csv::read_file(path);
    if (rows.empty()) throw schema_error("ck: " + path + " is empty");
    const auto& header = rows.front();
    std::map<std::string, std::size_t> cols;
    for (std::size_t i = 0; i < header.size(); ++i) {
        auto it = colmap.ck.find(header[i]);
        if (it == colmap.ck.end()) {
            detail::warn(warnings, "ck: ignoring unmapped column '" + header[i] + "'");
            continue;
        }
        if (!cols.emplace(it->second, i).second)
            throw schema_error("ck: two columns map to '" + it->second + "'");
    }
    if (!cols.count("repo_id")) throw schema_error("ck: missing required column 'repo_id'");

    std::vector<std::string> repo_order;
    std::map<std::string, std::vector<ClassRow>> by_repo;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        std::size_t line = r + 1;
        if (row.size() != header.size())
            throw schema_error("ck: ragged row at line " + std::to_string(line));
        ClassRow cr;
        cr.repo_id = row[cols.at("repo_id")];
        if (cr.repo_id.empty()) throw schema_error("ck: empty repo_id at line " + std::to_string(line));
        if (cols.count("class_name")) cr.class_name = row[cols.at("class_name")];
        for (const auto& name : detail::class_metric_names()) {
            auto it = cols.find(name);
            if (it == cols.end()) continue;
            const auto& v = row[it->second];
            if (v.empty()) continue;
            double value = csv::parse_double(v, name + " at line " + std::to_string(line));
            bool cohesion_ratio = (name == "tcc" || name == "lcc");
            if (value < 0.0) {
                if (cohesion_ratio) continue;  // CK's undefined marker
                throw schema_error("ck: negative counter " + name + " at line " + std::to_string(line));
            }
            cr.values[name] = value;
        }
        if (!by_repo.count(cr.repo_id)) repo_order.push_back(cr.repo_id);
        by_repo[cr.repo_id].push_back(std::move(cr));
    }

    std::vector<RepoRecord> records;
    for (const auto& repo : repo_order) {
        RepoRecord rec;
        rec.repo_id = repo;
        rec.language = Language::Java;  // class metrics are scanned for Java only
        rec.raw = aggregate_class_rows(by_repo.at(repo));
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace metriq
