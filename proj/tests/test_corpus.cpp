#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "metriq/adapters.hpp"
#include "metriq/corpus.hpp"
#include "testutil.hpp"

using namespace metriq;
using testutil::TempDir;
using testutil::write_text;

namespace {

const char* kCanonicalHeader =
    "repo_id,language,stars,name_text,ncloc,loc,comment_lines,files,statements,"
    "cyclomatic_complexity,cognitive_complexity,code_smells,violations,critical_violations,"
    "info_violations,lines_to_cover,duplicated_blocks,duplicated_files,duplicated_lines,"
    "cbo,fan_in,fan_out,dit,noc,lcom,tcc,lcc";

std::string header_line() { return std::string(kCanonicalHeader) + "\n"; }

}  // namespace

TEST_CASE("registry matches the published metric taxonomy") {
    const auto& defs = registry();
    REQUIRE(defs.size() == 20);

    std::size_t maint = 0, rel = 0, func = 0, agauss = 0, exp_count = 0, java_only = 0;
    for (const auto& def : defs) {
        if (def.dimension == Dimension::Maintainability) ++maint;
        if (def.dimension == Dimension::Reliability) ++rel;
        if (def.dimension == Dimension::Functionality) ++func;
        if (def.family == Family::AsymGauss) ++agauss;
        if (def.family == Family::Exponential) ++exp_count;
        if (def.languages == std::set<Language>{Language::Java}) ++java_only;
    }
    CHECK(maint == 12);
    CHECK(rel == 3);
    CHECK(func == 5);
    CHECK(agauss == 8);
    CHECK(exp_count == 12);
    CHECK(java_only == 8);  // the coupling/cohesion metrics

    for (const char* name : {"cbo", "fan_in", "fan_out", "dit", "noc", "lcom", "tcc", "lcc"}) {
        const MetricDef* def = find_metric(name);
        REQUIRE(def != nullptr);
        CHECK(def->languages == std::set<Language>{Language::Java});
        CHECK(def->normalizer == Normalizer::CLASS_MEAN);
    }
    CHECK(find_metric("file_complexity")->source == "cyclomatic_complexity");
    CHECK(find_metric("file_complexity")->normalizer == Normalizer::FILES);
    CHECK(find_metric("comment_lines")->normalizer == Normalizer::NCLOC_PLUS_COMMENTS);
    CHECK(find_metric("nonexistent") == nullptr);
}

TEST_CASE("ingest_canonical reads rows and validates them") {
    TempDir dir;

    SECTION("direct field mapping") {
        auto path = dir.file("one.csv");
        write_text(path, header_line() +
                             "acme/widget,java,500,widget engine,10000,12000,2000,120,8000,"
                             "3000,2500,500,700,30,100,0,10,5,200,7.5,1.1,5.2,2.1,0.5,40,0.2,0.3\n");
        auto records = ingest_canonical(path);
        REQUIRE(records.size() == 1);
        const auto& rec = records.front();
        CHECK(rec.repo_id == "acme/widget");
        CHECK(rec.language == Language::Java);
        CHECK(rec.stars == 500);
        CHECK(rec.denominators.ncloc == 10000.0);
        CHECK(rec.raw.at("code_smells") == 500.0);
        CHECK(rec.raw.at("comment_lines") == 2000.0);
        CHECK(rec.raw.at("cbo") == 7.5);
    }

    SECTION("empty data section gives an empty list") {
        auto path = dir.file("empty.csv");
        write_text(path, header_line());
        CHECK(ingest_canonical(path).empty());
    }

    SECTION("negative counter cites the line") {
        auto path = dir.file("neg.csv");
        write_text(path, header_line() +
                             "a,java,1,x,-5,1,1,1,1,,,,,,,,,,,,,,,,,,\n");
        try {
            ingest_canonical(path);
            FAIL("expected schema_error");
        } catch (const schema_error& e) {
            std::string msg = e.what();
            CHECK(msg.find("ncloc") != std::string::npos);
            CHECK(msg.find("line 2") != std::string::npos);
        }
    }

    SECTION("missing required column is named") {
        auto path = dir.file("missing.csv");
        write_text(path, "repo_id,language,stars\n");
        try {
            ingest_canonical(path);
            FAIL("expected schema_error");
        } catch (const schema_error& e) {
            CHECK(std::string(e.what()).find("name_text") != std::string::npos);
        }
    }

    SECTION("unknown columns are ignored with a warning") {
        auto path = dir.file("extra.csv");
        write_text(path, std::string(kCanonicalHeader) + ",mystery\n" +
                             "a,python,1,x,100,120,10,5,60,,,,,,,,,,,,,,,,,,,42\n");
        std::vector<std::string> warnings;
        auto records = ingest_canonical(path, &warnings);
        CHECK(records.size() == 1);
        REQUIRE(warnings.size() == 1);
        CHECK(warnings.front().find("mystery") != std::string::npos);
    }

    SECTION("duplicate repo_id is rejected") {
        auto path = dir.file("dup.csv");
        write_text(path, header_line() +
                             "a,java,1,x,1,1,1,1,1,,,,,,,,,,,,,,,,,,\n"
                             "a,java,2,y,1,1,1,1,1,,,,,,,,,,,,,,,,,,\n");
        CHECK_THROWS_AS(ingest_canonical(path), schema_error);
    }

    SECTION("class-metric columns may be omitted entirely") {
        auto path = dir.file("short.csv");
        write_text(path,
                   "repo_id,language,stars,name_text,ncloc,loc,comment_lines,files,statements,"
                   "cyclomatic_complexity,cognitive_complexity,code_smells,violations,"
                   "critical_violations,info_violations,lines_to_cover,duplicated_blocks,"
                   "duplicated_files,duplicated_lines\n"
                   "a,python,9,x,100,120,10,5,60,30,25,5,7,1,2,0,1,1,12\n");
        auto records = ingest_canonical(path);
        REQUIRE(records.size() == 1);
        CHECK(records.front().raw.count("cbo") == 0);
        CHECK(records.front().raw.at("cyclomatic_complexity") == 30.0);
    }
}

TEST_CASE("canonical write/ingest round-trips bit-exactly") {
    TempDir dir;
    RepoRecord a;
    a.repo_id = "org/alpha";
    a.language = Language::Java;
    a.stars = 1234;
    a.name_text = "says \"hi\", a, b\nand a newline";
    a.denominators = {10000, 12000, 1500, 80, 6000};
    a.raw = {{"comment_lines", 1500.0}, {"cyclomatic_complexity", 0.3141592653589793},
             {"code_smells", 512.0},    {"cbo", 7.0551234567891234},
             {"violations", 700.0},     {"duplicated_lines", 123.456}};
    RepoRecord b;
    b.repo_id = "org/beta";
    b.language = Language::Python;
    b.stars = 0;
    b.name_text = "";
    b.denominators = {1, 1, 0, 1, 1};
    b.raw = {{"code_smells", 1e-9}, {"info_violations", 9.999999999999999e22}};

    auto p1 = dir.file("c1.csv");
    auto p2 = dir.file("c2.csv");
    write_canonical({a, b}, p1);
    auto round1 = ingest_canonical(p1);
    REQUIRE(round1.size() == 2);
    CHECK(round1[0] == a);
    CHECK(round1[1] == b);
    write_canonical(round1, p2);
    CHECK(testutil::read_text(p1) == testutil::read_text(p2));
}

TEST_CASE("normalize applies the per-metric size rules") {
    RepoRecord rec;
    rec.repo_id = "r";
    rec.language = Language::Java;
    rec.denominators = {10000, 12000, 0, 60, 6000};
    rec.raw["code_smells"] = 500;

    SECTION("ncloc rule") {
        auto v = normalize(rec, registry());
        CHECK(v.values.at("code_smells") == Catch::Approx(0.05).margin(1e-15));
    }

    SECTION("comment share rule") {
        RepoRecord r2;
        r2.repo_id = "r2";
        r2.language = Language::Python;
        r2.denominators = {800, 1000, 200, 10, 500};
        r2.raw["comment_lines"] = 200;
        auto v = normalize(r2, registry());
        CHECK(v.values.at("comment_lines") == Catch::Approx(0.2).margin(1e-15));
    }

    SECTION("file complexity is the cyclomatic total averaged over files") {
        rec.raw["cyclomatic_complexity"] = 300;
        auto v = normalize(rec, registry());
        CHECK(v.values.at("file_complexity") == Catch::Approx(5.0).margin(1e-15));
        CHECK(v.values.at("cyclomatic_complexity") == Catch::Approx(0.03).margin(1e-15));
    }

    SECTION("class means pass through") {
        rec.raw["cbo"] = 7.5;
        auto v = normalize(rec, registry());
        CHECK(v.values.at("cbo") == 7.5);
    }

    SECTION("zero denominator under a present metric names both") {
        rec.denominators.ncloc = 0;
        try {
            normalize(rec, registry());
            FAIL("expected schema_error");
        } catch (const schema_error& e) {
            std::string msg = e.what();
            CHECK(msg.find("code_smells") != std::string::npos);
            CHECK(msg.find("ncloc") != std::string::npos);
        }
    }

    SECTION("metrics unavailable for the language are masked") {
        RepoRecord py;
        py.repo_id = "py";
        py.language = Language::Python;
        py.denominators = {100, 100, 0, 1, 1};
        py.raw["code_smells"] = 5;
        py.raw["cbo"] = 3;  // class metrics do not exist for python
        auto v = normalize(py, registry());
        CHECK(v.values.count("code_smells") == 1);
        CHECK(v.values.count("cbo") == 0);
        CHECK(v.values.count("violations") == 0);  // missing raw stays masked
    }

    SECTION("scale consistency: doubling counter and denominator changes nothing") {
        rec.raw["cyclomatic_complexity"] = 300;
        auto v1 = normalize(rec, registry());
        RepoRecord doubled = rec;
        for (auto& [k, val] : doubled.raw) val *= 2.0;
        doubled.denominators.ncloc *= 2.0;
        doubled.denominators.loc *= 2.0;
        doubled.denominators.files *= 2.0;
        doubled.denominators.statements *= 2.0;
        auto v2 = normalize(doubled, registry());
        for (const auto& [name, value] : v1.values) {
            if (find_metric(name)->normalizer == Normalizer::CLASS_MEAN) continue;
            CHECK(v2.values.at(name) == value);
        }
    }
}

TEST_CASE("filter_non_engineering partitions by pattern match") {
    auto make = [](std::string id, std::string text) {
        RepoRecord r;
        r.repo_id = std::move(id);
        r.name_text = std::move(text);
        return r;
    };
    std::vector<RepoRecord> records = {
        make("g", "JavaGuide: a guide for Java interviews"),
        make("s", "spring-framework"),
        make("a", "Awesome-Lists of everything"),
        make("k", "kafka message broker"),
    };

    auto [kept, dropped] = filter_non_engineering(records, default_filter_patterns());
    REQUIRE(kept.size() == 2);
    REQUIRE(dropped.size() == 2);
    CHECK(kept[0].repo_id == "s");
    CHECK(kept[1].repo_id == "k");
    CHECK(dropped[0].repo_id == "g");
    CHECK(dropped[1].repo_id == "a");

    SECTION("partition is exhaustive, disjoint, and deterministic") {
        auto [kept2, dropped2] = filter_non_engineering(records, default_filter_patterns());
        CHECK(kept2.size() == kept.size());
        CHECK(dropped2.size() == dropped.size());
        CHECK(kept.size() + dropped.size() == records.size());
    }

    SECTION("empty input") {
        auto [k, d] = filter_non_engineering({}, default_filter_patterns());
        CHECK(k.empty());
        CHECK(d.empty());
    }

    SECTION("empty pattern list is rejected") {
        CHECK_THROWS_AS(filter_non_engineering(records, {}), config_error);
    }
}

TEST_CASE("aggregate_class_rows averages per metric and skips undefined cohesion") {
    ClassRow c1{"r", "A", {{"cbo", 4.0}, {"dit", 3.0}, {"tcc", 0.5}}};
    ClassRow c2{"r", "B", {{"cbo", 10.0}, {"dit", 3.0}}};  // tcc undefined here

    auto means = aggregate_class_rows({c1, c2});
    CHECK(means.at("cbo") == 7.0);
    CHECK(means.at("dit") == 3.0);
    CHECK(means.at("tcc") == 0.5);

    CHECK(aggregate_class_rows({c1}).at("dit") == 3.0);
    CHECK_THROWS_AS(aggregate_class_rows({}), schema_error);
    ClassRow other{"q", "C", {{"cbo", 1.0}}};
    CHECK_THROWS_AS(aggregate_class_rows({c1, other}), schema_error);
}

TEST_CASE("sonarqube adapter renames scanner columns") {
    TempDir dir;
    auto path = dir.file("sonar.csv");
    write_text(path,
               "project,language,stars,name,ncloc,lines,comment_lines,files,statements,"
               "complexity,code_smells,sqale_index\n"
               "acme/widget,java,42,widget,1000,1200,100,10,600,300,25,7\n");
    std::vector<std::string> warnings;
    auto records = ingest_sonarqube(path, default_column_map(), &warnings);
    REQUIRE(records.size() == 1);
    CHECK(records[0].repo_id == "acme/widget");
    CHECK(records[0].raw.at("cyclomatic_complexity") == 300.0);
    CHECK(records[0].denominators.loc == 1200.0);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("sqale_index") != std::string::npos);
}

TEST_CASE("ck adapter groups classes per repo and averages") {
    TempDir dir;
    auto path = dir.file("ck.csv");
    write_text(path,
               "project,class,cbo,fanin,fanout,dit,noc,lcom,tcc,lcc\n"
               "r1,A,4,1,2,3,0,10,0.5,0.6\n"
               "r1,B,10,3,4,3,1,20,-1,-1\n"
               "r2,C,6,2,2,2,0,5,0.25,0.5\n");
    auto records = ingest_ck(path, default_column_map());
    REQUIRE(records.size() == 2);
    CHECK(records[0].repo_id == "r1");
    CHECK(records[0].language == Language::Java);
    CHECK(records[0].raw.at("cbo") == 7.0);
    CHECK(records[0].raw.at("tcc") == 0.5);  // the -1 row is undefined, excluded
    CHECK(records[1].raw.at("lcc") == 0.5);

    SECTION("ck output survives the canonical round trip") {
        auto out = dir.file("ck_canonical.csv");
        write_canonical(records, out);
        auto round = ingest_canonical(out);
        REQUIRE(round.size() == 2);
        CHECK(round[0].raw.at("cbo") == 7.0);
    }
}

TEST_CASE("bundled column map file mirrors the built-in defaults") {
    auto loaded = load_column_map(testutil::fixture("adapter_columns.json"));
    auto defaults = default_column_map();
    CHECK(loaded.sonarqube == defaults.sonarqube);
    CHECK(loaded.ck == defaults.ck);
}
