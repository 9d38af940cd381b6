#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "omrkit/error.hpp"
#include "omrkit/eval_run.hpp"
#include "omrkit/seq_metrics.hpp"

using namespace omrkit;
namespace fs = std::filesystem;

namespace {

// Scratch corpus directory torn down with the fixture.
struct TempTree {
    fs::path root;
    TempTree() {
        root = fs::temp_directory_path() /
               ("omrkit_eval_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(root);
    }
    ~TempTree() { fs::remove_all(root); }
    static int& counter() {
        static int n = 0;
        return n;
    }
    fs::path file(const std::string& rel, const std::string& content) {
        fs::path p = root / rel;
        fs::create_directories(p.parent_path());
        std::ofstream(p, std::ios::binary) << content;
        return p;
    }
};

std::string tune(int x, const std::string& body) {
    return "X:" + std::to_string(x) + "\nM:4/4\nL:1/8\nK:C\n" + body + "\n";
}

} // namespace

TEST_CASE("pairing matches stems and reports strays") {
    TempTree t;
    t.file("pred/a.abc", tune(1, "C8|]"));
    t.file("pred/b.abc", tune(2, "D8|]"));
    t.file("pred/stray.abc", tune(3, "E8|]"));
    t.file("gold/a.musicxml", "x");
    t.file("gold/b.musicxml", "x");
    t.file("gold/lonely.musicxml", "x");

    run::Pairing p = run::pair_corpus((t.root / "pred").string(), (t.root / "gold").string());
    REQUIRE(p.pairs.size() == 3);
    CHECK(p.pairs[0].id == "a");
    CHECK(!p.pairs[0].pred_path.empty());
    CHECK(p.pairs[1].id == "b");
    CHECK(p.pairs[2].id == "lonely");
    CHECK(p.pairs[2].pred_path.empty());
    REQUIRE(p.unmatched_pred.size() == 1);
    CHECK(p.unmatched_pred[0] == "stray");
}

TEST_CASE("two single files pair regardless of stem") {
    TempTree t;
    fs::path a = t.file("x.abc", tune(1, "C8|]"));
    fs::path b = t.file("y.abc", tune(1, "C8|]"));
    run::Pairing p = run::pair_corpus(a.string(), b.string());
    REQUIRE(p.pairs.size() == 1);
    CHECK(p.pairs[0].id == "y");
    CHECK(p.pairs[0].pred_path == a.string());
}

TEST_CASE("pairing rejects duplicate stems and missing paths") {
    TempTree t;
    t.file("pred/a.abc", "x");
    t.file("pred/sub/a.abc", "x");
    t.file("gold/a.abc", "x");
    CHECK_THROWS_AS(
        (void)run::pair_corpus((t.root / "pred").string(), (t.root / "gold").string()),
        std::invalid_argument);
    CHECK_THROWS_AS((void)run::pair_corpus((t.root / "nope").string(), (t.root / "gold").string()),
                    Error);
}

TEST_CASE("identical corpora score zero tedn everywhere") {
    TempTree t;
    for (int i = 1; i <= 4; ++i) {
        std::string body = tune(i, "CDEF GABc|c8|]");
        t.file("pred/t" + std::to_string(i) + ".abc", body);
        t.file("gold/t" + std::to_string(i) + ".abc", body);
    }
    run::Pairing p = run::pair_corpus((t.root / "pred").string(), (t.root / "gold").string());
    run::EvalOutput out = run::eval_tedn(p);
    REQUIRE(out.rows.size() == 4);
    for (const auto& row : out.rows) {
        CHECK(row["tedn"].get<double>() == 0.0);
        CHECK(row["convert_failed"].get<bool>() == false);
        CHECK(row["pred_nodes"] == row["gold_nodes"]);
    }
    CHECK(out.summary["mean"].get<double>() == 0.0);
    CHECK(out.summary["median"].get<double>() == 0.0);
    CHECK(out.summary["count"] == 4);
    CHECK(out.summary["failures"] == 0);
    CHECK(out.summary["metric"] == "tedn");
}

TEST_CASE("unconvertible and missing predictions score one and flag the row") {
    TempTree t;
    t.file("pred/bad.abc", "X:1\nM:waltz\nK:C\nC8|]\n");
    t.file("gold/bad.abc", tune(1, "C8|]"));
    t.file("gold/absent.abc", tune(2, "D8|]"));
    run::Pairing p = run::pair_corpus((t.root / "pred").string(), (t.root / "gold").string());
    run::EvalOutput out = run::eval_tedn(p);
    REQUIRE(out.rows.size() == 2);
    for (const auto& row : out.rows) {
        CHECK(row["tedn"].get<double>() == 1.0);
        CHECK(row["convert_failed"].get<bool>() == true);
        CHECK(row["pred_nodes"] == 0);
        CHECK(row["gold_nodes"].get<std::size_t>() > 0);
    }
    CHECK(out.summary["failures"] == 2);
    CHECK(out.summary["mean"].get<double>() == 1.0);
}

TEST_CASE("a broken gold file is a hard error") {
    TempTree t;
    t.file("pred/a.abc", tune(1, "C8|]"));
    t.file("gold/a.musicxml", "this is not xml <<<");
    run::Pairing p = run::pair_corpus((t.root / "pred").string(), (t.root / "gold").string());
    CHECK_THROWS_AS((void)run::eval_tedn(p), Error);
}

TEST_CASE("error-rate eval reads raw text and flags empty golds") {
    TempTree t;
    t.file("pred/a.txt", "kitten");
    t.file("gold/a.txt", "sitting");
    t.file("pred/b.txt", "same");
    t.file("gold/b.txt", "same");
    t.file("pred/c.txt", "text");
    t.file("gold/c.txt", "");
    run::Pairing p = run::pair_corpus((t.root / "pred").string(), (t.root / "gold").string());
    run::EvalOutput out = run::eval_er(p, metrics::ErrorLevel::character);
    REQUIRE(out.rows.size() == 3);
    CHECK(out.rows[0]["er"].get<double>() == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
    CHECK(out.rows[1]["er"].get<double>() == 0.0);
    CHECK(!out.rows[2].contains("er"));
    CHECK(out.rows[2].contains("error"));
    CHECK(out.summary["count"] == 2);
    CHECK(out.summary["failures"] == 1);
    CHECK(out.summary["level"] == "char");
}

TEST_CASE("omrned eval converts both sides and reports the cost version") {
    TempTree t;
    t.file("pred/a.abc", tune(1, "C4D4|E8|]"));
    t.file("gold/a.abc", tune(1, "C4D4|E8|]"));
    t.file("pred/b.abc", tune(2, "C4D4|F8|]"));
    t.file("gold/b.abc", tune(2, "C4D4|E8|]"));
    run::Pairing p = run::pair_corpus((t.root / "pred").string(), (t.root / "gold").string());
    run::EvalOutput out = run::eval_omrned(p);
    REQUIRE(out.rows.size() == 2);
    CHECK(out.rows[0]["omr_ned"].get<double>() == 0.0);
    CHECK(out.rows[1]["omr_ned"].get<double>() > 0.0);
    CHECK(out.rows[1]["omr_ned"].get<double>() < 1.0);
    CHECK(out.rows[0]["gold_measures"] == 2);
    CHECK(out.summary["costs_version"] == "omrkit-costs-v1");
    CHECK(out.summary["failures"] == 0);
}

TEST_CASE("reports are byte-identical across reruns and thread counts") {
    TempTree t;
    for (int i = 1; i <= 6; ++i) {
        t.file("pred/t" + std::to_string(i) + ".abc",
               tune(i, i % 2 ? "CDEF GABc|c8|]" : "C4D4|E8|]"));
        t.file("gold/t" + std::to_string(i) + ".abc", tune(i, "CDEF GABc|c8|]"));
    }
    run::Pairing p = run::pair_corpus((t.root / "pred").string(), (t.root / "gold").string());

    setenv("OMRKIT_THREADS", "1", 1);
    std::string once = run::to_jsonl(run::eval_tedn(p).rows);
    setenv("OMRKIT_THREADS", "4", 1);
    std::string again = run::to_jsonl(run::eval_tedn(p).rows);
    unsetenv("OMRKIT_THREADS");
    std::string third = run::to_jsonl(run::eval_tedn(p).rows);
    CHECK(once == again);
    CHECK(once == third);
}

TEST_CASE("summarize recomputes aggregates from JSONL text") {
    // Hand-checked: values 0.1, 0.3, 0.2 -> mean 0.2, median 0.2; one failed
    // row (convert_failed) and one error row -> 2 failures, count stays 3.
    std::string jsonl =
        R"({"id":"a","tedn":0.1,"convert_failed":false})" "\n"
        R"({"id":"b","tedn":0.3,"convert_failed":false})" "\n"
        R"({"id":"c","tedn":0.2,"convert_failed":true})" "\n"
        R"({"id":"d","error":"boom"})" "\n";
    nlohmann::json s = run::summarize_report(jsonl);
    CHECK(s["metric"] == "tedn");
    CHECK(s["count"] == 3);
    CHECK(s["failures"] == 2);
    CHECK(s["mean"].get<double>() == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(s["median"].get<double>() == doctest::Approx(0.2).epsilon(1e-12));

    CHECK_THROWS_AS((void)run::summarize_report(R"({"id":"x"})"), std::invalid_argument);
}

TEST_CASE("summary table lines up keys and values") {
    nlohmann::json s{{"metric", "er"}, {"level", "line"}, {"count", 2},
                     {"failures", 0},  {"mean", 0.5},     {"median", 0.5}};
    std::string table = run::summary_table(s);
    CHECK(table.find("metric        er\n") != std::string::npos);
    CHECK(table.find("level         line\n") != std::string::npos);
    CHECK(table.find("count         2\n") != std::string::npos);
    CHECK(table.find("mean          0.5\n") != std::string::npos);
}

TEST_CASE("empty gold set summarizes with null aggregates") {
    TempTree t;
    fs::create_directories(t.root / "pred");
    fs::create_directories(t.root / "gold");
    t.file("pred/only.abc", tune(1, "C8|]"));
    run::Pairing p = run::pair_corpus((t.root / "pred").string(), (t.root / "gold").string());
    CHECK(p.pairs.empty());
    run::EvalOutput out = run::eval_tedn(p);
    CHECK(out.rows.empty());
    CHECK(out.summary["count"] == 0);
    CHECK(out.summary["mean"].is_null());
    CHECK(out.summary["unmatched_pred"].size() == 1);
}
