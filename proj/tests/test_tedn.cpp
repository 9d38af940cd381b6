#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>
#include <string>
#include <vector>

#include "omrkit/abc.hpp"
#include "omrkit/convert.hpp"
#include "omrkit/error.hpp"
#include "omrkit/mxl.hpp"
#include "omrkit/tedn.hpp"

using namespace omrkit;
using mxl::LabeledTree;

namespace {

// ---- brute-force oracle: memoized recursive forest edit distance ----
// Operates on the rightmost roots of ordered forests, unit costs.

using Forest = std::vector<const LabeledTree*>;

std::string ser(const LabeledTree& t) {
    std::string s = t.label + "(";
    for (const auto& c : t.children)
        s += ser(c);
    return s + ")";
}

std::string key_of(const Forest& f, const Forest& g) {
    std::string k;
    for (const auto* t : f)
        k += ser(*t);
    k += "|";
    for (const auto* t : g)
        k += ser(*t);
    return k;
}

std::size_t forest_size(const Forest& f) {
    std::size_t n = 0;
    for (const auto* t : f)
        n += mxl::node_count(*t);
    return n;
}

double forest_ed(const Forest& f, const Forest& g,
                 std::map<std::string, double>& memo) {
    if (f.empty())
        return double(forest_size(g));
    if (g.empty())
        return double(forest_size(f));
    std::string key = key_of(f, g);
    if (auto it = memo.find(key); it != memo.end())
        return it->second;
    const LabeledTree* ft = f.back();
    const LabeledTree* gt = g.back();
    Forest f_rest(f.begin(), f.end() - 1);
    Forest g_rest(g.begin(), g.end() - 1);
    Forest f_del = f_rest;
    for (const auto& c : ft->children)
        f_del.push_back(&c);
    Forest g_ins = g_rest;
    for (const auto& c : gt->children)
        g_ins.push_back(&c);
    double best = forest_ed(f_del, g, memo) + 1.0;
    best = std::min(best, forest_ed(f, g_ins, memo) + 1.0);
    Forest fc, gc;
    for (const auto& c : ft->children)
        fc.push_back(&c);
    for (const auto& c : gt->children)
        gc.push_back(&c);
    double match = forest_ed(f_rest, g_rest, memo) + forest_ed(fc, gc, memo) +
                   (ft->label == gt->label ? 0.0 : 1.0);
    best = std::min(best, match);
    memo[key] = best;
    return best;
}

double oracle_ted(const LabeledTree& a, const LabeledTree& b) {
    std::map<std::string, double> memo;
    return forest_ed({&a}, {&b}, memo);
}

// ---- enumeration of all small labeled trees ----

std::vector<std::vector<LabeledTree>> all_forests(int n);

std::vector<LabeledTree> all_shapes(int n) {
    std::vector<LabeledTree> out;
    for (auto& f : all_forests(n - 1))
        out.push_back(LabeledTree{"", std::move(f), false});
    return out;
}

std::vector<std::vector<LabeledTree>> all_forests(int n) {
    if (n == 0)
        return {{}};
    std::vector<std::vector<LabeledTree>> out;
    for (int k = 1; k <= n; ++k)
        for (const auto& first : all_shapes(k))
            for (const auto& rest : all_forests(n - k)) {
                std::vector<LabeledTree> f{first};
                f.insert(f.end(), rest.begin(), rest.end());
                out.push_back(std::move(f));
            }
    return out;
}

void label_all(const LabeledTree& shape, std::vector<LabeledTree>& out) {
    // Every x/y assignment over the shape's nodes.
    std::vector<LabeledTree> partial{LabeledTree{"x", {}, false},
                                     LabeledTree{"y", {}, false}};
    std::vector<std::vector<LabeledTree>> child_sets{{}};
    for (const auto& c : shape.children) {
        std::vector<LabeledTree> labeled_child;
        label_all(c, labeled_child);
        std::vector<std::vector<LabeledTree>> next;
        for (const auto& prefix : child_sets)
            for (const auto& lc : labeled_child) {
                auto seq = prefix;
                seq.push_back(lc);
                next.push_back(std::move(seq));
            }
        child_sets = std::move(next);
    }
    for (const char* lab : {"x", "y"})
        for (const auto& cs : child_sets)
            out.push_back(LabeledTree{lab, cs, false});
}

std::vector<LabeledTree> all_labeled_trees(int max_nodes) {
    std::vector<LabeledTree> out;
    for (int n = 1; n <= max_nodes; ++n)
        for (const auto& shape : all_shapes(n))
            label_all(shape, out);
    return out;
}

LabeledTree random_tree(std::mt19937& rng, int max_nodes) {
    std::uniform_int_distribution<int> size_pick(1, max_nodes);
    std::uniform_int_distribution<int> label_pick(0, 1);
    int n = size_pick(rng);
    LabeledTree root{label_pick(rng) ? "x" : "y", {}, false};
    for (int i = 1; i < n; ++i) {
        // Walk to a random node, attach a new child.
        LabeledTree* cur = &root;
        while (!cur->children.empty() && label_pick(rng))
            cur = &cur->children[std::uniform_int_distribution<std::size_t>(
                0, cur->children.size() - 1)(rng)];
        cur->children.push_back(LabeledTree{label_pick(rng) ? "x" : "y", {}, false});
    }
    return root;
}

LabeledTree conv(const std::string& src) { return convert::convert(abc::parse_abc(src)); }

} // namespace

TEST_CASE("identity distance is zero") {
    LabeledTree t = conv("X:1\nL:1/8\nM:4/4\nK:C\nCDEF GABc|c4 z4|]");
    CHECK(tedn::tree_edit_distance(t, t) == 0.0);
}

TEST_CASE("single-node relabel costs one") {
    LabeledTree x{"x", {}, false}, y{"y", {}, false};
    CHECK(tedn::tree_edit_distance(x, y) == 1.0);
    CHECK(tedn::tree_edit_distance(x, x) == 0.0);
}

TEST_CASE("exhaustive small-tree pairs match the brute-force oracle") {
    auto trees = all_labeled_trees(4);
    REQUIRE(trees.size() == 102);
    for (const auto& a : trees)
        for (const auto& b : trees) {
            double got = tedn::tree_edit_distance(a, b);
            double want = oracle_ted(a, b);
            if (got != want) {
                CAPTURE(ser(a));
                CAPTURE(ser(b));
                REQUIRE(got == want);
            }
        }
}

TEST_CASE("random pairs up to 8 nodes match the oracle") {
    std::mt19937 rng(41);
    for (int trial = 0; trial < 300; ++trial) {
        LabeledTree a = random_tree(rng, 8);
        LabeledTree b = random_tree(rng, 8);
        double got = tedn::tree_edit_distance(a, b);
        double want = oracle_ted(a, b);
        if (got != want) {
            CAPTURE(ser(a));
            CAPTURE(ser(b));
        }
        REQUIRE(got == want);
    }
}

TEST_CASE("symmetry and triangle inequality") {
    std::mt19937 rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        LabeledTree a = random_tree(rng, 10);
        LabeledTree b = random_tree(rng, 10);
        LabeledTree c = random_tree(rng, 10);
        double ab = tedn::tree_edit_distance(a, b);
        double ba = tedn::tree_edit_distance(b, a);
        CHECK(ab == ba);
        double ac = tedn::tree_edit_distance(a, c);
        double bc = tedn::tree_edit_distance(b, c);
        CHECK(ac <= ab + bc + 1e-9);
    }
}

TEST_CASE("asymmetric costs are respected") {
    LabeledTree leaf{"x", {}, false};
    LabeledTree two{"x", {LabeledTree{"y", {}, false}}, false};
    tedn::EditCosts costs;
    costs.insert_cost = 3.0;
    costs.delete_cost = 5.0;
    CHECK(tedn::tree_edit_distance(leaf, two, costs) == 3.0);
    CHECK(tedn::tree_edit_distance(two, leaf, costs) == 5.0);
}

TEST_CASE("TreeTooLarge fires above the cap") {
    std::mt19937 rng(43);
    LabeledTree big = random_tree(rng, 40);
    while (mxl::node_count(big) <= 20)
        big = random_tree(rng, 40);
    try {
        tedn::tree_edit_distance(big, big, {}, 20);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TreeTooLarge);
    }
}

TEST_CASE("tedn of a tree against itself is exactly zero") {
    LabeledTree g = conv("X:1\nL:1/8\nM:4/4\nK:G\nGABc d2g2|e4 c4|(3def g2 B4|z8|G8|]");
    auto r = tedn::tedn(g, g);
    CHECK(r.value == 0.0);
    CHECK(r.pred_nodes == r.gold_nodes);
    CHECK_FALSE(r.truncated);
}

TEST_CASE("root-only and failed predictions score exactly one") {
    LabeledTree g = conv("X:1\nL:1/8\nM:4/4\nK:C\nCDEF GABc|]");
    LabeledTree root_only{"score-partwise@version=4.0", {}, false};
    CHECK(tedn::tedn(root_only, g).value == 1.0);
    auto r = tedn::tedn_failed_prediction(g);
    CHECK(r.value == 1.0);
    CHECK(r.pred_nodes == 0);
    CHECK(r.gold_nodes == mxl::node_count(mxl::flatten_notes(g)));
}

TEST_CASE("five-measure fixture with one wrong pitch matches the oracle") {
    LabeledTree gold = conv("X:1\nL:1/8\nM:4/4\nK:C\nC2D2 E2F2|G4 A4|B2c2 d4|e8|c4 z4|]");
    LabeledTree pred = conv("X:1\nL:1/8\nM:4/4\nK:C\nC2D2 E2F2|G4 A4|B2c2 d4|f8|c4 z4|]");
    auto r = tedn::tedn(pred, gold);
    LabeledTree gf = mxl::flatten_notes(gold);
    LabeledTree pf = mxl::flatten_notes(pred);
    double want = oracle_ted(pf, gf) / double(mxl::node_count(gf));
    CHECK(r.value == doctest::Approx(want).epsilon(1e-12));
    CHECK(r.value > 0.0);
    CHECK(r.value < 0.2);
}

TEST_CASE("tedn can exceed one and never clamps") {
    LabeledTree gold = conv("X:1\nL:1/8\nK:C\nC4|]");
    LabeledTree pred = conv("X:1\nL:1/16\nM:9/8\nK:F#\nfgab c'2 d'4|(3abc z2 x4|f8|]");
    auto r = tedn::tedn(pred, gold);
    CHECK(r.value > 1.0);
}

TEST_CASE("truncation kicks in below max_nodes and is flagged") {
    LabeledTree gold = conv("X:1\nL:1/8\nM:4/4\nK:C\nCDEF GABc|cBAG FEDC|C2E2 G2c2|]");
    auto full = tedn::tedn(gold, gold);
    auto cut = tedn::tedn(gold, gold, 10);
    CHECK(cut.truncated);
    CHECK(cut.gold_nodes == 9);
    CHECK(cut.pred_nodes == 9);
    CHECK(cut.value == 0.0);
    CHECK(full.gold_nodes > cut.gold_nodes);
}
