#include "omrkit/tedn.hpp"

#include <algorithm>
#include <set>
#include <vector>

#include "omrkit/error.hpp"

namespace omrkit::tedn {
namespace {

using mxl::LabeledTree;

// Post-order view with leftmost-leaf indices and keyroots, per Zhang-Shasha.
struct Flat {
    std::vector<const LabeledTree*> post;
    std::vector<int> lml;
    std::vector<int> keyroots;
};

int build(const LabeledTree& t, Flat& f) {
    int leftmost = -1;
    for (std::size_t k = 0; k < t.children.size(); ++k) {
        int ci = build(t.children[k], f);
        if (k == 0)
            leftmost = f.lml[ci];
    }
    int idx = int(f.post.size());
    f.post.push_back(&t);
    f.lml.push_back(leftmost == -1 ? idx : leftmost);
    return idx;
}

Flat flatten(const LabeledTree& t) {
    Flat f;
    build(t, f);
    std::set<int> seen;
    for (int i = int(f.post.size()) - 1; i >= 0; --i)
        if (seen.insert(f.lml[i]).second)
            f.keyroots.push_back(i);
    std::sort(f.keyroots.begin(), f.keyroots.end());
    return f;
}

} // namespace

double tree_edit_distance(const LabeledTree& a, const LabeledTree& b,
                          const EditCosts& costs, std::size_t max_nodes) {
    Flat fa = flatten(a), fb = flatten(b);
    std::size_t na = fa.post.size(), nb = fb.post.size();
    if (max_nodes > 0 && (na > max_nodes || nb > max_nodes))
        throw Error(ErrorCode::TreeTooLarge,
                    "tree edit distance over " + std::to_string(max_nodes) + " nodes");
    const double del = costs.delete_cost, ins = costs.insert_cost;
    auto rel = [&](int i, int j) {
        return fa.post[std::size_t(i)]->label == fb.post[std::size_t(j)]->label
                   ? 0.0
                   : costs.relabel_cost;
    };
    std::vector<std::vector<double>> td(na, std::vector<double>(nb, 0.0));
    std::vector<std::vector<double>> fd(na + 1, std::vector<double>(nb + 1, 0.0));
    for (int i : fa.keyroots)
        for (int j : fb.keyroots) {
            int li = fa.lml[std::size_t(i)], lj = fb.lml[std::size_t(j)];
            int m = i - li + 1, n = j - lj + 1;
            fd[0][0] = 0.0;
            for (int di = 1; di <= m; ++di)
                fd[std::size_t(di)][0] = fd[std::size_t(di) - 1][0] + del;
            for (int dj = 1; dj <= n; ++dj)
                fd[0][std::size_t(dj)] = fd[0][std::size_t(dj) - 1] + ins;
            for (int di = 1; di <= m; ++di)
                for (int dj = 1; dj <= n; ++dj) {
                    int i1 = li + di - 1, j1 = lj + dj - 1;
                    auto& cell = fd[std::size_t(di)][std::size_t(dj)];
                    double best = fd[std::size_t(di) - 1][std::size_t(dj)] + del;
                    best = std::min(best, fd[std::size_t(di)][std::size_t(dj) - 1] + ins);
                    if (fa.lml[std::size_t(i1)] == li && fb.lml[std::size_t(j1)] == lj) {
                        best = std::min(best, fd[std::size_t(di) - 1][std::size_t(dj) - 1] +
                                                  rel(i1, j1));
                        cell = best;
                        td[std::size_t(i1)][std::size_t(j1)] = best;
                    } else {
                        int pi = fa.lml[std::size_t(i1)] - li;
                        int pj = fb.lml[std::size_t(j1)] - lj;
                        best = std::min(best, fd[std::size_t(pi)][std::size_t(pj)] +
                                                  td[std::size_t(i1)][std::size_t(j1)]);
                        cell = best;
                    }
                }
        }
    return td[na - 1][nb - 1];
}

TednResult tedn(const LabeledTree& pred, const LabeledTree& gold, std::size_t max_nodes) {
    std::size_t keep = max_nodes > 0 ? max_nodes - 1 : 0;
    LabeledTree g = mxl::truncate(mxl::flatten_notes(gold), keep);
    LabeledTree p = mxl::truncate(mxl::flatten_notes(pred), keep);
    TednResult r;
    r.gold_nodes = mxl::node_count(g);
    r.pred_nodes = mxl::node_count(p);
    r.truncated = r.gold_nodes < mxl::node_count(mxl::flatten_notes(gold)) ||
                  r.pred_nodes < mxl::node_count(mxl::flatten_notes(pred));
    EditCosts costs;
    double denom = double(r.gold_nodes) * costs.insert_cost;
    if (r.pred_nodes <= 1) {
        // A bare root carries no music; scored as the empty tree.
        r.value = 1.0;
        return r;
    }
    r.value = tree_edit_distance(p, g, costs, 0) / denom;
    return r;
}

TednResult tedn_failed_prediction(const LabeledTree& gold, std::size_t max_nodes) {
    std::size_t keep = max_nodes > 0 ? max_nodes - 1 : 0;
    LabeledTree g = mxl::truncate(mxl::flatten_notes(gold), keep);
    TednResult r;
    r.gold_nodes = mxl::node_count(g);
    r.truncated = r.gold_nodes < mxl::node_count(mxl::flatten_notes(gold));
    r.value = 1.0;
    return r;
}

} // namespace omrkit::tedn
