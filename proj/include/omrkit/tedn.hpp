#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "omrkit/mxl.hpp"

namespace omrkit::tedn {

struct EditCosts {
    double insert_cost = 1.0;
    double delete_cost = 1.0;
    // Cost of relabeling a -> b when the labels differ; equal labels are
    // always free.
    double relabel_cost = 1.0;
};

// Zhang-Shasha ordered tree edit distance. Throws TreeTooLarge when either
// tree exceeds max_nodes (0 = unlimited).
double tree_edit_distance(const mxl::LabeledTree& a, const mxl::LabeledTree& b,
                          const EditCosts& costs = {}, std::size_t max_nodes = 0);

struct TednResult {
    double value = 0.0;          // ted(pred, gold) / ted(empty, gold)
    std::size_t pred_nodes = 0;  // after flatten + truncate
    std::size_t gold_nodes = 0;
    bool truncated = false;      // either side hit max_nodes
};

inline constexpr std::size_t kDefaultMaxNodes = 6000;

// Normalized tree edit distance on note-flattened trees: both sides are
// flattened, truncated below max_nodes, and scored with unit costs. A
// prediction of one node or fewer scores as the empty tree (value 1.0).
TednResult tedn(const mxl::LabeledTree& pred, const mxl::LabeledTree& gold,
                std::size_t max_nodes = kDefaultMaxNodes);

// Same, for a prediction that failed to parse or convert: scored as empty.
TednResult tedn_failed_prediction(const mxl::LabeledTree& gold,
                                  std::size_t max_nodes = kDefaultMaxNodes);

} // namespace omrkit::tedn
