#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "omrkit/mxl.hpp"
#include "omrkit/seq_metrics.hpp"

namespace omrkit::run {

// One evaluation item. A gold file with no matching prediction keeps an
// empty pred_path and scores as a failed (empty) prediction.
struct CorpusPair {
    std::string id;
    std::string pred_path;
    std::string gold_path;
};

struct Pairing {
    std::vector<CorpusPair> pairs;            // gold-driven, sorted by id
    std::vector<std::string> unmatched_pred;  // prediction stems with no gold
};

// Matches prediction and gold files by filename stem. Either side may be a
// single file (two single files always pair with each other) or a directory
// (regular files, recursive). Throws IoError on missing paths and
// std::invalid_argument on duplicate stems within one side.
Pairing pair_corpus(const std::string& pred, const std::string& gold);

// Reads a document as a MusicXML tree: *.abc parses and converts, anything
// else parses as MusicXML (.mxl containers unwrap transparently).
mxl::LabeledTree tree_from_file(const std::string& path);

std::string read_file(const std::string& path);

// Worker cap: OMRKIT_THREADS when set, hardware concurrency otherwise,
// never more than `items`.
std::size_t worker_count(std::size_t items);

struct EvalOutput {
    std::vector<nlohmann::json> rows; // one JSONL row per gold item, input order
    nlohmann::json summary;
};

struct TednOptions {
    std::size_t max_nodes = 6000;
};

// Pred-side load/convert failures score 1.0 with convert_failed=true; a gold
// file that fails to load is a hard error and throws.
EvalOutput eval_tedn(const Pairing& pairing, const TednOptions& options = {});

EvalOutput eval_er(const Pairing& pairing, metrics::ErrorLevel level);

EvalOutput eval_omrned(const Pairing& pairing, const metrics::CostTable& costs = {});

// Rows joined with '\n', trailing newline included.
std::string to_jsonl(const std::vector<nlohmann::json>& rows);

// Recomputes {metric, count, failures, mean, median} from JSONL text, the
// metric column detected from the first row.
nlohmann::json summarize_report(const std::string& jsonl_text);

// Fixed-width key/value table used by the CLI for every eval summary.
std::string summary_table(const nlohmann::json& summary);

} // namespace omrkit::run
