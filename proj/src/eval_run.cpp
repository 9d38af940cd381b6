#include "omrkit/eval_run.hpp"

#include "omrkit/abc.hpp"
#include "omrkit/convert.hpp"
#include "omrkit/error.hpp"
#include "omrkit/tedn.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace omrkit::run {

namespace fs = std::filesystem;

namespace {

std::string lower_ext(const fs::path& p) {
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return e;
}

std::map<std::string, std::string> stems_of(const std::string& root) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file())
            continue;
        std::string stem = entry.path().stem().string();
        auto [it, fresh] = out.emplace(stem, entry.path().string());
        if (!fresh)
            throw std::invalid_argument("duplicate stem '" + stem + "' in " + root + " (" +
                                        it->second + " vs " + entry.path().string() + ")");
    }
    return out;
}

// Runs fn(i) over [0, n) on a small pool; results land at their own index so
// output order never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, Fn fn) {
    std::size_t workers = worker_count(n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                    fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool)
        t.join();
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

nlohmann::json base_summary(const char* metric, const std::vector<double>& values,
                            std::size_t failures, const Pairing& pairing) {
    nlohmann::json s;
    s["metric"] = metric;
    s["count"] = values.size();
    s["failures"] = failures;
    if (values.empty()) {
        s["mean"] = nullptr;
        s["median"] = nullptr;
    } else {
        double sum = 0.0;
        for (double v : values)
            sum += v;
        s["mean"] = sum / static_cast<double>(values.size());
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        std::size_t mid = sorted.size() / 2;
        s["median"] = sorted.size() % 2 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2.0;
    }
    if (!pairing.unmatched_pred.empty())
        s["unmatched_pred"] = pairing.unmatched_pred;
    return s;
}

} // namespace

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

mxl::LabeledTree tree_from_file(const std::string& path) {
    std::string bytes = read_file(path);
    if (lower_ext(path) == ".abc")
        return convert::convert(abc::parse_abc(bytes));
    return mxl::parse_musicxml(bytes);
}

std::size_t worker_count(std::size_t items) {
    std::size_t cap = std::thread::hardware_concurrency();
    if (cap == 0)
        cap = 1;
    if (const char* env = std::getenv("OMRKIT_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1)
            cap = static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, std::min(cap, items));
}

Pairing pair_corpus(const std::string& pred, const std::string& gold) {
    if (!fs::exists(pred))
        throw Error(ErrorCode::IoError, "prediction path does not exist: " + pred);
    if (!fs::exists(gold))
        throw Error(ErrorCode::IoError, "gold path does not exist: " + gold);

    Pairing out;
    const bool pred_file = fs::is_regular_file(pred);
    const bool gold_file = fs::is_regular_file(gold);
    if (pred_file && gold_file) {
        out.pairs.push_back({fs::path(gold).stem().string(), pred, gold});
        return out;
    }

    std::map<std::string, std::string> preds =
        pred_file ? std::map<std::string, std::string>{{fs::path(pred).stem().string(), pred}}
                  : stems_of(pred);
    std::map<std::string, std::string> golds =
        gold_file ? std::map<std::string, std::string>{{fs::path(gold).stem().string(), gold}}
                  : stems_of(gold);

    for (const auto& [stem, gold_path] : golds) {
        CorpusPair pair{stem, "", gold_path};
        auto it = preds.find(stem);
        if (it != preds.end()) {
            pair.pred_path = it->second;
            preds.erase(it);
        }
        out.pairs.push_back(std::move(pair));
    }
    for (const auto& [stem, path] : preds)
        out.unmatched_pred.push_back(stem);
    return out;
}

EvalOutput eval_tedn(const Pairing& pairing, const TednOptions& options) {
    const auto& pairs = pairing.pairs;
    std::vector<nlohmann::json> rows(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t i) {
        const CorpusPair& p = pairs[i];
        mxl::LabeledTree gold = tree_from_file(p.gold_path);
        tedn::TednResult r;
        bool failed = p.pred_path.empty();
        if (!failed) {
            try {
                mxl::LabeledTree pred = tree_from_file(p.pred_path);
                r = tedn::tedn(pred, gold, options.max_nodes);
            } catch (const std::exception&) {
                failed = true;
            }
        }
        if (failed)
            r = tedn::tedn_failed_prediction(gold, options.max_nodes);
        rows[i] = {{"id", p.id},
                   {"tedn", r.value},
                   {"pred_nodes", r.pred_nodes},
                   {"gold_nodes", r.gold_nodes},
                   {"truncated", r.truncated},
                   {"convert_failed", failed}};
    });

    std::vector<double> values;
    std::size_t failures = 0;
    for (const auto& row : rows) {
        values.push_back(row["tedn"].get<double>());
        failures += row["convert_failed"].get<bool>() ? 1 : 0;
    }
    EvalOutput out{std::move(rows), base_summary("tedn", values, failures, pairing)};
    out.summary["max_nodes"] = options.max_nodes;
    return out;
}

EvalOutput eval_er(const Pairing& pairing, metrics::ErrorLevel level) {
    const auto& pairs = pairing.pairs;
    std::vector<nlohmann::json> rows(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t i) {
        const CorpusPair& p = pairs[i];
        std::string gold = read_file(p.gold_path);
        nlohmann::json row{{"id", p.id}};
        try {
            std::string pred = p.pred_path.empty() ? std::string() : read_file(p.pred_path);
            row["er"] = metrics::error_rate(pred, gold, level);
        } catch (const Error& e) {
            row["error"] = e.what();
        }
        rows[i] = std::move(row);
    });

    std::vector<double> values;
    std::size_t failures = 0;
    for (const auto& row : rows) {
        if (row.contains("er"))
            values.push_back(row["er"].get<double>());
        else
            ++failures;
    }
    EvalOutput out{std::move(rows), base_summary("er", values, failures, pairing)};
    const char* names[] = {"char", "symbol", "line"};
    out.summary["level"] = names[static_cast<int>(level)];
    return out;
}

EvalOutput eval_omrned(const Pairing& pairing, const metrics::CostTable& costs) {
    const auto& pairs = pairing.pairs;
    std::vector<nlohmann::json> rows(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t i) {
        const CorpusPair& p = pairs[i];
        mxl::LabeledTree gold_tree = tree_from_file(p.gold_path);
        nlohmann::json row{{"id", p.id}};
        try {
            std::vector<metrics::MeasureSymbols> gold = metrics::extract_measures(gold_tree);
            std::vector<metrics::MeasureSymbols> pred;
            bool failed = p.pred_path.empty();
            if (!failed) {
                try {
                    pred = metrics::extract_measures(tree_from_file(p.pred_path));
                } catch (const std::exception&) {
                    failed = true;
                    pred.clear();
                }
            }
            row["omr_ned"] = metrics::omr_ned(pred, gold, costs);
            row["pred_measures"] = pred.size();
            row["gold_measures"] = gold.size();
            row["convert_failed"] = failed;
        } catch (const Error& e) {
            row["error"] = e.what();
        }
        rows[i] = std::move(row);
    });

    std::vector<double> values;
    std::size_t failures = 0;
    for (const auto& row : rows) {
        if (row.contains("omr_ned"))
            values.push_back(row["omr_ned"].get<double>());
        if (!row.contains("omr_ned") || row.value("convert_failed", false))
            ++failures;
    }
    EvalOutput out{std::move(rows), base_summary("omr_ned", values, failures, pairing)};
    out.summary["costs_version"] = costs.version;
    return out;
}

std::string to_jsonl(const std::vector<nlohmann::json>& rows) {
    std::string out;
    for (const auto& row : rows) {
        out += row.dump();
        out += '\n';
    }
    return out;
}

nlohmann::json summarize_report(const std::string& jsonl_text) {
    std::vector<nlohmann::json> rows;
    std::istringstream in(jsonl_text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        rows.push_back(nlohmann::json::parse(line));
    }
    const char* metric = nullptr;
    for (const char* candidate : {"tedn", "er", "omr_ned"})
        if (!rows.empty() && rows.front().contains(candidate))
            metric = candidate;
    if (!metric)
        throw std::invalid_argument("report rows carry no known metric column");

    std::vector<double> values;
    std::size_t failures = 0;
    for (const auto& row : rows) {
        if (row.contains(metric) && row[metric].is_number())
            values.push_back(row[metric].get<double>());
        if (!row.contains(metric) || row.value("convert_failed", false) ||
            row.contains("error"))
            ++failures;
    }
    return base_summary(metric, values, failures, Pairing{});
}

std::string summary_table(const nlohmann::json& summary) {
    std::ostringstream out;
    auto line = [&](const char* key, const nlohmann::json& v) {
        out << key;
        for (std::size_t n = std::string(key).size(); n < 14; ++n)
            out << ' ';
        out << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
    };
    for (const char* key : {"metric", "level", "count", "failures", "mean", "median",
                            "max_nodes", "costs_version"})
        if (summary.contains(key))
            line(key, summary[key]);
    if (summary.contains("unmatched_pred"))
        line("unmatched_pred", summary["unmatched_pred"]);
    return std::move(out).str();
}

} // namespace omrkit::run
