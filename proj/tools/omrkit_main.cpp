#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "omrkit/abc.hpp"
#include "omrkit/bpe.hpp"
#include "omrkit/canon.hpp"
#include "omrkit/convert.hpp"
#include "omrkit/error.hpp"
#include "omrkit/eval_run.hpp"
#include "omrkit/imgprep.hpp"
#include "omrkit/mxl.hpp"
#include "omrkit/png_io.hpp"
#include "omrkit/rational.hpp"
#include "omrkit/seq_metrics.hpp"

namespace {

using namespace omrkit;

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error(ErrorCode::IoError, "short write to " + path);
}

void emit_output(const std::string& path, const std::string& bytes) {
    if (path.empty())
        std::cout << bytes;
    else
        write_file(path, bytes);
}

void print_diagnostics(const DiagnosticList& diags) {
    for (const auto& d : diags) {
        std::cerr << "warning: " << d.message;
        if (d.line)
            std::cerr << " (line " << d.line << ")";
        std::cerr << '\n';
    }
}

Rational parse_unit(const std::string& text) {
    long num = 0, den = 0;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%ld/%ld%c", &num, &den, &extra) != 2 || num != 1 ||
        den < 1 || den > 64 || (den & (den - 1)) != 0)
        throw CLI::ValidationError("--unit", "expected 1/1, 1/2, 1/4, ... or 1/64");
    return Rational(num, den);
}

// ---- subcommand bodies; each returns the process exit code ----

int run_canon(const std::string& in, const std::string& out, int bars, const std::string& unit,
              bool mask) {
    abc::CanonConfig cfg;
    cfg.bars_per_line = bars;
    cfg.unit_note = parse_unit(unit);
    abc::Score score = abc::parse_abc(run::read_file(in));
    if (mask)
        score = abc::mask_text(score, cfg);
    emit_output(out, abc::emit_abc(abc::canonicalize(score, cfg)));
    return 0;
}

int run_convert(const std::string& in, const std::string& out) {
    abc::Score score = abc::parse_abc(run::read_file(in));
    convert::ConvertStats stats;
    mxl::LabeledTree tree = convert::convert(score, &stats);
    print_diagnostics(stats.diagnostics);
    for (const auto& [what, n] : stats.dropped)
        std::cerr << "warning: dropped " << n << " x " << what << '\n';
    emit_output(out, mxl::serialize_musicxml(tree));
    return 0;
}

int finish_eval(const run::EvalOutput& result, const std::string& report) {
    if (!report.empty()) {
        write_file(report, run::to_jsonl(result.rows));
        write_file(report + ".summary.json", result.summary.dump(2) + "\n");
    }
    if (result.summary.contains("unmatched_pred"))
        for (const auto& stem : result.summary["unmatched_pred"])
            std::cerr << "warning: prediction '" << stem.get<std::string>()
                      << "' has no matching gold file\n";
    std::cout << run::summary_table(result.summary);
    return 0;
}

int run_bpe_train(const std::string& corpus_dir, std::size_t vocab_size,
                  const std::string& out) {
    std::vector<std::string> paths;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(corpus_dir))
        if (entry.is_regular_file())
            paths.push_back(entry.path().string());
    std::sort(paths.begin(), paths.end());
    std::vector<std::string> corpus;
    corpus.reserve(paths.size());
    for (const auto& p : paths)
        corpus.push_back(run::read_file(p));
    bpe::TokenVocab vocab = bpe::train(corpus, vocab_size);
    write_file(out, bpe::vocab_to_json(vocab));
    std::cout << "trained " << vocab.merges.size() << " merges (vocab " << vocab.size()
              << ") from " << corpus.size() << " documents\n";
    return 0;
}

int run_bpe_encode(const std::string& vocab_path, const std::string& in,
                   const std::string& out) {
    bpe::TokenVocab vocab = bpe::vocab_from_json(run::read_file(vocab_path));
    std::vector<int> ids = bpe::encode(run::read_file(in), vocab);
    std::string text;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i)
            text += ' ';
        text += std::to_string(ids[i]);
    }
    text += '\n';
    emit_output(out, text);
    return 0;
}

int run_bpe_decode(const std::string& vocab_path, const std::string& in,
                   const std::string& out) {
    bpe::TokenVocab vocab = bpe::vocab_from_json(run::read_file(vocab_path));
    std::istringstream ids_text(run::read_file(in));
    std::vector<int> ids;
    long id = 0;
    while (ids_text >> id)
        ids.push_back(static_cast<int>(id));
    emit_output(out, bpe::decode(ids, vocab));
    return 0;
}

int run_segment(const std::string& in, double overlap, const std::string& out) {
    img::SegmentBatch batch = img::segment_image(img::load_png(in), overlap);
    std::string bytes(reinterpret_cast<const char*>(batch.data.data()),
                      batch.data.size() * sizeof(float));
    write_file(out, bytes); // raw little-endian float32, C-order S*4*3*448*448
    nlohmann::json geometry = nlohmann::json::array();
    for (const auto& g : batch.geometry)
        geometry.push_back({{"y_offset_px", g.y_offset_px},
                            {"height_px", g.height_px},
                            {"overlap_px", g.overlap_px}});
    nlohmann::json sidecar{{"segments", batch.segments},
                           {"patches", 4},
                           {"channels", 3},
                           {"patch_size", img::kPatchSize},
                           {"dtype", "float32-le"},
                           {"overlap_frac", overlap},
                           {"geometry", geometry}};
    write_file(out + ".json", sidecar.dump(2) + "\n");
    std::cout << "wrote " << batch.segments << " segment(s) to " << out << '\n';
    return 0;
}

int run_augment(const std::string& in, const img::AugmentConfig& cfg, const std::string& out) {
    img::save_png(out, img::augment(img::load_png(in), cfg));
    return 0;
}

int run_summarize(const std::string& report_path) {
    std::cout << run::summary_table(run::summarize_report(run::read_file(report_path)));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"score notation toolkit: ABC canonicalization, MusicXML conversion, "
                 "evaluation metrics, tokenization, and image preprocessing"};
    app.require_subcommand(1);

    // canon
    std::string canon_in, canon_out, canon_unit = "1/8";
    int canon_bars = 5;
    bool canon_mask = false;
    CLI::App* canon = app.add_subcommand("canon", "rewrite an ABC tune into canonical form");
    canon->add_option("input", canon_in, "input .abc file")->required();
    canon->add_option("--bars-per-line", canon_bars, "measures per text line")
        ->check(CLI::PositiveNumber);
    canon->add_option("--unit", canon_unit, "unit note length, e.g. 1/8");
    canon->add_flag("--mask-text", canon_mask, "replace titles, lyrics and annotations");
    canon->add_option("-o,--output", canon_out, "output file (default stdout)");

    // convert
    std::string conv_in, conv_out;
    CLI::App* conv = app.add_subcommand("convert", "convert ABC to MusicXML");
    conv->add_option("input", conv_in, "input .abc file")->required();
    conv->add_option("-o,--output", conv_out, "output .musicxml file")->required();

    // eval
    CLI::App* eval = app.add_subcommand("eval", "score predictions against gold files");
    eval->require_subcommand(1);
    std::string pred, gold, report;
    std::size_t max_nodes = 6000;
    std::string level = "char";
    std::string costs_path;
    auto add_corpus = [&](CLI::App* cmd) {
        cmd->add_option("--pred", pred, "prediction file or directory")->required();
        cmd->add_option("--gold", gold, "gold file or directory")->required();
        cmd->add_option("--report", report, "JSONL report path");
    };
    CLI::App* tedn_cmd = eval->add_subcommand("tedn", "normalized tree edit distance");
    add_corpus(tedn_cmd);
    tedn_cmd->add_option("--max-nodes", max_nodes, "tree size cap before truncation");
    CLI::App* er_cmd = eval->add_subcommand("er", "character/symbol/line error rate");
    add_corpus(er_cmd);
    er_cmd->add_option("--level", level, "char, symbol or line")
        ->check(CLI::IsMember({"char", "symbol", "line"}));
    CLI::App* ned_cmd = eval->add_subcommand("omrned", "measure-level normalized edit distance");
    add_corpus(ned_cmd);
    ned_cmd->add_option("--costs", costs_path, "per-category cost table JSON");

    // bpe
    CLI::App* bpe_cmd = app.add_subcommand("bpe", "byte-pair tokenizer");
    bpe_cmd->require_subcommand(1);
    std::string corpus_dir, vocab_path = "vocab.json", bpe_in, bpe_out;
    std::size_t vocab_size = 4097;
    CLI::App* train_cmd = bpe_cmd->add_subcommand("train", "learn merges from a corpus");
    train_cmd->add_option("--corpus", corpus_dir, "directory of training documents")
        ->required();
    train_cmd->add_option("--vocab-size", vocab_size, "total vocabulary size");
    train_cmd->add_option("-o,--output", vocab_path, "vocabulary JSON path")->required();
    CLI::App* enc_cmd = bpe_cmd->add_subcommand("encode", "text file to token ids");
    enc_cmd->add_option("--vocab", vocab_path, "vocabulary JSON")->required();
    enc_cmd->add_option("input", bpe_in, "input text file")->required();
    enc_cmd->add_option("-o,--output", bpe_out, "output file (default stdout)");
    CLI::App* dec_cmd = bpe_cmd->add_subcommand("decode", "token ids back to text");
    dec_cmd->add_option("--vocab", vocab_path, "vocabulary JSON")->required();
    dec_cmd->add_option("input", bpe_in, "input id file")->required();
    dec_cmd->add_option("-o,--output", bpe_out, "output file (default stdout)");

    // imgprep
    CLI::App* imgprep = app.add_subcommand("imgprep", "score image preprocessing");
    imgprep->require_subcommand(1);
    std::string img_in, img_out;
    double overlap = img::kDefaultOverlap;
    img::AugmentConfig aug;
    CLI::App* seg_cmd = imgprep->add_subcommand("segment", "split a page into patch tensors");
    seg_cmd->add_option("input", img_in, "input PNG")->required();
    seg_cmd->add_option("--overlap", overlap, "overlap fraction between segments")
        ->check(CLI::Range(0.0, 0.999));
    seg_cmd->add_option("-o,--output", img_out, "raw float32 tensor path")->required();
    CLI::App* aug_cmd = imgprep->add_subcommand("augment", "randomized training augmentation");
    aug_cmd->add_option("input", img_in, "input PNG")->required();
    aug_cmd->add_option("--seed", aug.seed, "RNG seed");
    aug_cmd->add_option("--gray-min", aug.background_gray_min, "background gray lower bound");
    aug_cmd->add_option("--gray-max", aug.background_gray_max, "background gray upper bound");
    aug_cmd->add_option("--scale-min", aug.scale_min, "scale fraction lower bound");
    aug_cmd->add_option("--scale-max", aug.scale_max, "scale fraction upper bound");
    aug_cmd->add_option("--margin", aug.margin_crop_max, "max per-side margin crop, px");
    aug_cmd->add_option("-o,--output", img_out, "output PNG")->required();

    // report
    CLI::App* rep = app.add_subcommand("report", "report utilities");
    rep->require_subcommand(1);
    std::string rep_path;
    CLI::App* sum_cmd = rep->add_subcommand("summarize", "aggregate a JSONL report");
    sum_cmd->add_option("report", rep_path, "JSONL report file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (canon->parsed())
            return run_canon(canon_in, canon_out, canon_bars, canon_unit, canon_mask);
        if (conv->parsed())
            return run_convert(conv_in, conv_out);
        if (tedn_cmd->parsed()) {
            run::TednOptions options;
            options.max_nodes = max_nodes;
            return finish_eval(run::eval_tedn(run::pair_corpus(pred, gold), options), report);
        }
        if (er_cmd->parsed()) {
            metrics::ErrorLevel lv = level == "char"     ? metrics::ErrorLevel::character
                                     : level == "symbol" ? metrics::ErrorLevel::symbol
                                                         : metrics::ErrorLevel::line;
            return finish_eval(run::eval_er(run::pair_corpus(pred, gold), lv), report);
        }
        if (ned_cmd->parsed()) {
            metrics::CostTable costs;
            if (!costs_path.empty())
                costs = metrics::cost_table_from_json(run::read_file(costs_path));
            return finish_eval(run::eval_omrned(run::pair_corpus(pred, gold), costs), report);
        }
        if (train_cmd->parsed())
            return run_bpe_train(corpus_dir, vocab_size, vocab_path);
        if (enc_cmd->parsed())
            return run_bpe_encode(vocab_path, bpe_in, bpe_out);
        if (dec_cmd->parsed())
            return run_bpe_decode(vocab_path, bpe_in, bpe_out);
        if (seg_cmd->parsed())
            return run_segment(img_in, overlap, img_out);
        if (aug_cmd->parsed())
            return run_augment(img_in, aug, img_out);
        if (sum_cmd->parsed())
            return run_summarize(rep_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    std::cerr << "error: no subcommand selected\n";
    return 1;
}
