#include "omrkit/seq_metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <json.hpp>
#include <stdexcept>

#include "omrkit/error.hpp"
#include "omrkit/rational.hpp"

namespace omrkit::metrics {
namespace {

// ---- unit extraction ----

std::vector<std::uint32_t> codepoints(const std::string& text) {
    std::vector<std::uint32_t> out;
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        int extra = c < 0x80 ? 0 : (c >> 5) == 0x6 ? 1 : (c >> 4) == 0xE ? 2
                                 : (c >> 3) == 0x1E ? 3 : -1;
        if (extra < 0 || i + std::size_t(extra) >= text.size()) {
            out.push_back(c); // invalid byte: one unit, keep going
            ++i;
            continue;
        }
        std::uint32_t cp = extra == 0 ? c : c & (0x3F >> extra);
        bool ok = true;
        for (int k = 1; k <= extra; ++k) {
            unsigned char cc = static_cast<unsigned char>(text[i + std::size_t(k)]);
            if ((cc >> 6) != 0x2) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (!ok) {
            out.push_back(c);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += std::size_t(extra) + 1;
    }
    return out;
}

std::vector<std::string> whitespace_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
            ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])))
            ++j;
        if (j > i)
            out.push_back(text.substr(i, j - i));
        i = j;
    }
    return out;
}

std::vector<std::string> split_lines(const std::string& text) {
    if (text.empty())
        return {};
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i)
        if (text[i] == '\n') {
            out.push_back(text.substr(start, i - start));
            start = i + 1;
        }
    if (start < text.size())
        out.push_back(text.substr(start));
    return out;
}

template <typename T>
std::size_t levenshtein(const std::vector<T>& a, const std::vector<T>& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j)
        prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// ---- measure extraction ----

std::string text_of(const mxl::LabeledTree& t) {
    auto pos = t.label.find('=');
    return pos == std::string::npos ? "" : t.label.substr(pos + 1);
}

const mxl::LabeledTree* child(const mxl::LabeledTree& t, const std::string& tag) {
    for (const auto& c : t.children)
        if (mxl::label_tag(c.label) == tag)
            return &c;
    return nullptr;
}

std::string quarters_text(std::int64_t ticks, std::int64_t divisions) {
    if (divisions <= 0)
        divisions = 1;
    return to_string(Rational(ticks, divisions));
}

std::int64_t int_text(const mxl::LabeledTree& t) {
    try {
        return std::stoll(text_of(t));
    } catch (const std::exception&) {
        return 0;
    }
}

void note_symbols(const mxl::LabeledTree& note, std::int64_t divisions,
                  std::vector<Symbol>& out) {
    bool grace = child(note, "grace") != nullptr;
    const auto* dur = child(note, "duration");
    std::string dur_text =
        grace || !dur ? std::string("grace") : quarters_text(int_text(*dur), divisions);
    if (const auto* rest = child(note, "rest"); rest) {
        out.push_back({SymbolCategory::rest, "rest:" + dur_text});
    } else if (const auto* pitch = child(note, "pitch"); pitch) {
        std::string p;
        if (const auto* step = child(*pitch, "step"))
            p += text_of(*step);
        if (const auto* alter = child(*pitch, "alter")) {
            std::int64_t a = int_text(*alter);
            if (a == 0)
                p += '=';
            else
                p += std::string(std::size_t(a > 0 ? a : -a), a > 0 ? '#' : 'b');
        }
        if (const auto* oct = child(*pitch, "octave"))
            p += text_of(*oct);
        out.push_back({SymbolCategory::note, p + ":" + dur_text});
    }
    if (const auto* nots = child(note, "notations")) {
        for (const auto& n : nots->children) {
            std::string tag = std::string(mxl::label_tag(n.label));
            if (tag == "articulations" || tag == "ornaments" || tag == "technical") {
                for (const auto& a : n.children)
                    out.push_back({SymbolCategory::articulation, std::string(mxl::label_tag(a.label))});
            } else if (tag == "fermata") {
                out.push_back({SymbolCategory::articulation, "fermata"});
            } else if (tag == "slur") {
                std::string type;
                auto pos = n.label.find("@type=");
                if (pos != std::string::npos)
                    type = n.label.substr(pos + 6);
                out.push_back({SymbolCategory::other, "slur:" + type});
            }
        }
    }
    for (const auto& c : note.children)
        if (mxl::label_tag(c.label) == "tie") {
            auto pos = c.label.find("@type=");
            out.push_back({SymbolCategory::other,
                           "tie:" + (pos == std::string::npos ? "" : c.label.substr(pos + 6))});
        }
}

void attributes_symbols(const mxl::LabeledTree& attrs, std::int64_t& divisions,
                        std::vector<Symbol>& out) {
    for (const auto& c : attrs.children) {
        std::string tag = std::string(mxl::label_tag(c.label));
        if (tag == "divisions") {
            std::int64_t d = int_text(c);
            if (d > 0)
                divisions = d;
        } else if (tag == "key") {
            std::string fifths = "0", mode;
            if (const auto* f = child(c, "fifths"))
                fifths = text_of(*f);
            if (const auto* m = child(c, "mode"))
                mode = text_of(*m);
            out.push_back({SymbolCategory::key, fifths + (mode.empty() ? "" : ":" + mode)});
        } else if (tag == "time") {
            std::string beats, type;
            if (const auto* b = child(c, "beats"))
                beats = text_of(*b);
            if (const auto* bt = child(c, "beat-type"))
                type = text_of(*bt);
            out.push_back({SymbolCategory::time, beats + "/" + type});
        } else if (tag == "clef") {
            std::string sign, line;
            if (const auto* s = child(c, "sign"))
                sign = text_of(*s);
            if (const auto* l = child(c, "line"))
                line = text_of(*l);
            out.push_back({SymbolCategory::clef, sign + line});
        }
    }
}

void barline_symbols(const mxl::LabeledTree& bl, std::vector<Symbol>& out) {
    for (const auto& c : bl.children) {
        std::string tag = std::string(mxl::label_tag(c.label));
        if (tag == "bar-style") {
            out.push_back({SymbolCategory::barline_attr, text_of(c)});
        } else if (tag == "repeat") {
            auto pos = c.label.find("@direction=");
            std::string dir =
                pos == std::string::npos ? "" : c.label.substr(pos + 11);
            auto at = dir.find('@');
            if (at != std::string::npos)
                dir = dir.substr(0, at);
            out.push_back({SymbolCategory::barline_attr, "repeat:" + dir});
        } else if (tag == "ending") {
            out.push_back({SymbolCategory::barline_attr, "ending"});
        }
    }
}

} // namespace

double error_rate(const std::string& pred, const std::string& gold, ErrorLevel level) {
    std::size_t dist = 0, gold_n = 0;
    if (level == ErrorLevel::character) {
        auto p = codepoints(pred), g = codepoints(gold);
        dist = levenshtein(p, g);
        gold_n = g.size();
    } else if (level == ErrorLevel::symbol) {
        auto p = whitespace_tokens(pred), g = whitespace_tokens(gold);
        dist = levenshtein(p, g);
        gold_n = g.size();
    } else {
        auto p = split_lines(pred), g = split_lines(gold);
        dist = levenshtein(p, g);
        gold_n = g.size();
    }
    if (gold_n == 0)
        throw Error(ErrorCode::EmptyGold, "gold text has no units at this level");
    return double(dist) / double(gold_n);
}

const char* category_name(SymbolCategory c) {
    switch (c) {
    case SymbolCategory::note: return "note";
    case SymbolCategory::rest: return "rest";
    case SymbolCategory::clef: return "clef";
    case SymbolCategory::key: return "key";
    case SymbolCategory::time: return "time";
    case SymbolCategory::barline_attr: return "barline-attr";
    case SymbolCategory::articulation: return "articulation";
    case SymbolCategory::other: return "other";
    }
    return "other";
}

SymbolCategory category_from_name(const std::string& name) {
    static const std::pair<const char*, SymbolCategory> rows[] = {
        {"note", SymbolCategory::note},
        {"rest", SymbolCategory::rest},
        {"clef", SymbolCategory::clef},
        {"key", SymbolCategory::key},
        {"time", SymbolCategory::time},
        {"barline-attr", SymbolCategory::barline_attr},
        {"articulation", SymbolCategory::articulation},
        {"other", SymbolCategory::other},
    };
    for (const auto& [n, c] : rows)
        if (name == n)
            return c;
    throw std::invalid_argument("unknown symbol category '" + name + "'");
}

std::vector<MeasureSymbols> extract_measures(const mxl::LabeledTree& t) {
    std::vector<MeasureSymbols> out;
    bool any_measure = false;
    for (const auto& part : t.children) {
        if (mxl::label_tag(part.label) != "part")
            continue;
        std::int64_t divisions = 1;
        std::size_t index = 0;
        for (const auto& measure : part.children) {
            if (mxl::label_tag(measure.label) != "measure")
                continue;
            any_measure = true;
            if (out.size() <= index)
                out.emplace_back();
            auto& bag = out[index].symbols;
            for (const auto& c : measure.children) {
                std::string tag = std::string(mxl::label_tag(c.label));
                if (tag == "attributes")
                    attributes_symbols(c, divisions, bag);
                else if (tag == "note")
                    note_symbols(c, divisions, bag);
                else if (tag == "barline")
                    barline_symbols(c, bag);
            }
            ++index;
        }
    }
    if (!any_measure)
        throw Error(ErrorCode::NoMeasures, "document has no measures");
    for (auto& m : out)
        std::sort(m.symbols.begin(), m.symbols.end());
    return out;
}

double CostTable::insert_cost(SymbolCategory c) const {
    auto it = insert.find(c);
    return it == insert.end() ? 1.0 : it->second;
}

double CostTable::delete_cost(SymbolCategory c) const {
    auto it = remove.find(c);
    return it == remove.end() ? 1.0 : it->second;
}

CostTable cost_table_from_json(const std::string& json_text) {
    nlohmann::json doc = nlohmann::json::parse(json_text);
    CostTable table;
    for (const auto& [name, entry] : doc.items()) {
        if (name == "version") {
            table.version = entry.get<std::string>();
            continue;
        }
        SymbolCategory cat = category_from_name(name);
        if (entry.contains("insert")) {
            double v = entry["insert"].get<double>();
            if (v < 0)
                throw std::invalid_argument("negative insert cost for " + name);
            table.insert[cat] = v;
        }
        if (entry.contains("delete")) {
            double v = entry["delete"].get<double>();
            if (v < 0)
                throw std::invalid_argument("negative delete cost for " + name);
            table.remove[cat] = v;
        }
    }
    return table;
}

double measure_cost(const MeasureSymbols& a, const MeasureSymbols& b,
                    const CostTable& costs) {
    double total = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.symbols.size() || j < b.symbols.size()) {
        if (j == b.symbols.size() ||
            (i < a.symbols.size() && a.symbols[i] < b.symbols[j])) {
            total += costs.delete_cost(a.symbols[i].category);
            ++i;
        } else if (i == a.symbols.size() || b.symbols[j] < a.symbols[i]) {
            total += costs.insert_cost(b.symbols[j].category);
            ++j;
        } else {
            ++i;
            ++j;
        }
    }
    return total;
}

double omr_ned(const std::vector<MeasureSymbols>& pred,
               const std::vector<MeasureSymbols>& gold, const CostTable& costs) {
    if (gold.empty())
        throw Error(ErrorCode::EmptyGold, "gold has no measures");
    auto full_insert = [&](const MeasureSymbols& m) {
        double c = 0.0;
        for (const auto& s : m.symbols)
            c += costs.insert_cost(s.category);
        return c;
    };
    auto full_delete = [&](const MeasureSymbols& m) {
        double c = 0.0;
        for (const auto& s : m.symbols)
            c += costs.delete_cost(s.category);
        return c;
    };
    std::size_t p = pred.size(), g = gold.size();
    std::vector<std::vector<double>> dp(p + 1, std::vector<double>(g + 1, 0.0));
    for (std::size_t i = 1; i <= p; ++i)
        dp[i][0] = dp[i - 1][0] + full_delete(pred[i - 1]);
    for (std::size_t j = 1; j <= g; ++j)
        dp[0][j] = dp[0][j - 1] + full_insert(gold[j - 1]);
    for (std::size_t i = 1; i <= p; ++i)
        for (std::size_t j = 1; j <= g; ++j)
            dp[i][j] = std::min({dp[i - 1][j] + full_delete(pred[i - 1]),
                                 dp[i][j - 1] + full_insert(gold[j - 1]),
                                 dp[i - 1][j - 1] + measure_cost(pred[i - 1], gold[j - 1], costs)});
    double numerator = dp[p][g];
    if (numerator == 0.0)
        return 0.0;
    double denominator = dp[0][g];
    if (denominator == 0.0)
        throw Error(ErrorCode::EmptyGold, "gold measures carry no insertable symbols");
    return numerator / denominator;
}

} // namespace omrkit::metrics
