#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "omrkit/mxl.hpp"

namespace omrkit::metrics {

// ---- text error rates ----

enum class ErrorLevel { character, symbol, line };

// Levenshtein distance over the chosen units divided by the gold unit count.
// Units: character = Unicode scalar values (invalid UTF-8 bytes count one
// unit each), symbol = maximal runs split on whitespace, line = newline-split
// lines (one trailing newline does not open an extra line). Throws EmptyGold
// when gold has no units at the level.
double error_rate(const std::string& pred, const std::string& gold, ErrorLevel level);

// ---- measure-level symbols for OMR-NED ----

enum class SymbolCategory { note, rest, clef, key, time, barline_attr, articulation, other };

const char* category_name(SymbolCategory c);
SymbolCategory category_from_name(const std::string& name); // throws std::invalid_argument

struct Symbol {
    SymbolCategory category = SymbolCategory::other;
    std::string payload;

    auto operator<=>(const Symbol&) const = default;
};

// Symbol multiset of one measure, merged across parts; kept sorted so
// measure_cost can run as a linear merge.
struct MeasureSymbols {
    std::vector<Symbol> symbols;

    bool operator==(const MeasureSymbols&) const = default;
};

// One MeasureSymbols per measure index, same-index measures of all parts
// merged. Durations are normalized to quarter notes so documents with
// different divisions compare equal. Throws NoMeasures when the tree has no
// <measure> elements.
std::vector<MeasureSymbols> extract_measures(const mxl::LabeledTree& t);

// Per-category insertion and deletion costs; anything absent costs 1.0.
// The version string is reported alongside scores so results stay
// comparable across cost revisions.
struct CostTable {
    std::map<SymbolCategory, double> insert;
    std::map<SymbolCategory, double> remove;
    std::string version = "omrkit-costs-v1";

    double insert_cost(SymbolCategory c) const;
    double delete_cost(SymbolCategory c) const;
};

// Parses {"category": {"insert": x, "delete": y}, ...} JSON text.
CostTable cost_table_from_json(const std::string& json_text);

// Cost-weighted multiset symmetric difference: delete cost for symbols only
// in `a`, insert cost for symbols only in `b`.
double measure_cost(const MeasureSymbols& a, const MeasureSymbols& b,
                    const CostTable& costs = {});

// Sequence edit distance over measures (insert/delete a measure = its full
// symbol cost, substitute = measure_cost), normalized by the cost of
// inserting every gold measure. Throws EmptyGold when gold is empty or
// carries no insertable symbols while the distance is nonzero.
double omr_ned(const std::vector<MeasureSymbols>& pred,
               const std::vector<MeasureSymbols>& gold, const CostTable& costs = {});

} // namespace omrkit::metrics
