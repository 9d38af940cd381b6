#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "omrkit/abc.hpp"
#include "omrkit/diagnostics.hpp"
#include "omrkit/mxl.hpp"

namespace omrkit::convert {

// Tallies of source elements with no MusicXML mapping, keyed by kind
// ("decoration:wedge", "annotation", "volta"), plus non-fatal findings.
struct ConvertStats {
    std::map<std::string, std::size_t> dropped;
    DiagnosticList diagnostics;
};

// Builds a score-partwise tree: one part per voice, one <measure> per ABC
// measure. Pitches carry step/alter/octave, durations are integer multiples
// of a per-score divisions value (LCM of duration denominators, capped at
// 960 with rounding diagnostics). Chord members after the first carry
// <chord/>; ties and slurs map to their MusicXML notations. Throws
// EmptyScore when no voice has a measure and UnsupportedMeter when the M:
// header does not parse; inline meter changes that fail to parse degrade to
// diagnostics.
mxl::LabeledTree convert(const abc::Score& score, ConvertStats* stats = nullptr);

} // namespace omrkit::convert
