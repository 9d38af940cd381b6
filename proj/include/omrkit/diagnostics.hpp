#pragma once

#include <string>
#include <vector>

namespace omrkit {

// Non-fatal findings collected while parsing or converting. Model outputs are
// frequently near-valid, so most problems must degrade to warnings.
struct Diagnostic {
    std::string message;
    int line = 0; // 1-based source line, 0 if not applicable
};

using DiagnosticList = std::vector<Diagnostic>;

inline void warn(DiagnosticList& list, std::string message, int line = 0) {
    list.push_back(Diagnostic{std::move(message), line});
}

} // namespace omrkit
