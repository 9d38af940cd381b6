#pragma once

#include <string>

#include "omrkit/abc.hpp"

namespace omrkit::abc {

struct CanonConfig {
    int bars_per_line = 5;
    Rational unit_note{1, 8}; // one of 1/1, 1/2, ..., 1/64
    std::string text_token = "<|text|>";
};

// Rewrite a score into the canonical shape: unit note fixed to
// cfg.unit_note with every duration rescaled exactly, text lines re-broken
// every cfg.bars_per_line measures, each line closed by a running
// measure-total comment. '$' engraving marks survive untouched.
// Throws NonRepresentableDuration when a rescaled duration cannot be written
// back in ABC duration syntax.
Score canonicalize(const Score& score, const CanonConfig& cfg = {});

// Replace title and composer headers, quoted voice-name clauses, lyric lines
// and quoted body annotations with cfg.text_token. Musical content is
// untouched.
Score mask_text(const Score& score, const CanonConfig& cfg = {});

} // namespace omrkit::abc
