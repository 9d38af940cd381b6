#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "omrkit/diagnostics.hpp"
#include "omrkit/rational.hpp"

namespace omrkit::abc {

enum class Dialect { raw, canonical };

// One tune header line. `key` is the field letter ("X", "K", ...), or the full
// directive name for "%%" lines, or "%" for plain comment lines kept verbatim.
struct HeaderField {
    std::string key;
    std::string value; // text after the colon, verbatim (leading spaces kept)
    bool directive = false;

    bool operator==(const HeaderField&) const = default;
};

struct Pitch {
    char step = 'C';               // 'A'..'G'
    std::optional<int> accidental; // semitone offset; 0 means explicit natural
    int octave = 0;                // 0 = octave of uppercase letters

    bool operator==(const Pitch&) const = default;
};

struct NoteHead {
    Pitch pitch;
    Rational length{1}; // multiplier of the unit note length
    bool tie = false;   // '-' directly after this head

    bool operator==(const NoteHead&) const = default;
};

// A single note (heads.size() == 1, chord == false) or a bracketed chord.
struct Note {
    std::vector<NoteHead> heads;
    bool chord = false;
    Rational multiplier{1}; // duration multiplier written after ']'
    bool tie = false;       // '-' after the whole note/chord

    bool operator==(const Note&) const = default;
};

struct Rest {
    Rational length{1};
    bool visible = true;       // 'z' prints, 'x' is an invisible spacer
    bool multi_measure = false; // 'Z' / 'X': length counts whole measures
    bool operator==(const Rest&) const = default;
};

// "(p", "(p:q" or "(p:q:r": the next r notes take q time units instead of p.
struct Tuplet {
    int p = 3;
    int q = 2;
    int r = 3;
    std::string src; // spelling as written, for lossless emission
    bool operator==(const Tuplet&) const = default;
};

struct Grace {
    std::vector<NoteHead> heads;
    bool acciaccatura = false; // leading '/'
    bool operator==(const Grace&) const = default;
};

// Broken rhythm between two notes: "a>b" dots a and halves b; '<' mirrors.
struct Broken {
    int count = 1;
    bool left_longer = true;
    bool operator==(const Broken&) const = default;
};

struct Decoration {
    std::string name; // "trill", or the single shorthand character
    bool bang = false; // written !name!
    bool operator==(const Decoration&) const = default;
};

struct InlineField {
    std::string key;
    std::string value;
    // Written as its own "K:..." body line rather than "[K:...]". Presentation
    // only, so excluded from equality.
    bool own_line = false;

    bool operator==(const InlineField& o) const { return key == o.key && value == o.value; }
};

struct Slur {
    bool open = true;
    bool operator==(const Slur&) const = default;
};

// Quoted string in the body: chord symbol or free annotation.
struct Annotation {
    std::string text;
    bool operator==(const Annotation&) const = default;
};

// Literal "<|text|>" masking token appearing in the body.
struct TextPlaceholder {
    bool operator==(const TextPlaceholder&) const = default;
};

// '&' voice overlay separator: rewinds to the start of the measure.
struct Overlay {
    bool operator==(const Overlay&) const = default;
};

// Whitespace run; musically meaningful (beam grouping), so preserved.
struct Space {
    std::string text;
    bool operator==(const Space&) const = default;
};

// Unsupported construct captured verbatim, never silently dropped.
struct Opaque {
    std::string text;
    bool operator==(const Opaque&) const = default;
};

using Event = std::variant<Note, Rest, Tuplet, Grace, Broken, Decoration, InlineField,
                           Slur, Annotation, TextPlaceholder, Overlay, Space, Opaque>;

enum class BarKind {
    none,
    plain,        // |
    double_bar,   // ||
    end,          // |]
    begin,        // [|
    repeat_begin, // |:
    repeat_end,   // :|
    repeat_both,  // ::
};

struct Barline {
    BarKind kind = BarKind::none;
    std::string volta; // ending number(s) after the bar, e.g. "1", "2", "1,2"

    bool operator==(const Barline&) const = default;
};

std::string barline_text(const Barline& bar);

struct Measure {
    std::vector<Event> events;
    Barline left;  // explicit opening barline (e.g. "|:" at a line start)
    Barline right; // barline closing the measure
    bool explicit_linebreak = false; // '$' after the right barline
    bool line_break_after = false;   // text newline after this measure
    std::optional<std::string> line_comment; // trailing "%..." content, no '%'
    std::vector<std::string> lyrics;         // w: lines after this measure's line
    std::vector<std::string> post_lines;     // verbatim comment lines after the break

    bool operator==(const Measure&) const = default;
};

struct Voice {
    std::string id = "1";
    // Verbatim value of the body "V:" line that introduced this voice, when any.
    std::optional<std::string> body_label;
    std::vector<Measure> measures;

    bool operator==(const Voice&) const = default;
};

struct Score {
    std::vector<HeaderField> headers;
    std::vector<Voice> voices;
    Dialect dialect = Dialect::raw;
    std::string trailing; // bytes after the first tune, kept verbatim
    DiagnosticList diagnostics; // warnings; not part of structural equality

    bool operator==(const Score& other) const {
        return headers == other.headers && voices == other.voices &&
               dialect == other.dialect && trailing == other.trailing;
    }

    const HeaderField* find_header(const std::string& key) const;
    // Unit note length from L:, or the ABC default derived from M:.
    Rational unit_note_length() const;
    std::optional<std::string> meter_text() const;
};

Score parse_abc(const std::string& text);
std::string emit_abc(const Score& score);

// Measure count of the longest voice. Appends a warning to `diags` when the
// voices disagree.
std::size_t measure_count(const Score& score, DiagnosticList* diags = nullptr);

// Default unit note length for a meter per the ABC 2.1 rule: meters below 0.75
// default to 1/16, otherwise 1/8. No meter means 1/8.
Rational default_unit_length(const std::optional<std::string>& meter);

// Events resolved to absolute time, with broken rhythm and tuplets applied.
// This is the bridge the MusicXML converter builds on.
struct ResolvedNote {
    bool rest = false;
    bool grace = false;
    bool visible = true;
    std::vector<NoteHead> heads;    // empty for rests
    Rational duration{0};           // whole-note units; 0 for grace notes
    bool tie = false;               // tie after the whole event
    int tuplet_actual = 0;          // p of the governing tuplet, 0 if none
    int tuplet_normal = 0;          // q of the governing tuplet
    std::vector<std::string> decorations;
    std::vector<std::string> annotations;
    int slur_starts = 0;
    int slur_stops = 0;
    bool overlay_before = false; // '&' immediately precedes this event
};

struct ResolvedMeasure {
    std::vector<ResolvedNote> notes;
    std::optional<std::string> key_change;   // inline [K:...]
    std::optional<std::string> meter_change; // inline [M:...]
    Barline right;
};

struct ResolvedVoice {
    std::string id;
    std::vector<ResolvedMeasure> measures;
};

// Walks one voice applying the running unit length (L: inline changes
// included), broken-rhythm pairs, and tuplet ratios. Durations come out in
// whole-note units.
std::vector<ResolvedVoice> resolve_events(const Score& score, DiagnosticList* diags = nullptr);

} // namespace omrkit::abc
