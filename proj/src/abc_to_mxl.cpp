#include "omrkit/convert.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "omrkit/error.hpp"

namespace omrkit::convert {
namespace {

using abc::ResolvedNote;
using abc::ResolvedVoice;
using mxl::LabeledTree;

LabeledTree el(std::string label) { return LabeledTree{std::move(label), {}, false}; }

LabeledTree& add(LabeledTree& parent, std::string label) {
    parent.children.push_back(el(std::move(label)));
    return parent.children.back();
}

std::string itos(std::int64_t v) { return std::to_string(v); }

struct TimeSig {
    std::string beats; // "4", "2+3", ...
    int beat_type = 4;
    std::string symbol; // "common", "cut" or empty
    Rational fraction{4, 4};
};

// M: field text -> time signature. nullopt = free meter ("none" or empty).
// Throws UnsupportedMeter on anything else that does not parse.
std::optional<TimeSig> parse_time(const std::string& raw) {
    std::string t;
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')')
            t += c;
    if (t.empty() || t == "none")
        return std::nullopt;
    if (t == "C")
        return TimeSig{"4", 4, "common", Rational(4, 4)};
    if (t == "C|")
        return TimeSig{"2", 2, "cut", Rational(2, 2)};
    auto bad = [&] { throw Error(ErrorCode::UnsupportedMeter, "meter '" + raw + "'"); };
    auto slash = t.find('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 == t.size())
        bad();
    std::int64_t num = 0, part = 0;
    bool in_part = false;
    std::string beats;
    for (std::size_t i = 0; i < slash; ++i) {
        char c = t[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            part = part * 10 + (c - '0');
            if (part > 999'999'999)
                bad();
            in_part = true;
        } else if (c == '+' && in_part) {
            num += part;
            beats += itos(part) + "+";
            part = 0;
            in_part = false;
        } else {
            bad();
        }
    }
    if (!in_part || part == 0)
        bad();
    num += part;
    beats += itos(part);
    std::int64_t den = 0;
    for (std::size_t i = slash + 1; i < t.size(); ++i) {
        char c = t[i];
        if (!std::isdigit(static_cast<unsigned char>(c)))
            bad();
        den = den * 10 + (c - '0');
        if (den > 999'999'999)
            bad();
    }
    if (den == 0)
        bad();
    return TimeSig{beats, int(den), "", Rational(num, den)};
}

struct KeySig {
    int fifths = 0;
    std::string mode = "major";
};

// Scans whitespace-separated tokens for "clef=NAME" or a bare clef name.
void scan_clef(const std::string& text, std::size_t from, std::string& clef) {
    static const char* names[] = {"treble", "bass", "alto", "tenor"};
    std::size_t i = from;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
            ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])))
            ++j;
        std::string tok = text.substr(i, j - i);
        if (tok.rfind("clef=", 0) == 0)
            tok = tok.substr(5);
        for (const char* n : names)
            if (tok == n)
                clef = n;
        i = j;
    }
}

// K: field text -> key signature; also picks up a clef token. nullopt when
// the field carries no tonic ("", "none", clef-only, bagpipe keys).
std::optional<KeySig> parse_key(const std::string& raw, std::string& clef,
                                DiagnosticList& diags) {
    std::size_t i = 0;
    while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i])))
        ++i;
    std::size_t j = i;
    while (j < raw.size() && !std::isspace(static_cast<unsigned char>(raw[j])))
        ++j;
    std::string first = raw.substr(i, j - i);
    std::size_t rest_from = j;
    if (first.empty() || first == "none") {
        scan_clef(raw, rest_from, clef);
        return std::nullopt;
    }
    if (first == "HP" || first == "Hp") {
        warn(diags, "bagpipe key has no key signature equivalent");
        scan_clef(raw, rest_from, clef);
        return std::nullopt;
    }
    char step = first[0];
    if (step < 'A' || step > 'G') {
        // Clef-only field like "K:clef=bass".
        scan_clef(raw, i, clef);
        return std::nullopt;
    }
    static const int base[7] = {3, 5, 0, 2, 4, -1, 1}; // A..G
    int fifths = base[step - 'A'];
    std::size_t p = 1;
    if (p < first.size() && (first[p] == '#' || first[p] == 'b')) {
        fifths += first[p] == '#' ? 7 : -7;
        ++p;
    }
    std::string mode_text;
    for (; p < first.size(); ++p)
        if (std::isalpha(static_cast<unsigned char>(first[p])))
            mode_text += char(std::tolower(static_cast<unsigned char>(first[p])));
    KeySig key;
    key.fifths = fifths;
    struct ModeRow {
        const char* prefix;
        int offset;
        const char* name;
    };
    static const ModeRow modes[] = {
        {"maj", 0, "major"},    {"ion", 0, "ionian"},     {"mix", -1, "mixolydian"},
        {"dor", -2, "dorian"},  {"min", -3, "minor"},     {"aeo", -3, "aeolian"},
        {"m", -3, "minor"},     {"phr", -4, "phrygian"},  {"loc", -5, "locrian"},
        {"lyd", 1, "lydian"},
    };
    if (!mode_text.empty()) {
        bool matched = false;
        for (const auto& row : modes) {
            if (mode_text.rfind(row.prefix, 0) == 0 &&
                (mode_text.size() > 1 || row.prefix[1] == '\0')) {
                key.fifths += row.offset;
                key.mode = row.name;
                matched = true;
                break;
            }
        }
        if (!matched)
            warn(diags, "unknown mode '" + mode_text + "' treated as major");
    }
    scan_clef(raw, rest_from, clef);
    return key;
}

std::pair<char, int> clef_sign_line(const std::string& clef) {
    if (clef == "bass")
        return {'F', 4};
    if (clef == "alto")
        return {'C', 3};
    if (clef == "tenor")
        return {'C', 4};
    return {'G', 2};
}

std::int64_t compute_divisions(const std::vector<ResolvedVoice>& voices,
                               DiagnosticList& diags) {
    std::int64_t div = 1;
    for (const auto& v : voices)
        for (const auto& m : v.measures)
            for (const auto& n : m.notes) {
                if (n.grace)
                    continue;
                Rational quarters = n.duration * 4;
                std::int64_t den = quarters.denominator();
                std::int64_t g = std::gcd(div, den);
                std::int64_t next = div / g * den;
                if (next > 960) {
                    warn(diags, "divisions capped at 960; some durations rounded");
                    return 960;
                }
                div = next;
            }
    return div;
}

std::int64_t ticks_of(const Rational& whole_units, std::int64_t div, bool& rounded) {
    std::int64_t num = whole_units.numerator() * 4 * div;
    std::int64_t den = whole_units.denominator();
    if (num % den == 0)
        return num / den;
    rounded = true;
    auto t = std::int64_t(std::llround(double(num) / double(den)));
    return t < 1 ? 1 : t;
}

struct TypeDots {
    const char* type;
    int dots;
};

// Written note type for a duration in quarter-note units, dotted up to twice.
std::optional<TypeDots> note_type(const Rational& quarters) {
    static const std::pair<Rational, const char*> bases[] = {
        {Rational(8), "breve"},      {Rational(4), "whole"},  {Rational(2), "half"},
        {Rational(1), "quarter"},    {Rational(1, 2), "eighth"}, {Rational(1, 4), "16th"},
        {Rational(1, 8), "32nd"},    {Rational(1, 16), "64th"},  {Rational(1, 32), "128th"},
    };
    for (const auto& [base, name] : bases)
        for (int dots = 0; dots <= 2; ++dots) {
            Rational mult = Rational(2) - Rational(1, std::int64_t(1) << dots);
            if (base * mult == quarters)
                return TypeDots{name, dots};
        }
    return std::nullopt;
}

struct PartState {
    std::set<std::pair<char, int>> tied; // (step, octave) with a tie pending
    std::vector<int> slur_stack;
    std::set<int> slur_numbers;
};

void attach_notations(LabeledTree& note, const ResolvedNote& n, PartState& ps,
                      ConvertStats& stats) {
    LabeledTree nots = el("notations");
    for (int i = 0; i < n.slur_stops; ++i) {
        if (ps.slur_stack.empty()) {
            warn(stats.diagnostics, "slur close without a matching open");
            continue;
        }
        int num = ps.slur_stack.back();
        ps.slur_stack.pop_back();
        ps.slur_numbers.erase(num);
        nots.children.push_back(el("slur@number=" + itos(num) + "@type=stop"));
    }
    for (int i = 0; i < n.slur_starts; ++i) {
        int num = 1;
        while (ps.slur_numbers.count(num))
            ++num;
        ps.slur_numbers.insert(num);
        ps.slur_stack.push_back(num);
        nots.children.push_back(el("slur@number=" + itos(num) + "@type=start"));
    }
    LabeledTree artic = el("articulations");
    LabeledTree orn = el("ornaments");
    LabeledTree tech = el("technical");
    bool fermata = false;
    for (const auto& d : n.decorations) {
        if (d == "." || d == "staccato")
            artic.children.push_back(el("staccato"));
        else if (d == "L" || d == "accent" || d == ">" || d == "emphasis")
            artic.children.push_back(el("accent"));
        else if (d == "H" || d == "fermata")
            fermata = true;
        else if (d == "T" || d == "trill")
            orn.children.push_back(el("trill-mark"));
        else if (d == "u" || d == "upbow")
            tech.children.push_back(el("up-bow"));
        else if (d == "v" || d == "downbow")
            tech.children.push_back(el("down-bow"));
        else
            ++stats.dropped["decoration:" + d];
    }
    if (!artic.children.empty())
        nots.children.push_back(std::move(artic));
    if (!orn.children.empty())
        nots.children.push_back(std::move(orn));
    if (!tech.children.empty())
        nots.children.push_back(std::move(tech));
    if (fermata)
        nots.children.push_back(el("fermata"));
    if (!n.annotations.empty())
        stats.dropped["annotation"] += n.annotations.size();
    if (!nots.children.empty())
        note.children.push_back(std::move(nots));
}

void emit_event(LabeledTree& measure, const ResolvedNote& n, std::int64_t div,
                PartState& ps, ConvertStats& stats, std::int64_t& elapsed,
                bool& had_overlay) {
    if (n.overlay_before) {
        had_overlay = true;
        if (elapsed > 0) {
            LabeledTree& b = add(measure, "backup");
            add(b, "duration=" + itos(elapsed));
            elapsed = 0;
        } else {
            warn(stats.diagnostics, "voice overlay at measure start ignored");
        }
    }
    bool rounded = false;
    std::int64_t ticks = n.grace ? 0 : ticks_of(n.duration, div, rounded);
    if (rounded)
        warn(stats.diagnostics, "duration rounded to the divisions grid");
    std::optional<TypeDots> td;
    if (!n.grace) {
        Rational written = n.duration * 4;
        if (n.tuplet_actual > 0 && n.tuplet_normal > 0)
            written *= Rational(n.tuplet_actual, n.tuplet_normal);
        td = note_type(written);
    }
    auto add_tail = [&](LabeledTree& note) {
        if (td) {
            add(note, std::string("type=") + td->type);
            for (int i = 0; i < td->dots; ++i)
                add(note, "dot");
        }
        if (n.tuplet_actual > 0 && n.tuplet_normal > 0) {
            LabeledTree& tm = add(note, "time-modification");
            add(tm, "actual-notes=" + itos(n.tuplet_actual));
            add(tm, "normal-notes=" + itos(n.tuplet_normal));
        }
    };
    if (n.rest) {
        LabeledTree& note = add(measure, n.visible ? "note" : "note@print-object=no");
        add(note, "rest");
        add(note, "duration=" + itos(ticks));
        add_tail(note);
        attach_notations(note, n, ps, stats);
        elapsed += ticks;
        return;
    }
    for (std::size_t hi = 0; hi < n.heads.size(); ++hi) {
        const auto& h = n.heads[hi];
        LabeledTree& note = add(measure, "note");
        if (n.grace)
            add(note, "grace");
        if (hi > 0)
            add(note, "chord");
        LabeledTree& pitch = add(note, "pitch");
        add(pitch, std::string("step=") + h.pitch.step);
        if (h.pitch.accidental)
            add(pitch, "alter=" + itos(*h.pitch.accidental));
        add(pitch, "octave=" + itos(4 + h.pitch.octave));
        if (!n.grace)
            add(note, "duration=" + itos(ticks));
        std::pair<char, int> key{h.pitch.step, h.pitch.octave};
        bool stop = ps.tied.erase(key) > 0;
        bool start = h.tie || n.tie;
        if (stop)
            add(note, "tie@type=stop");
        if (start) {
            add(note, "tie@type=start");
            ps.tied.insert(key);
        }
        add_tail(note);
        if (hi == 0)
            attach_notations(note, n, ps, stats);
    }
    elapsed += ticks;
}

} // namespace

LabeledTree convert(const abc::Score& score, ConvertStats* stats_out) {
    ConvertStats local;
    ConvertStats& stats = stats_out ? *stats_out : local;
    auto voices = abc::resolve_events(score, &stats.diagnostics);
    std::size_t total_measures = 0;
    for (const auto& v : voices)
        total_measures += v.measures.size();
    if (total_measures == 0)
        throw Error(ErrorCode::EmptyScore, "score has no measures");

    std::optional<TimeSig> time;
    if (const auto* m = score.find_header("M"))
        time = parse_time(m->value);
    std::string global_clef;
    std::optional<KeySig> key;
    if (const auto* k = score.find_header("K"))
        key = parse_key(k->value, global_clef, stats.diagnostics);
    std::int64_t div = compute_divisions(voices, stats.diagnostics);

    LabeledTree root = el("score-partwise@version=4.0");
    LabeledTree part_list = el("part-list");
    for (std::size_t vi = 0; vi < voices.size(); ++vi) {
        LabeledTree sp = el("score-part@id=P" + itos(std::int64_t(vi) + 1));
        std::string name = voices[vi].id.empty() ? "Voice " + itos(std::int64_t(vi) + 1)
                                                 : voices[vi].id;
        sp.children.push_back(el("part-name=" + name));
        part_list.children.push_back(std::move(sp));
    }
    root.children.push_back(std::move(part_list));

    for (std::size_t vi = 0; vi < voices.size(); ++vi) {
        const ResolvedVoice& voice = voices[vi];
        LabeledTree part = el("part@id=P" + itos(std::int64_t(vi) + 1));
        std::string clef = global_clef;
        for (const auto& h : score.headers) {
            if (h.key != "V" || h.directive)
                continue;
            std::size_t sp = h.value.find_first_of(" \t");
            std::string id = h.value.substr(0, sp);
            if (id == voice.id)
                scan_clef(h.value, sp == std::string::npos ? h.value.size() : sp, clef);
        }
        for (const auto& v : score.voices) {
            if (v.id != voice.id || !v.body_label)
                continue;
            std::size_t sp = v.body_label->find_first_of(" \t");
            if (sp != std::string::npos)
                scan_clef(*v.body_label, sp, clef);
        }
        PartState ps;
        std::optional<Rational> cur_meter;
        if (time)
            cur_meter = time->fraction;
        abc::BarKind prev_right = abc::BarKind::none;
        for (std::size_t mi = 0; mi < voice.measures.size(); ++mi) {
            const auto& rm = voice.measures[mi];
            LabeledTree measure = el("measure@number=" + itos(std::int64_t(mi) + 1));

            if (prev_right == abc::BarKind::repeat_begin ||
                prev_right == abc::BarKind::repeat_both) {
                LabeledTree& bl = add(measure, "barline@location=left");
                add(bl, "bar-style=heavy-light");
                add(bl, "repeat@direction=forward");
            }

            LabeledTree attrs = el("attributes");
            if (mi == 0) {
                attrs.children.push_back(el("divisions=" + itos(div)));
                if (key) {
                    LabeledTree k = el("key");
                    k.children.push_back(el("fifths=" + itos(key->fifths)));
                    k.children.push_back(el("mode=" + key->mode));
                    attrs.children.push_back(std::move(k));
                }
                if (time) {
                    LabeledTree t = el(time->symbol.empty()
                                           ? std::string("time")
                                           : "time@symbol=" + time->symbol);
                    t.children.push_back(el("beats=" + time->beats));
                    t.children.push_back(el("beat-type=" + itos(time->beat_type)));
                    attrs.children.push_back(std::move(t));
                }
                if (!clef.empty()) {
                    auto [sign, line] = clef_sign_line(clef);
                    LabeledTree c = el("clef");
                    c.children.push_back(el(std::string("sign=") + sign));
                    c.children.push_back(el("line=" + itos(line)));
                    attrs.children.push_back(std::move(c));
                }
            }
            if (mi > 0 && rm.key_change) {
                std::string ignored_clef;
                if (auto kc = parse_key(*rm.key_change, ignored_clef, stats.diagnostics)) {
                    LabeledTree k = el("key");
                    k.children.push_back(el("fifths=" + itos(kc->fifths)));
                    k.children.push_back(el("mode=" + kc->mode));
                    attrs.children.push_back(std::move(k));
                }
            }
            if (rm.meter_change) {
                try {
                    auto ts = parse_time(*rm.meter_change);
                    cur_meter = ts ? std::optional<Rational>(ts->fraction) : std::nullopt;
                    if (ts) {
                        LabeledTree t = el(ts->symbol.empty()
                                               ? std::string("time")
                                               : "time@symbol=" + ts->symbol);
                        t.children.push_back(el("beats=" + ts->beats));
                        t.children.push_back(el("beat-type=" + itos(ts->beat_type)));
                        attrs.children.push_back(std::move(t));
                    }
                } catch (const Error&) {
                    warn(stats.diagnostics,
                         "inline meter '" + *rm.meter_change + "' ignored");
                }
            }
            if (!attrs.children.empty())
                measure.children.push_back(std::move(attrs));

            std::int64_t elapsed = 0;
            bool had_overlay = false;
            for (const auto& n : rm.notes)
                emit_event(measure, n, div, ps, stats, elapsed, had_overlay);

            if (cur_meter && !had_overlay && !rm.notes.empty()) {
                Rational want = *cur_meter * 4 * div;
                if (want.denominator() == 1 && want.numerator() != elapsed)
                    warn(stats.diagnostics,
                         "measure " + itos(std::int64_t(mi) + 1) + " of part " +
                             itos(std::int64_t(vi) + 1) + " sums to " + itos(elapsed) +
                             " ticks, meter expects " + itos(want.numerator()));
            }

            if (!rm.right.volta.empty())
                ++stats.dropped["volta"];
            abc::BarKind kind = rm.right.kind;
            if (kind == abc::BarKind::end || kind == abc::BarKind::repeat_end ||
                kind == abc::BarKind::repeat_both || kind == abc::BarKind::double_bar) {
                LabeledTree& bl = add(measure, "barline@location=right");
                add(bl, kind == abc::BarKind::double_bar ? "bar-style=light-light"
                                                         : "bar-style=light-heavy");
                if (kind == abc::BarKind::repeat_end || kind == abc::BarKind::repeat_both)
                    add(bl, "repeat@direction=backward");
            }
            prev_right = kind;
            part.children.push_back(std::move(measure));
        }
        root.children.push_back(std::move(part));
    }
    return root;
}

} // namespace omrkit::convert
