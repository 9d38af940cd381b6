#include "omrkit/abc.hpp"

#include <string>

#include "omrkit/error.hpp"

namespace omrkit::abc {

namespace {

std::string trimmed(const std::string& s) {
    auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos)
        return "";
    auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

// Written meter: beats as spelled (before rational reduction) plus the bar
// length. nullopt fraction means free meter.
struct MeterInfo {
    std::optional<Rational> fraction;
    bool compound = false; // 6/8, 9/8, 12/8 style: beats grouped in threes
};

MeterInfo meter_info(const std::optional<std::string>& meter) {
    if (!meter || *meter == "none")
        return {};
    if (*meter == "C")
        return {Rational(4, 4), false};
    if (*meter == "C|")
        return {Rational(2, 2), false};
    const std::string& m = *meter;
    auto slash = m.find('/');
    if (slash == std::string::npos)
        return {};
    std::int64_t num = 0, den = 0;
    try {
        std::size_t pos = 0;
        while (pos < slash) {
            std::size_t plus = m.find('+', pos);
            if (plus == std::string::npos || plus > slash)
                plus = slash;
            num += std::stoll(m.substr(pos, plus - pos));
            pos = plus + 1;
        }
        den = std::stoll(m.substr(slash + 1));
    } catch (...) {
        return {};
    }
    if (num <= 0 || den <= 0)
        return {};
    return {Rational(num, den), num % 3 == 0 && num > 3};
}

int default_tuplet_q(int p, bool compound) {
    switch (p) {
    case 2: case 4: case 8: return 3;
    case 3: case 6: return 2;
    default: return compound ? 3 : 2;
    }
}

struct BrokenState {
    int count = 0;
    bool left_longer = true;
    bool active = false;
};

struct TupletState {
    int remaining = 0;
    int actual = 0;
    int normal = 0;
    Rational factor{1};
};

Rational pow2(int k) { return Rational(std::int64_t(1) << k, 1); }

} // namespace

std::vector<ResolvedVoice> resolve_events(const Score& score, DiagnosticList* diags) {
    auto note = [&](const char* msg) {
        if (diags)
            warn(*diags, msg);
    };

    std::vector<ResolvedVoice> out;
    for (const auto& voice : score.voices) {
        ResolvedVoice rv;
        rv.id = voice.id;

        Rational unit = score.unit_note_length();
        MeterInfo meter = meter_info(score.meter_text());

        BrokenState broken;
        TupletState tuplet;
        std::vector<std::string> pend_decorations;
        std::vector<std::string> pend_annotations;
        int pend_slur_starts = 0;
        bool pend_overlay = false;

        for (const auto& measure : voice.measures) {
            ResolvedMeasure rm;
            rm.right = measure.right;
            std::int64_t expand_rest = 0;   // extra whole-measure rest bars
            std::ptrdiff_t prev_idx = -1;   // last timed note in rm.notes

            auto finish_timed = [&](ResolvedNote&& n) {
                if (tuplet.remaining > 0 && !n.grace) {
                    n.duration *= tuplet.factor;
                    n.tuplet_actual = tuplet.actual;
                    n.tuplet_normal = tuplet.normal;
                    --tuplet.remaining;
                }
                if (broken.active && !n.grace) {
                    Rational half = Rational(1) / pow2(broken.count);
                    Rational dotted = Rational(2) - half;
                    if (prev_idx >= 0) {
                        rm.notes[std::size_t(prev_idx)].duration *=
                            broken.left_longer ? dotted : half;
                        n.duration *= broken.left_longer ? half : dotted;
                    } else {
                        note("broken rhythm without a note on its left");
                    }
                    broken.active = false;
                }
                n.decorations = std::move(pend_decorations);
                n.annotations = std::move(pend_annotations);
                pend_decorations.clear();
                pend_annotations.clear();
                n.slur_starts = pend_slur_starts;
                pend_slur_starts = 0;
                n.overlay_before = pend_overlay;
                pend_overlay = false;
                bool grace = n.grace;
                rm.notes.push_back(std::move(n));
                if (!grace)
                    prev_idx = std::ptrdiff_t(rm.notes.size()) - 1;
            };

            for (const auto& ev : measure.events) {
                if (const auto* n = std::get_if<Note>(&ev)) {
                    ResolvedNote r;
                    r.heads = n->heads;
                    Rational len = n->heads.at(0).length;
                    if (n->chord)
                        len *= n->multiplier;
                    r.duration = unit * len;
                    r.tie = n->tie;
                    finish_timed(std::move(r));
                } else if (const auto* rest = std::get_if<Rest>(&ev)) {
                    ResolvedNote r;
                    r.rest = true;
                    r.visible = rest->visible;
                    if (rest->multi_measure) {
                        Rational full = meter.fraction.value_or(Rational(4, 4));
                        if (!meter.fraction)
                            note("whole-measure rest without a meter, assuming 4/4");
                        r.duration = full;
                        std::int64_t count = rest->length.numerator();
                        if (count > 1)
                            expand_rest += count - 1;
                    } else {
                        r.duration = unit * rest->length;
                    }
                    finish_timed(std::move(r));
                } else if (const auto* g = std::get_if<Grace>(&ev)) {
                    ResolvedNote r;
                    r.grace = true;
                    r.heads = g->heads;
                    finish_timed(std::move(r));
                } else if (const auto* t = std::get_if<Tuplet>(&ev)) {
                    if (t->p <= 0) {
                        note("tuplet with zero notes ignored");
                        continue;
                    }
                    tuplet.actual = t->p;
                    tuplet.normal = t->q > 0 ? t->q : default_tuplet_q(t->p, meter.compound);
                    tuplet.remaining = t->r > 0 ? t->r : t->p;
                    tuplet.factor = Rational(tuplet.normal, tuplet.actual);
                } else if (const auto* b = std::get_if<Broken>(&ev)) {
                    if (b->count > 8) {
                        note("broken rhythm deeper than 8 ignored");
                        continue;
                    }
                    broken = BrokenState{b->count, b->left_longer, true};
                } else if (const auto* f = std::get_if<InlineField>(&ev)) {
                    std::string val = trimmed(f->value);
                    if (f->key == "K") {
                        rm.key_change = val;
                    } else if (f->key == "M") {
                        rm.meter_change = val;
                        meter = meter_info(val.empty() ? std::nullopt
                                                       : std::optional<std::string>(val));
                    } else if (f->key == "L") {
                        if (auto r = parse_fraction(val))
                            unit = *r;
                        else
                            note("unreadable L: field ignored");
                    }
                } else if (const auto* d = std::get_if<Decoration>(&ev)) {
                    pend_decorations.push_back(d->name);
                } else if (const auto* a = std::get_if<Annotation>(&ev)) {
                    pend_annotations.push_back(a->text);
                } else if (const auto* s = std::get_if<Slur>(&ev)) {
                    if (s->open) {
                        ++pend_slur_starts;
                    } else if (prev_idx >= 0) {
                        ++rm.notes[std::size_t(prev_idx)].slur_stops;
                    } else {
                        note("slur close before any note in the measure ignored");
                    }
                } else if (std::holds_alternative<Overlay>(ev)) {
                    pend_overlay = true;
                }
                // Space, Opaque and TextPlaceholder carry no musical time.
            }

            // "Z3" becomes three whole-measure rest bars; the written barline
            // and field changes land on the last one.
            if (expand_rest > 0 && rm.notes.size() != 1) {
                note("multi-measure rest mixed with other events kept as one bar");
                expand_rest = 0;
            }
            for (std::int64_t i = 0; i < expand_rest; ++i) {
                ResolvedMeasure blank;
                blank.notes = rm.notes;
                rv.measures.push_back(std::move(blank));
            }
            rv.measures.push_back(std::move(rm));
        }

        if (pend_slur_starts > 0 || !pend_decorations.empty())
            note("dangling decorations or slur opens at the end of a voice");
        out.push_back(std::move(rv));
    }
    return out;
}

} // namespace omrkit::abc
