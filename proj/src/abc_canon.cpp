#include "omrkit/canon.hpp"

#include <stdexcept>
#include <string>

#include "omrkit/error.hpp"

namespace omrkit::abc {

namespace {

// Largest numerator/denominator the duration lexer reads back.
constexpr std::int64_t kMaxDurationPart = 999'999'999;

void validate(const CanonConfig& cfg) {
    if (cfg.bars_per_line < 1)
        throw std::invalid_argument("bars_per_line must be at least 1");
    const Rational& u = cfg.unit_note;
    bool ok = u.numerator() == 1;
    switch (u.denominator()) {
    case 1: case 2: case 4: case 8: case 16: case 32: case 64: break;
    default: ok = false;
    }
    if (!ok)
        throw std::invalid_argument("unit_note must be 1/1 .. 1/64");
}

Rational rescale(const Rational& r, const Rational& factor) {
    __int128 num = __int128(r.numerator()) * factor.numerator();
    __int128 den = __int128(r.denominator()) * factor.denominator();
    if (num <= 0 || den <= 0)
        throw Error(ErrorCode::NonRepresentableDuration, "non-positive duration after rescale");
    __int128 a = num, b = den;
    while (b != 0) {
        __int128 t = a % b;
        a = b;
        b = t;
    }
    num /= a;
    den /= a;
    if (num > kMaxDurationPart || den > kMaxDurationPart)
        throw Error(ErrorCode::NonRepresentableDuration,
                    "duration does not fit ABC syntax after rescale");
    return Rational(std::int64_t(num), std::int64_t(den));
}

std::string trimmed(const std::string& s) {
    auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos)
        return "";
    auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

// Replace the content of every double-quoted span.
std::string mask_quoted(const std::string& s, const std::string& token) {
    std::string out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t open = s.find('"', pos);
        if (open == std::string::npos) {
            out += s.substr(pos);
            break;
        }
        std::size_t close = s.find('"', open + 1);
        if (close == std::string::npos) {
            out += s.substr(pos);
            break;
        }
        out += s.substr(pos, open - pos + 1);
        out += token;
        out += '"';
        pos = close + 1;
    }
    return out;
}

} // namespace

Score canonicalize(const Score& in, const CanonConfig& cfg) {
    validate(cfg);
    Score out;
    out.dialect = Dialect::canonical;

    // Headers: one L: pinned to the canonical unit.
    bool saw_l = false;
    for (const auto& h : in.headers) {
        if (!h.directive && h.key == "L") {
            if (!saw_l) {
                out.headers.push_back({"L", to_string(cfg.unit_note), false});
                saw_l = true;
            }
            continue; // duplicate L: headers collapse into the first
        }
        out.headers.push_back(h);
    }
    if (!saw_l) {
        std::size_t at = out.headers.size();
        for (std::size_t i = 0; i < out.headers.size(); ++i)
            if (!out.headers[i].directive && out.headers[i].key == "K") {
                at = i;
                break;
            }
        out.headers.insert(out.headers.begin() + std::ptrdiff_t(at),
                           {"L", to_string(cfg.unit_note), false});
    }

    for (const auto& voice : in.voices) {
        Voice nv;
        nv.id = voice.id;
        nv.body_label = voice.body_label;

        Rational unit = in.unit_note_length();
        Rational factor = unit / cfg.unit_note;

        for (const auto& m : voice.measures) {
            Measure nm;
            nm.left = m.left;
            nm.right = m.right;
            nm.explicit_linebreak = m.explicit_linebreak;
            nm.lyrics = m.lyrics;
            nm.post_lines = m.post_lines;
            for (const auto& ev : m.events) {
                if (const auto* n = std::get_if<Note>(&ev)) {
                    Note nn = *n;
                    for (auto& h : nn.heads)
                        h.length = rescale(h.length, factor);
                    nm.events.push_back(std::move(nn));
                } else if (const auto* r = std::get_if<Rest>(&ev)) {
                    Rest nr = *r;
                    if (!nr.multi_measure)
                        nr.length = rescale(nr.length, factor);
                    nm.events.push_back(std::move(nr));
                } else if (const auto* g = std::get_if<Grace>(&ev)) {
                    Grace ng = *g;
                    for (auto& h : ng.heads)
                        h.length = rescale(h.length, factor);
                    nm.events.push_back(std::move(ng));
                } else if (const auto* f = std::get_if<InlineField>(&ev)) {
                    if (f->key == "L") {
                        if (auto u = parse_fraction(trimmed(f->value))) {
                            unit = *u;
                            factor = unit / cfg.unit_note;
                        } else {
                            warn(out.diagnostics, "unreadable inline L: dropped");
                        }
                        continue; // the canonical unit is global
                    }
                    InlineField nf = *f;
                    nf.own_line = false; // keep the 5-bar line discipline
                    nm.events.push_back(std::move(nf));
                } else if (const auto* sp = std::get_if<Space>(&ev)) {
                    if (sp->text.find('\n') != std::string::npos)
                        nm.events.push_back(Space{" "});
                    else
                        nm.events.push_back(*sp);
                } else if (const auto* op = std::get_if<Opaque>(&ev)) {
                    if (op->text.find('\n') != std::string::npos)
                        warn(out.diagnostics, "mid-measure comment dropped");
                    else
                        nm.events.push_back(*op);
                } else {
                    nm.events.push_back(ev);
                }
            }
            nv.measures.push_back(std::move(nm));
        }

        // Re-line: a break and a running measure total every bars_per_line
        // measures, and on the final measure.
        const std::size_t n = nv.measures.size();
        const std::size_t per = std::size_t(cfg.bars_per_line);
        for (std::size_t i = 0; i < n; ++i) {
            bool line_end = ((i + 1) % per == 0) || (i + 1 == n);
            nv.measures[i].line_break_after = line_end;
            if (line_end)
                nv.measures[i].line_comment = std::to_string(i + 1);
            else
                nv.measures[i].line_comment.reset();
        }
        // Lyrics and comment lines move to the measure that ends their line,
        // where the emitter can place them after the break.
        std::vector<std::string> lyr, post;
        for (std::size_t i = 0; i < n; ++i) {
            Measure& m = nv.measures[i];
            for (auto& w : m.lyrics)
                lyr.push_back(std::move(w));
            m.lyrics.clear();
            for (auto& p : m.post_lines)
                post.push_back(std::move(p));
            m.post_lines.clear();
            if (m.line_break_after) {
                m.lyrics = std::move(lyr);
                m.post_lines = std::move(post);
                lyr.clear();
                post.clear();
            }
        }
        out.voices.push_back(std::move(nv));
    }

    if (in.trailing.find_first_not_of(" \t\n") != std::string::npos)
        warn(out.diagnostics, "content after the first tune dropped");
    return out;
}

Score mask_text(const Score& in, const CanonConfig& cfg) {
    const std::string& token = cfg.text_token;
    Score out = in;
    for (auto& h : out.headers) {
        if (h.directive)
            continue;
        if (h.key == "T" || h.key == "C" || h.key == "w" || h.key == "W")
            h.value = token;
        else if (h.key == "V")
            h.value = mask_quoted(h.value, token);
    }
    for (auto& v : out.voices) {
        if (v.body_label)
            v.body_label = mask_quoted(*v.body_label, token);
        for (auto& m : v.measures) {
            for (auto& w : m.lyrics)
                w = token;
            for (auto& ev : m.events) {
                if (auto* a = std::get_if<Annotation>(&ev)) {
                    a->text = token;
                } else if (auto* f = std::get_if<InlineField>(&ev)) {
                    if (f->key == "T" || f->key == "C" || f->key == "w" || f->key == "W")
                        f->value = token;
                }
            }
        }
    }
    return out;
}

} // namespace omrkit::abc
