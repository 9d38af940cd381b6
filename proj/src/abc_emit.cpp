#include "omrkit/abc.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace omrkit::abc {

namespace {

// Shortest spelling of a duration multiplier: "" for 1, "3" for 3, "/" for
// 1/2, "/4" for 1/4, "3/8" otherwise.
std::string duration_text(const Rational& r) {
    if (r == Rational(1))
        return "";
    if (r.denominator() == 1)
        return std::to_string(r.numerator());
    if (r == Rational(1, 2))
        return "/";
    if (r.numerator() == 1)
        return "/" + std::to_string(r.denominator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

std::string head_text(const NoteHead& h) {
    std::string out;
    if (h.pitch.accidental) {
        int acc = *h.pitch.accidental;
        if (acc == 0)
            out += '=';
        else
            out.append(std::size_t(acc > 0 ? acc : -acc), acc > 0 ? '^' : '_');
    }
    if (h.pitch.octave >= 1) {
        out += char(h.pitch.step - 'A' + 'a');
        out.append(std::size_t(h.pitch.octave - 1), '\'');
    } else {
        out += h.pitch.step;
        out.append(std::size_t(-h.pitch.octave), ',');
    }
    out += duration_text(h.length);
    if (h.tie)
        out += '-';
    return out;
}

std::string rest_text(const Rest& r) {
    std::string out;
    if (r.multi_measure) {
        out += r.visible ? 'Z' : 'X';
        if (r.length != Rational(1))
            out += std::to_string(r.length.numerator());
    } else {
        out += r.visible ? 'z' : 'x';
        out += duration_text(r.length);
    }
    return out;
}

struct EventText {
    std::string operator()(const Note& n) const {
        std::string out;
        if (n.chord) {
            out += '[';
            for (const auto& h : n.heads)
                out += head_text(h);
            out += ']';
            out += duration_text(n.multiplier);
        } else {
            out += head_text(n.heads.at(0));
        }
        if (n.tie)
            out += '-';
        return out;
    }
    std::string operator()(const Rest& r) const { return rest_text(r); }
    std::string operator()(const Tuplet& t) const { return t.src; }
    std::string operator()(const Grace& g) const {
        std::string out = "{";
        if (g.acciaccatura)
            out += '/';
        for (const auto& h : g.heads)
            out += head_text(h);
        out += '}';
        return out;
    }
    std::string operator()(const Broken& b) const {
        return std::string(std::size_t(b.count), b.left_longer ? '>' : '<');
    }
    std::string operator()(const Decoration& d) const {
        return d.bang ? "!" + d.name + "!" : d.name;
    }
    std::string operator()(const InlineField& f) const {
        if (f.own_line)
            return f.key + ":" + f.value + "\n";
        return "[" + f.key + ":" + f.value + "]";
    }
    std::string operator()(const Slur& s) const { return s.open ? "(" : ")"; }
    std::string operator()(const Annotation& a) const { return "\"" + a.text + "\""; }
    std::string operator()(const TextPlaceholder&) const { return "<|text|>"; }
    std::string operator()(const Overlay&) const { return "&"; }
    std::string operator()(const Space& s) const { return s.text; }
    std::string operator()(const Opaque& o) const { return o.text; }
};

void render_measure(const Measure& m, std::string& out) {
    out += barline_text(m.left);
    for (const auto& ev : m.events)
        out += std::visit(EventText{}, ev);
    out += barline_text(m.right);
    if (m.explicit_linebreak)
        out += '$';
}

void render_headers(const Score& score, std::string& out) {
    for (const auto& h : score.headers) {
        if (h.directive)
            out += "%%" + h.key + h.value;
        else if (h.key == "%")
            out += "%" + h.value;
        else if (h.key.empty())
            out += h.value;
        else
            out += h.key + ":" + h.value;
        out += '\n';
    }
}

// Canonical multi-voice layout: voice declarations up front, then the
// voices' line groups interleaved, each line tagged "[V:id]".
std::string emit_interleaved(const Score& score) {
    std::string out;
    render_headers(score, out);
    for (const auto& v : score.voices)
        out += "V:" + (v.body_label ? *v.body_label : v.id) + "\n";

    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> groups(score.voices.size());
    std::size_t max_groups = 0;
    for (std::size_t vi = 0; vi < score.voices.size(); ++vi) {
        const auto& ms = score.voices[vi].measures;
        std::size_t begin = 0;
        for (std::size_t i = 0; i < ms.size(); ++i) {
            if (ms[i].line_break_after || i + 1 == ms.size()) {
                groups[vi].push_back({begin, i + 1});
                begin = i + 1;
            }
        }
        max_groups = std::max(max_groups, groups[vi].size());
    }

    for (std::size_t g = 0; g < max_groups; ++g) {
        for (std::size_t vi = 0; vi < score.voices.size(); ++vi) {
            if (g >= groups[vi].size())
                continue;
            const auto& [b, e] = groups[vi][g];
            const auto& ms = score.voices[vi].measures;
            out += "[V:" + score.voices[vi].id + "]";
            for (std::size_t i = b; i < e; ++i)
                render_measure(ms[i], out);
            if (ms[e - 1].line_comment)
                out += "%" + *ms[e - 1].line_comment;
            out += '\n';
            for (std::size_t i = b; i < e; ++i) {
                for (const auto& w : ms[i].lyrics)
                    out += "w:" + w + "\n";
                for (const auto& p : ms[i].post_lines)
                    out += p + "\n";
            }
        }
    }
    out += score.trailing;
    return out;
}

} // namespace

std::string barline_text(const Barline& bar) {
    std::string out;
    switch (bar.kind) {
    case BarKind::none: return bar.volta.empty() ? "" : "[" + bar.volta;
    case BarKind::plain: out = "|"; break;
    case BarKind::double_bar: out = "||"; break;
    case BarKind::end: out = "|]"; break;
    case BarKind::begin: out = "[|"; break;
    case BarKind::repeat_begin: out = "|:"; break;
    case BarKind::repeat_end: out = ":|"; break;
    case BarKind::repeat_both: out = "::"; break;
    }
    return out + bar.volta;
}

std::string emit_abc(const Score& score) {
    if (score.dialect == Dialect::canonical && score.voices.size() > 1)
        return emit_interleaved(score);

    std::string out;
    render_headers(score, out);

    for (std::size_t vi = 0; vi < score.voices.size(); ++vi) {
        const Voice& v = score.voices[vi];
        if (vi > 0 && !out.empty() && out.back() != '\n')
            out += '\n'; // a V: line must start its own line
        if (v.body_label)
            out += "V:" + *v.body_label + "\n";
        else if (vi > 0)
            out += "V:" + v.id + "\n";
        for (const auto& m : v.measures) {
            render_measure(m, out);
            if (m.line_comment)
                out += "%" + *m.line_comment;
            if (m.line_break_after)
                out += '\n';
            for (const auto& w : m.lyrics)
                out += "w:" + w + "\n";
            for (const auto& p : m.post_lines)
                out += p + "\n";
        }
    }

    out += score.trailing;
    return out;
}

} // namespace omrkit::abc
