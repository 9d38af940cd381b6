#include "omrkit/abc.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <map>

#include "omrkit/error.hpp"

namespace omrkit::abc {

namespace {

bool is_note_letter(char c) {
    return (c >= 'A' && c <= 'G') || (c >= 'a' && c <= 'g');
}

bool is_field_line(const std::string& line) {
    return line.size() >= 2 && line[1] == ':' &&
           std::isalpha(static_cast<unsigned char>(line[0]));
}

std::string normalize_newlines(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\r') {
            if (i + 1 < text.size() && text[i + 1] == '\n')
                continue;
            out.push_back('\n');
        } else {
            out.push_back(text[i]);
        }
    }
    return out;
}

// Shorthand decoration characters of ABC 2.1.
bool is_shorthand_decoration(char c) {
    switch (c) {
    case '.': case '~': case 'H': case 'L': case 'M': case 'O':
    case 'P': case 'S': case 'T': case 'u': case 'v':
        return true;
    default:
        return false;
    }
}

struct Lexer {
    const std::string& line;
    std::size_t pos = 0;
    int line_no;

    explicit Lexer(const std::string& l, int no) : line(l), line_no(no) {}

    bool eof() const { return pos >= line.size(); }
    char peek(std::size_t ahead = 0) const {
        return pos + ahead < line.size() ? line[pos + ahead] : '\0';
    }
    bool starts_with(const char* s) const { return line.compare(pos, std::strlen(s), s) == 0; }
};

class Parser {
public:
    explicit Parser(const std::string& raw) : text_(normalize_newlines(raw)) {}

    Score run() {
        split_lines();
        parse_headers();
        parse_body();
        finish();
        return std::move(score_);
    }

private:
    std::string text_;
    std::vector<std::string> lines_;
    std::size_t line_idx_ = 0;
    Score score_;

    // Per-voice parse state: the measure being accumulated.
    struct VoiceState {
        std::size_t voice_index;
        Measure pending;
        bool pending_used = false; // pending has events or an explicit left barline
        int slur_depth = 0;
    };
    std::map<std::string, VoiceState> voice_states_;
    std::string current_voice_ = "1";
    bool body_started_ = false;

    void split_lines() {
        std::string cur;
        for (char c : text_) {
            if (c == '\n') {
                lines_.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        lines_.push_back(cur); // final segment; empty when text ends with '\n'
        final_newline_ = !text_.empty() && text_.back() == '\n';
    }
    bool final_newline_ = false;

    bool at_final_empty_segment() const {
        return line_idx_ + 1 == lines_.size() && final_newline_;
    }

    void parse_headers() {
        bool saw_x = false, saw_k = false;
        bool first_content_line = true;
        while (line_idx_ < lines_.size() && !at_final_empty_segment()) {
            const std::string& line = lines_[line_idx_];
            if (line.empty()) {
                if (score_.headers.empty()) { // leading blank lines
                    ++line_idx_;
                    continue;
                }
                warn(score_.diagnostics, "blank line inside tune header", int(line_idx_ + 1));
                score_.headers.push_back({"", "", false});
                ++line_idx_;
                continue;
            }
            if (line.rfind("%%", 0) == 0) {
                std::size_t name_end = 2;
                while (name_end < line.size() &&
                       !std::isspace(static_cast<unsigned char>(line[name_end])))
                    ++name_end;
                score_.headers.push_back(
                    {line.substr(2, name_end - 2), line.substr(name_end), true});
                ++line_idx_;
                continue;
            }
            if (line[0] == '%') {
                score_.headers.push_back({"%", line.substr(1), false});
                ++line_idx_;
                continue;
            }
            if (is_field_line(line)) {
                std::string key(1, line[0]);
                std::string value = line.substr(2);
                if (key == "X") {
                    if (saw_x)
                        warn(score_.diagnostics, "duplicate X: header", int(line_idx_ + 1));
                    else if (!first_content_line)
                        warn(score_.diagnostics, "X: is not the first header", int(line_idx_ + 1));
                    saw_x = true;
                }
                score_.headers.push_back({key, value, false});
                first_content_line = false;
                ++line_idx_;
                if (key == "K") {
                    saw_k = true;
                    break; // K: ends the header; body follows
                }
                continue;
            }
            warn(score_.diagnostics, "unrecognized header line kept verbatim",
                 int(line_idx_ + 1));
            score_.headers.push_back({"", line, false});
            first_content_line = false;
            ++line_idx_;
        }
        if (!saw_x)
            throw Error(ErrorCode::MalformedHeader, "missing X: header");
        if (!saw_k)
            throw Error(ErrorCode::MalformedHeader, "missing K: header");
    }

    VoiceState& state() {
        auto it = voice_states_.find(current_voice_);
        if (it != voice_states_.end())
            return it->second;
        VoiceState st;
        st.voice_index = score_.voices.size();
        score_.voices.push_back(Voice{current_voice_, std::nullopt, {}});
        return voice_states_.emplace(current_voice_, std::move(st)).first->second;
    }

    Voice& voice() { return score_.voices[state().voice_index]; }

    bool header_declares_voice(const std::string& id) const {
        for (const auto& h : score_.headers) {
            if (h.key != "V")
                continue;
            std::string v = h.value;
            std::size_t a = v.find_first_not_of(" \t");
            if (a == std::string::npos)
                continue;
            std::size_t b = v.find_first_of(" \t", a);
            if (v.substr(a, b == std::string::npos ? b : b - a) == id)
                return true;
        }
        return false;
    }

    void switch_voice(const std::string& value, int line_no) {
        std::size_t a = value.find_first_not_of(" \t");
        if (a == std::string::npos) {
            warn(score_.diagnostics, "V: line without a voice id", line_no);
            return;
        }
        std::size_t b = value.find_first_of(" \t", a);
        std::string id = value.substr(a, b == std::string::npos ? b : b - a);
        bool existed = voice_states_.count(id) > 0;
        current_voice_ = id;
        VoiceState& st = state();
        if (!existed) {
            score_.voices[st.voice_index].body_label = value;
            if (!header_declares_voice(id) && id != "1")
                warn(score_.diagnostics, "voice '" + id + "' used without V: declaration",
                     line_no);
        }
    }

    Measure* last_closed_measure() {
        Voice& v = voice();
        return v.measures.empty() ? nullptr : &v.measures.back();
    }

    void close_measure(VoiceState& st, const Barline& bar) {
        st.pending.right = bar;
        voice().measures.push_back(std::move(st.pending));
        st.pending = Measure{};
        st.pending_used = false;
    }

    // ---- body ----

    void parse_body() {
        body_started_ = true;
        while (line_idx_ < lines_.size() && !at_final_empty_segment()) {
            const std::string& line = lines_[line_idx_];
            int line_no = int(line_idx_ + 1);
            if (line.empty()) {
                // Blank line ends the tune; everything after is kept verbatim.
                capture_trailing();
                return;
            }
            if (line.rfind("X:", 0) == 0 && tune_has_music()) {
                capture_trailing();
                return;
            }
            if (is_field_line(line)) {
                char key = line[0];
                std::string value = line.substr(2);
                if (key == 'V') {
                    switch_voice(value, line_no);
                    ++line_idx_;
                    continue;
                }
                if (key == 'w' || key == 'W') {
                    attach_lyric(value);
                    ++line_idx_;
                    continue;
                }
                // Other body fields (K:, M:, L:, Q:, ...) act at this point in
                // the event stream.
                VoiceState& st = state();
                st.pending.events.push_back(InlineField{std::string(1, key), value, true});
                st.pending_used = true;
                ++line_idx_;
                continue;
            }
            if (line[0] == '%') {
                attach_comment_line(line);
                ++line_idx_;
                continue;
            }
            parse_music_line(line, line_no);
            ++line_idx_;
        }
    }

    bool tune_has_music() const {
        for (const auto& v : score_.voices)
            if (!v.measures.empty())
                return true;
        for (const auto& [id, st] : voice_states_)
            if (st.pending_used)
                return true;
        return false;
    }

    void capture_trailing() {
        std::string rest;
        for (std::size_t i = line_idx_; i < lines_.size(); ++i) {
            if (at_final_empty_segment_index(i))
                break;
            rest += lines_[i];
            rest.push_back('\n');
        }
        if (!rest.empty() && !final_newline_)
            rest.pop_back();
        score_.trailing = rest;
        if (rest.find_first_not_of(" \t\n") != std::string::npos)
            warn(score_.diagnostics, "content after first tune kept as opaque trailing text",
                 int(line_idx_ + 1));
        line_idx_ = lines_.size();
    }

    bool at_final_empty_segment_index(std::size_t i) const {
        return i + 1 == lines_.size() && final_newline_;
    }

    void attach_lyric(const std::string& value) {
        VoiceState& st = state();
        if (st.pending_used) {
            st.pending.lyrics.push_back(value);
        } else if (Measure* m = last_closed_measure()) {
            m->lyrics.push_back(value);
        } else {
            warn(score_.diagnostics, "w: line before any music", int(line_idx_ + 1));
            score_.headers.push_back({"%", " w:" + value, false});
        }
    }

    void attach_comment_line(const std::string& line) {
        VoiceState& st = state();
        if (!st.pending_used && last_closed_measure()) {
            last_closed_measure()->post_lines.push_back(line);
        } else if (st.pending_used) {
            st.pending.events.push_back(Opaque{line + "\n"});
        } else {
            score_.headers.push_back({"%", line.substr(1), false});
        }
    }

    // ---- music line lexing ----

    void parse_music_line(const std::string& line, int line_no) {
        Lexer lx(line, line_no);
        bool closed_this_line = false;

        // The current voice can change mid-line via [V:...], so the state is
        // always re-fetched.
        auto push_event = [&](Event ev) {
            VoiceState& st = state();
            st.pending.events.push_back(std::move(ev));
            st.pending_used = true;
        };

        while (!lx.eof()) {
            char c = lx.peek();

            // Trailing comment: belongs to the line, not the music.
            if (c == '%') {
                std::string comment = lx.line.substr(lx.pos + 1);
                lx.pos = lx.line.size();
                if (!state().pending_used && last_closed_measure()) {
                    last_closed_measure()->line_comment = comment;
                } else {
                    push_event(Opaque{"%" + comment + "\n"});
                    // The opaque text carries its own newline.
                    end_of_line_handled_ = true;
                }
                break;
            }

            if (c == ' ' || c == '\t') {
                std::size_t start = lx.pos;
                while (!lx.eof() && (lx.peek() == ' ' || lx.peek() == '\t'))
                    ++lx.pos;
                push_event(Space{lx.line.substr(start, lx.pos - start)});
                continue;
            }

            if (Barline bar; lex_barline(lx, bar)) {
                VoiceState& st = state();
                if (!st.pending_used) {
                    if (st.pending.left.kind == BarKind::none && st.pending.left.volta.empty()) {
                        st.pending.left = bar;
                        st.pending_used = true;
                    } else {
                        // Two leading barlines in a row: degenerate empty measure.
                        close_measure(st, bar);
                        closed_this_line = true;
                    }
                } else {
                    close_measure(st, bar);
                    closed_this_line = true;
                }
                continue;
            }

            if (c == '$') {
                ++lx.pos;
                if (!state().pending_used && last_closed_measure()) {
                    last_closed_measure()->explicit_linebreak = true;
                } else {
                    push_event(Opaque{"$"});
                    warn(score_.diagnostics, "'$' away from a barline kept verbatim", line_no);
                }
                continue;
            }

            if (lx.starts_with("<|text|>")) {
                lx.pos += 8;
                push_event(TextPlaceholder{});
                continue;
            }

            if (c == '>' || c == '<') {
                int count = 0;
                char which = c;
                while (lx.peek() == which) {
                    ++count;
                    ++lx.pos;
                }
                push_event(Broken{count, which == '>'});
                continue;
            }

            if (c == '(') {
                if (std::isdigit(static_cast<unsigned char>(lx.peek(1)))) {
                    push_event(lex_tuplet(lx));
                } else {
                    ++lx.pos;
                    ++state().slur_depth;
                    push_event(Slur{true});
                }
                continue;
            }
            if (c == ')') {
                ++lx.pos;
                if (--state().slur_depth < 0)
                    throw Error(ErrorCode::UnbalancedBrackets,
                                "')' without matching '(' on line " + std::to_string(line_no));
                push_event(Slur{false});
                continue;
            }

            if (c == '&') {
                ++lx.pos;
                push_event(Overlay{});
                continue;
            }

            if (c == '"') {
                std::size_t end = lx.line.find('"', lx.pos + 1);
                if (end == std::string::npos) {
                    warn(score_.diagnostics, "unterminated annotation string", line_no);
                    push_event(Opaque{lx.line.substr(lx.pos)});
                    lx.pos = lx.line.size();
                } else {
                    push_event(Annotation{lx.line.substr(lx.pos + 1, end - lx.pos - 1)});
                    lx.pos = end + 1;
                }
                continue;
            }

            if (c == '!') {
                std::size_t end = lx.line.find('!', lx.pos + 1);
                if (end == std::string::npos) {
                    warn(score_.diagnostics, "unterminated !decoration!", line_no);
                    push_event(Opaque{lx.line.substr(lx.pos)});
                    lx.pos = lx.line.size();
                } else {
                    push_event(Decoration{lx.line.substr(lx.pos + 1, end - lx.pos - 1), true});
                    lx.pos = end + 1;
                }
                continue;
            }

            if (c == '{') {
                if (Event g; lex_grace(lx, g)) {
                    push_event(std::move(g));
                } else {
                    warn(score_.diagnostics, "unterminated grace group", line_no);
                    push_event(Opaque{lx.line.substr(lx.pos)});
                    lx.pos = lx.line.size();
                }
                continue;
            }

            if (c == '[') {
                // "[|" was consumed by lex_barline; still open: inline field,
                // volta "[1", or chord.
                if (std::isalpha(static_cast<unsigned char>(lx.peek(1))) && lx.peek(2) == ':') {
                    lex_inline_field(lx, line_no);
                    continue;
                }
                if (std::isdigit(static_cast<unsigned char>(lx.peek(1)))) {
                    std::size_t p = lx.pos + 1;
                    std::string volta = lex_volta(lx, p);
                    lx.pos = p;
                    VoiceState& st = state();
                    Measure* prev = last_closed_measure();
                    if (!st.pending_used && prev && prev->right.volta.empty()) {
                        // "|[1" normalizes to a volta on the closing barline.
                        prev->right.volta = volta;
                    } else {
                        st.pending.left = Barline{BarKind::none, volta};
                        st.pending_used = true;
                    }
                    continue;
                }
                push_event(lex_chord(lx));
                continue;
            }

            if (c == ']') {
                throw Error(ErrorCode::UnbalancedBrackets,
                            "']' without matching '[' on line " + std::to_string(line_no));
            }

            if (is_note_letter(c) || c == '^' || c == '_' || c == '=') {
                Note n;
                NoteHead head;
                if (!lex_note_head(lx, head)) {
                    push_event(Opaque{std::string(1, c)});
                    warn(score_.diagnostics,
                         std::string("stray '") + c + "' kept verbatim", line_no);
                    ++lx.pos;
                    continue;
                }
                n.heads.push_back(head);
                n.tie = head.tie;
                n.heads[0].tie = false; // tie of a bare note lives on the Note
                push_event(std::move(n));
                continue;
            }

            if (c == 'z' || c == 'x' || c == 'Z' || c == 'X') {
                push_event(lex_rest(lx));
                continue;
            }

            if (c == '-') {
                ++lx.pos;
                if (auto& evs = state().pending.events; !evs.empty())
                    if (auto* note = std::get_if<Note>(&evs.back())) {
                        note->tie = true;
                        continue;
                    }
                warn(score_.diagnostics, "'-' without a preceding note", line_no);
                push_event(Opaque{"-"});
                continue;
            }

            if (is_shorthand_decoration(c)) {
                ++lx.pos;
                push_event(Decoration{std::string(1, c), false});
                continue;
            }

            if (c == '\\' && lx.pos + 1 == lx.line.size()) {
                // Line continuation: suppress the break entirely.
                ++lx.pos;
                end_of_line_handled_ = true;
                continue;
            }

            warn(score_.diagnostics, std::string("unsupported character '") + c +
                                         "' kept verbatim", line_no);
            push_event(Opaque{std::string(1, c)});
            ++lx.pos;
        }

        // End of the text line.
        if (end_of_line_handled_) {
            end_of_line_handled_ = false;
            return;
        }
        bool had_newline = line_idx_ + 1 < lines_.size();
        VoiceState& st = state();
        if (st.pending_used) {
            if (had_newline)
                st.pending.events.push_back(Space{"\n"});
        } else if (Measure* m = last_closed_measure()) {
            if (closed_this_line)
                m->line_break_after = had_newline;
            if (m->line_comment.has_value())
                m->line_break_after = true;
        }
    }

    bool end_of_line_handled_ = false;

    bool lex_barline(Lexer& lx, Barline& out) {
        const char c = lx.peek();
        BarKind kind = BarKind::none;
        std::size_t len = 0;
        if (c == '|') {
            if (lx.peek(1) == ']') { kind = BarKind::end; len = 2; }
            else if (lx.peek(1) == '|') { kind = BarKind::double_bar; len = 2; }
            else if (lx.peek(1) == ':') { kind = BarKind::repeat_begin; len = 2; }
            else { kind = BarKind::plain; len = 1; }
        } else if (c == ':') {
            if (lx.peek(1) == '|') {
                kind = BarKind::repeat_end;
                len = 2;
                if (lx.peek(2) == ']') len = 3; // ":|]" treated as repeat end
            } else if (lx.peek(1) == ':') {
                kind = BarKind::repeat_both;
                len = 2;
            } else {
                return false;
            }
        } else if (c == '[' && lx.peek(1) == '|') {
            kind = BarKind::begin;
            len = 2;
        } else {
            return false;
        }
        lx.pos += len;
        std::string volta;
        if (std::isdigit(static_cast<unsigned char>(lx.peek())))
            volta = lex_volta(lx, lx.pos);
        out = Barline{kind, volta};
        return true;
    }

    std::string lex_volta(Lexer& lx, std::size_t& p) {
        std::size_t start = p;
        while (p < lx.line.size() &&
               (std::isdigit(static_cast<unsigned char>(lx.line[p])) || lx.line[p] == ',' ||
                lx.line[p] == '-'))
            ++p;
        return lx.line.substr(start, p - start);
    }

    Event lex_tuplet(Lexer& lx) {
        std::size_t start = lx.pos;
        ++lx.pos; // '('
        auto read_num = [&]() -> int {
            int v = 0;
            while (std::isdigit(static_cast<unsigned char>(lx.peek()))) {
                v = v * 10 + (lx.peek() - '0');
                ++lx.pos;
            }
            return v;
        };
        Tuplet t;
        t.p = read_num();
        t.q = 0;
        t.r = 0;
        if (lx.peek() == ':') {
            ++lx.pos;
            t.q = read_num();
            if (lx.peek() == ':') {
                ++lx.pos;
                t.r = read_num();
            }
        }
        t.src = lx.line.substr(start, lx.pos - start);
        return t;
    }

    bool lex_grace(Lexer& lx, Event& out) {
        std::size_t save = lx.pos;
        ++lx.pos; // '{'
        Grace g;
        if (lx.peek() == '/') {
            g.acciaccatura = true;
            ++lx.pos;
        }
        while (!lx.eof() && lx.peek() != '}') {
            NoteHead head;
            if (!lex_note_head(lx, head)) {
                lx.pos = save;
                return false;
            }
            g.heads.push_back(head);
        }
        if (lx.eof()) {
            lx.pos = save;
            return false;
        }
        ++lx.pos; // '}'
        out = std::move(g);
        return true;
    }

    void lex_inline_field(Lexer& lx, int line_no) {
        std::size_t end = lx.line.find(']', lx.pos);
        if (end == std::string::npos)
            throw Error(ErrorCode::UnbalancedBrackets,
                        "unterminated inline field on line " + std::to_string(line_no));
        std::string key(1, lx.line[lx.pos + 1]);
        std::string value = lx.line.substr(lx.pos + 3, end - lx.pos - 3);
        lx.pos = end + 1;
        if (key == "V") {
            // A mid-line voice switch acts as a line break for the voice we
            // leave; emission writes every switch as its own V: line.
            if (auto it = voice_states_.find(current_voice_); it != voice_states_.end()) {
                VoiceState& old = it->second;
                if (old.pending_used) {
                    old.pending.events.push_back(Space{"\n"});
                } else {
                    auto& measures = score_.voices[old.voice_index].measures;
                    if (!measures.empty())
                        measures.back().line_break_after = true;
                }
            }
            switch_voice(value, line_no);
            return;
        }
        VoiceState& st = state();
        st.pending.events.push_back(InlineField{key, value, false});
        st.pending_used = true;
    }

    Event lex_chord(Lexer& lx) {
        std::size_t open_line = std::size_t(lx.line_no);
        ++lx.pos; // '['
        Note n;
        n.chord = true;
        while (!lx.eof() && lx.peek() != ']') {
            NoteHead head;
            if (!lex_note_head(lx, head))
                throw Error(ErrorCode::UnbalancedBrackets,
                            "bad chord content on line " + std::to_string(open_line));
            n.heads.push_back(head);
        }
        if (lx.eof())
            throw Error(ErrorCode::UnbalancedBrackets,
                        "unterminated chord on line " + std::to_string(open_line));
        ++lx.pos; // ']'
        if (n.heads.empty())
            throw Error(ErrorCode::UnbalancedBrackets,
                        "empty chord on line " + std::to_string(open_line));
        n.multiplier = lex_duration(lx);
        if (lx.peek() == '-') {
            ++lx.pos;
            n.tie = true;
        }
        return n;
    }

    Event lex_rest(Lexer& lx) {
        char c = lx.peek();
        ++lx.pos;
        Rest r;
        r.visible = (c == 'z' || c == 'Z');
        if (c == 'Z' || c == 'X') {
            r.multi_measure = true;
            std::int64_t count = 1;
            std::size_t start = lx.pos;
            while (std::isdigit(static_cast<unsigned char>(lx.peek())))
                ++lx.pos;
            if (lx.pos > start) {
                if (lx.pos - start > 9)
                    throw Error(ErrorCode::BadDuration,
                                "rest count too large on line " + std::to_string(lx.line_no));
                count = std::stoll(lx.line.substr(start, lx.pos - start));
                if (count == 0)
                    throw Error(ErrorCode::BadDuration,
                                "zero measure rest on line " + std::to_string(lx.line_no));
            }
            r.length = Rational(count, 1);
        } else {
            r.length = lex_duration(lx);
        }
        return r;
    }

    bool lex_note_head(Lexer& lx, NoteHead& out) {
        std::size_t save = lx.pos;
        Pitch p;
        int acc = 0;
        bool has_acc = false;
        while (true) {
            char c = lx.peek();
            if (c == '^') { ++acc; has_acc = true; ++lx.pos; }
            else if (c == '_') { --acc; has_acc = true; ++lx.pos; }
            else if (c == '=') { has_acc = true; ++lx.pos; }
            else break;
        }
        char letter = lx.peek();
        if (!is_note_letter(letter)) {
            lx.pos = save;
            return false;
        }
        ++lx.pos;
        if (letter >= 'a') {
            p.step = char(letter - 'a' + 'A');
            p.octave = 1;
        } else {
            p.step = letter;
            p.octave = 0;
        }
        while (true) {
            char c = lx.peek();
            if (c == '\'') { ++p.octave; ++lx.pos; }
            else if (c == ',') { --p.octave; ++lx.pos; }
            else break;
        }
        if (has_acc)
            p.accidental = acc;
        out.pitch = p;
        out.length = lex_duration(lx);
        out.tie = false;
        if (lx.peek() == '-') {
            ++lx.pos;
            out.tie = true;
        }
        return true;
    }

    // number? ('/' number?)* ; bare '/' divides by two.
    Rational lex_duration(Lexer& lx) {
        auto read_int = [&](std::int64_t& out) -> bool {
            std::size_t start = lx.pos;
            while (std::isdigit(static_cast<unsigned char>(lx.peek())))
                ++lx.pos;
            if (lx.pos == start)
                return false;
            if (lx.pos - start > 9)
                throw Error(ErrorCode::BadDuration,
                            "duration number too large on line " + std::to_string(lx.line_no));
            out = std::stoll(lx.line.substr(start, lx.pos - start));
            return true;
        };
        std::int64_t num = 1;
        bool have = read_int(num);
        if (have && num == 0)
            throw Error(ErrorCode::BadDuration,
                        "zero duration on line " + std::to_string(lx.line_no));
        Rational r(num, 1);
        while (lx.peek() == '/') {
            ++lx.pos;
            std::int64_t den = 0;
            if (read_int(den)) {
                if (den == 0)
                    throw Error(ErrorCode::BadDuration,
                                "zero denominator on line " + std::to_string(lx.line_no));
                r /= den;
            } else {
                r /= 2;
            }
        }
        return r;
    }

    void finish() {
        for (auto& [id, st] : voice_states_) {
            if (st.slur_depth != 0)
                throw Error(ErrorCode::UnbalancedBrackets,
                            "unclosed slur in voice '" + id + "'");
            if (st.pending_used) {
                warn(score_.diagnostics, "voice '" + id + "' ends without a barline");
                // Drop a trailing pure-whitespace tail instead of keeping a
                // phantom measure.
                bool only_space = true;
                for (const auto& ev : st.pending.events)
                    if (!std::holds_alternative<Space>(ev)) {
                        only_space = false;
                        break;
                    }
                if (!only_space || st.pending.left.kind != BarKind::none)
                    score_.voices[st.voice_index].measures.push_back(std::move(st.pending));
            }
        }
        // A tune that declared voices in headers but has an empty body still
        // yields no voices; that is fine here, downstream checks care.
        std::erase_if(score_.voices, [](const Voice& v) { return v.measures.empty(); });
    }
};

} // namespace

Score parse_abc(const std::string& text) {
    if (text.empty())
        throw Error(ErrorCode::MalformedHeader, "empty input");
    Parser parser(text);
    return parser.run();
}

const HeaderField* Score::find_header(const std::string& key) const {
    for (const auto& h : headers)
        if (!h.directive && h.key == key)
            return &h;
    return nullptr;
}

std::optional<std::string> Score::meter_text() const {
    const HeaderField* m = find_header("M");
    if (!m)
        return std::nullopt;
    std::string v = m->value;
    const auto a = v.find_first_not_of(" \t");
    if (a == std::string::npos)
        return std::nullopt;
    const auto b = v.find_last_not_of(" \t");
    return v.substr(a, b - a + 1);
}

Rational default_unit_length(const std::optional<std::string>& meter) {
    if (!meter || *meter == "none")
        return Rational(1, 8);
    std::string m = *meter;
    if (m == "C")
        return Rational(1, 8); // 4/4
    if (m == "C|")
        return Rational(1, 8); // 2/2
    auto slash = m.find('/');
    if (slash == std::string::npos)
        return Rational(1, 8);
    std::int64_t num = 0, den = 0;
    try {
        // numerators may be compound: "2+3/8"
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
        return Rational(1, 8);
    }
    if (num <= 0 || den <= 0)
        return Rational(1, 8);
    return Rational(num, den) < Rational(3, 4) ? Rational(1, 16) : Rational(1, 8);
}

Rational Score::unit_note_length() const {
    if (const HeaderField* l = find_header("L")) {
        std::string v = l->value;
        v.erase(std::remove_if(v.begin(), v.end(),
                               [](unsigned char c) { return std::isspace(c); }),
                v.end());
        if (auto r = parse_fraction(v))
            return *r;
    }
    return default_unit_length(meter_text());
}

std::size_t measure_count(const Score& score, DiagnosticList* diags) {
    std::size_t longest = 0, shortest = SIZE_MAX;
    for (const auto& v : score.voices) {
        longest = std::max(longest, v.measures.size());
        shortest = std::min(shortest, v.measures.size());
    }
    if (score.voices.empty())
        return 0;
    if (diags && shortest != longest)
        warn(*diags, "voices have unequal measure counts (" + std::to_string(shortest) +
                         " vs " + std::to_string(longest) + ")");
    return longest;
}

} // namespace omrkit::abc
