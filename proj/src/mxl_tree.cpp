#include "omrkit/mxl.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <string>

#include "omrkit/error.hpp"

namespace omrkit::mxl {

namespace {

struct XmlParser {
    const std::string& s;
    std::size_t pos = 0;

    explicit XmlParser(const std::string& text) : s(text) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw Error(ErrorCode::XmlSyntaxError, msg + " at byte " + std::to_string(pos));
    }

    bool eof() const { return pos >= s.size(); }
    char peek(std::size_t ahead = 0) const {
        return pos + ahead < s.size() ? s[pos + ahead] : '\0';
    }
    bool starts_with(std::string_view t) const { return s.compare(pos, t.size(), t) == 0; }
    void expect(char c) {
        if (peek() != c)
            fail(std::string("expected '") + c + "'");
        ++pos;
    }
    void skip_space() {
        while (!eof() && std::isspace(static_cast<unsigned char>(s[pos])))
            ++pos;
    }

    void skip_until(std::string_view end, const char* what) {
        std::size_t at = s.find(end, pos);
        if (at == std::string::npos)
            fail(std::string("unterminated ") + what);
        pos = at + end.size();
    }

    // <!DOCTYPE ...> with a possible [...] internal subset.
    void skip_doctype() {
        pos += 2; // "<!"
        int brackets = 0;
        while (!eof()) {
            char c = s[pos++];
            if (c == '[')
                ++brackets;
            else if (c == ']')
                --brackets;
            else if (c == '>' && brackets == 0)
                return;
        }
        fail("unterminated <!DOCTYPE");
    }

    // Misc allowed between elements: comments, PIs, DOCTYPE.
    // Returns false when something else starts.
    bool skip_misc() {
        skip_space();
        if (starts_with("<!--")) {
            pos += 4;
            skip_until("-->", "comment");
            return true;
        }
        if (starts_with("<?")) {
            pos += 2;
            skip_until("?>", "processing instruction");
            return true;
        }
        if (starts_with("<!DOCTYPE") || starts_with("<!doctype")) {
            skip_doctype();
            return true;
        }
        return false;
    }

    static bool name_start(char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':';
    }
    static bool name_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' ||
               c == '-' || c == '.';
    }

    std::string read_name() {
        if (!name_start(peek()))
            fail("expected a name");
        std::size_t start = pos;
        while (name_char(peek()))
            ++pos;
        return s.substr(start, pos - start);
    }

    std::string decode_entities(std::string_view raw) {
        std::string out;
        out.reserve(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] != '&') {
                out += raw[i];
                continue;
            }
            std::size_t semi = raw.find(';', i + 1);
            if (semi == std::string_view::npos || semi - i > 12)
                fail("bad entity reference");
            std::string_view name = raw.substr(i + 1, semi - i - 1);
            if (name == "amp") out += '&';
            else if (name == "lt") out += '<';
            else if (name == "gt") out += '>';
            else if (name == "quot") out += '"';
            else if (name == "apos") out += '\'';
            else if (!name.empty() && name[0] == '#') {
                long code = 0;
                try {
                    code = (name.size() > 1 && (name[1] == 'x' || name[1] == 'X'))
                               ? std::stol(std::string(name.substr(2)), nullptr, 16)
                               : std::stol(std::string(name.substr(1)));
                } catch (...) {
                    fail("bad character reference");
                }
                if (code <= 0 || code > 0x10FFFF)
                    fail("character reference out of range");
                // UTF-8 encode.
                unsigned cp = unsigned(code);
                if (cp < 0x80) {
                    out += char(cp);
                } else if (cp < 0x800) {
                    out += char(0xC0 | (cp >> 6));
                    out += char(0x80 | (cp & 0x3F));
                } else if (cp < 0x10000) {
                    out += char(0xE0 | (cp >> 12));
                    out += char(0x80 | ((cp >> 6) & 0x3F));
                    out += char(0x80 | (cp & 0x3F));
                } else {
                    out += char(0xF0 | (cp >> 18));
                    out += char(0x80 | ((cp >> 12) & 0x3F));
                    out += char(0x80 | ((cp >> 6) & 0x3F));
                    out += char(0x80 | (cp & 0x3F));
                }
            } else {
                fail("unknown entity '&" + std::string(name) + ";'");
            }
            i = semi;
        }
        return out;
    }

    std::string read_attr_value() {
        char quote = peek();
        if (quote != '"' && quote != '\'')
            fail("expected a quoted attribute value");
        ++pos;
        std::size_t start = pos;
        while (!eof() && s[pos] != quote)
            ++pos;
        if (eof())
            fail("unterminated attribute value");
        std::string value = decode_entities(std::string_view(s).substr(start, pos - start));
        ++pos;
        return value;
    }

    LabeledTree parse_element() {
        expect('<');
        std::string tag = read_name();
        std::map<std::string, std::string> attrs; // sorted by key
        while (true) {
            skip_space();
            if (peek() == '/' || peek() == '>')
                break;
            std::string key = read_name();
            skip_space();
            expect('=');
            skip_space();
            attrs[key] = read_attr_value();
        }

        LabeledTree node;
        node.label = tag;
        for (const auto& [k, v] : attrs)
            node.label += "@" + k + "=" + v;

        if (peek() == '/') {
            ++pos;
            expect('>');
            return node;
        }
        expect('>');

        std::string text;
        while (true) {
            if (eof())
                fail("unterminated <" + tag + ">");
            if (starts_with("</")) {
                pos += 2;
                std::string closing = read_name();
                if (closing != tag)
                    fail("mismatched </" + closing + "> for <" + tag + ">");
                skip_space();
                expect('>');
                break;
            }
            if (starts_with("<!--")) {
                pos += 4;
                skip_until("-->", "comment");
                continue;
            }
            if (starts_with("<![CDATA[")) {
                pos += 9;
                std::size_t end = s.find("]]>", pos);
                if (end == std::string::npos)
                    fail("unterminated CDATA");
                text += s.substr(pos, end - pos);
                pos = end + 3;
                continue;
            }
            if (starts_with("<?")) {
                pos += 2;
                skip_until("?>", "processing instruction");
                continue;
            }
            if (peek() == '<') {
                node.children.push_back(parse_element());
                continue;
            }
            std::size_t start = pos;
            while (!eof() && s[pos] != '<')
                ++pos;
            text += decode_entities(std::string_view(s).substr(start, pos - start));
        }

        // Fold direct text (trimmed) into the label; whitespace-only text is
        // layout, not content.
        std::size_t a = text.find_first_not_of(" \t\r\n");
        if (a != std::string::npos) {
            std::size_t b = text.find_last_not_of(" \t\r\n");
            node.label += "=" + text.substr(a, b - a + 1);
        }
        return node;
    }

    LabeledTree run() {
        if (starts_with("\xEF\xBB\xBF"))
            pos += 3;
        while (skip_misc()) {
        }
        skip_space();
        if (peek() != '<')
            fail("expected a root element");
        LabeledTree root = parse_element();
        while (skip_misc()) {
        }
        skip_space();
        if (!eof())
            fail("trailing content after the root element");
        return root;
    }
};

void flatten_into(const LabeledTree& t, std::string& out) {
    out += t.label;
    for (const auto& c : t.children) {
        out += '/';
        flatten_into(c, out);
    }
}

LabeledTree flatten_rec(const LabeledTree& t) {
    if (label_tag(t.label) == "note") {
        LabeledTree leaf;
        flatten_into(t, leaf.label);
        return leaf;
    }
    LabeledTree out;
    out.label = t.label;
    out.children.reserve(t.children.size());
    for (const auto& c : t.children)
        out.children.push_back(flatten_rec(c));
    return out;
}

// Pre-order prefix copy; budget counts nodes still allowed.
void truncate_rec(const LabeledTree& t, std::size_t& budget, LabeledTree& out) {
    for (const auto& c : t.children) {
        if (budget == 0)
            return;
        --budget;
        out.children.push_back(LabeledTree{c.label, {}, false});
        truncate_rec(c, budget, out.children.back());
    }
}

void escape_into(const std::string& s, std::string& out) {
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
}

void serialize_rec(const LabeledTree& t, std::string& out, int depth) {
    std::string_view label = t.label;
    std::size_t tag_end = label.find_first_of("@=");
    std::string tag(label.substr(0, tag_end));
    std::string text;
    std::string attrs;
    if (tag_end != std::string::npos) {
        std::string_view rest = label.substr(tag_end);
        if (rest[0] == '=') {
            text = std::string(rest.substr(1));
        } else {
            // "@k=v" pieces; values by convention contain no '@'.
            while (!rest.empty() && rest[0] == '@') {
                rest.remove_prefix(1);
                std::size_t next = rest.find('@');
                std::string_view piece = rest.substr(0, next);
                std::size_t eq = piece.find('=');
                attrs += ' ';
                attrs += std::string(piece.substr(0, eq));
                attrs += "=\"";
                if (eq != std::string_view::npos)
                    escape_into(std::string(piece.substr(eq + 1)), attrs);
                attrs += '"';
                rest = next == std::string_view::npos ? std::string_view{} : rest.substr(next);
            }
        }
    }

    out.append(std::size_t(depth) * 2, ' ');
    out += '<' + tag + attrs;
    if (t.children.empty() && text.empty()) {
        out += "/>\n";
        return;
    }
    out += '>';
    if (!t.children.empty()) {
        out += '\n';
        for (const auto& c : t.children)
            serialize_rec(c, out, depth + 1);
        out.append(std::size_t(depth) * 2, ' ');
    } else {
        escape_into(text, out);
    }
    out += "</" + tag + ">\n";
}

} // namespace

std::string_view label_tag(const std::string& label) {
    std::size_t end = label.find_first_of("@=");
    return std::string_view(label).substr(0, end == std::string::npos ? label.size() : end);
}

LabeledTree parse_musicxml(const std::string& bytes) {
    const std::string* doc = &bytes;
    std::string unwrapped;
    if (looks_like_zip(bytes)) {
        unwrapped = mxl_main_document(bytes);
        doc = &unwrapped;
    }
    XmlParser parser(*doc);
    LabeledTree root = parser.run();
    std::string_view tag = label_tag(root.label);
    if (tag != "score-partwise" && tag != "score-timewise")
        throw Error(ErrorCode::NotMusicXml,
                    "root element is <" + std::string(tag) + ">, not a MusicXML score");
    return root;
}

LabeledTree flatten_notes(const LabeledTree& t) {
    LabeledTree out = flatten_rec(t);
    out.flattened = true;
    return out;
}

LabeledTree truncate(const LabeledTree& t, std::size_t max_nodes) {
    if (max_nodes == 0)
        return LabeledTree{};
    LabeledTree out{t.label, {}, false};
    std::size_t budget = max_nodes - 1;
    truncate_rec(t, budget, out);
    return out;
}

std::size_t node_count(const LabeledTree& t) {
    std::size_t n = 1;
    for (const auto& c : t.children)
        n += node_count(c);
    return n;
}

std::string serialize_musicxml(const LabeledTree& t) {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    if (label_tag(t.label) == "score-partwise")
        out += "<!DOCTYPE score-partwise PUBLIC \"-//Recordare//DTD MusicXML 4.0 "
               "Partwise//EN\" \"http://www.musicxml.org/dtds/partwise.dtd\">\n";
    serialize_rec(t, out, 0);
    return out;
}

} // namespace omrkit::mxl
