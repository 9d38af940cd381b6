#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "omrkit/abc.hpp"
#include "omrkit/canon.hpp"
#include "omrkit/error.hpp"

using namespace omrkit;
using namespace omrkit::abc;

namespace {

std::string canon_text(const std::string& abc, CanonConfig cfg = {}) {
    return emit_abc(canonicalize(parse_abc(abc), cfg));
}

std::vector<std::string> body_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    bool in_body = false;
    for (char c : text) {
        if (c == '\n') {
            if (in_body && !cur.empty() && cur[0] != 'w' && cur[0] != '%' && cur[0] != 'V')
                lines.push_back(cur);
            if (!in_body && cur.rfind("K:", 0) == 0)
                in_body = true;
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    return lines;
}

std::size_t bars_in(const std::string& line) {
    // Count measure-closing bars, ignoring the trailing %comment.
    std::string body = line.substr(0, line.find('%'));
    std::size_t bars = 0;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] == '|') {
            ++bars;
            if (i + 1 < body.size() && (body[i + 1] == ']' || body[i + 1] == '|' ||
                                        body[i + 1] == ':'))
                ++i;
        } else if (body[i] == ':' && i + 1 < body.size() && body[i + 1] == '|') {
            // ":|" counted at the '|'
        }
    }
    return bars;
}

// (pitch, absolute duration) stream, the canonicalization invariant.
std::vector<std::pair<std::string, Rational>> pitch_stream(const Score& s) {
    std::vector<std::pair<std::string, Rational>> out;
    for (const auto& rv : resolve_events(s))
        for (const auto& m : rv.measures)
            for (const auto& n : m.notes) {
                if (n.grace)
                    continue;
                std::string label = n.rest ? "rest" : std::string();
                for (const auto& h : n.heads)
                    label += std::string(1, h.pitch.step) + std::to_string(h.pitch.octave);
                out.emplace_back(label, n.duration);
            }
    return out;
}

const std::string twelve_bars = "X:1\nL:1/8\nK:C\n"
                                "C4D4|E4F4|G4A4|B4c4|d4e4|f4g4|a4b4|c4d4|"
                                "e4f4|g4a4|b4c4|C8|]\n";

} // namespace

TEST_CASE("unit change rescales durations exactly") {
    std::string out = canon_text("X:1\nL:1/4\nK:C\nC2 D|]\n");
    CHECK(out.find("L:1/8") != std::string::npos);
    CHECK(out.find("C4") != std::string::npos);
    CHECK(out.find("D2") != std::string::npos);
    Score c = canonicalize(parse_abc("X:1\nL:1/4\nK:C\nC2 D|]\n"), {});
    const auto* n = std::get_if<Note>(&c.voices[0].measures[0].events.at(0));
    REQUIRE(n);
    CHECK(n->heads[0].length == Rational(4));
}

TEST_CASE("missing L: header gets inserted before K:") {
    std::string out = canon_text("X:1\nM:4/4\nK:C\nCDEF|]\n");
    CHECK(out.find("L:1/8\nK:C") != std::string::npos);
    // M:4/4 defaults to a 1/8 unit already, so note text is unchanged.
    CHECK(out.find("CDEF|]") != std::string::npos);
}

TEST_CASE("a 2/4 tune rescales from its 1/16 default unit") {
    std::string out = canon_text("X:1\nM:2/4\nK:C\nC4D4|]\n");
    // 4 sixteenths = 2 eighths.
    CHECK(out.find("C2D2") != std::string::npos);
}

TEST_CASE("twelve measures break as 5+5+2 with running totals") {
    std::string out = canon_text(twelve_bars);
    auto lines = body_lines(out);
    REQUIRE(lines.size() == 3);
    CHECK(bars_in(lines[0]) == 5);
    CHECK(bars_in(lines[1]) == 5);
    CHECK(bars_in(lines[2]) == 2);
    CHECK(lines[0].substr(lines[0].find('%')) == "%5");
    CHECK(lines[1].substr(lines[1].find('%')) == "%10");
    CHECK(lines[2].substr(lines[2].find('%')) == "%12");
}

TEST_CASE("bars_per_line is configurable") {
    CanonConfig cfg;
    cfg.bars_per_line = 4;
    std::string out = canon_text(twelve_bars, cfg);
    auto lines = body_lines(out);
    REQUIRE(lines.size() == 3);
    for (const auto& l : lines)
        CHECK(bars_in(l) == 4);
    CHECK(lines[2].substr(lines[2].find('%')) == "%12");
}

TEST_CASE("engraved breaks survive re-lining") {
    // '$' lives on measure 2; the text line break moves to measure 5.
    std::string out = canon_text("X:1\nL:1/8\nK:C\nC8|D8|$E8|F8|G8|A8|]\n");
    CHECK(out.find("D8|$") != std::string::npos);
    auto lines = body_lines(out);
    REQUIRE(lines.size() == 2);
    CHECK(bars_in(lines[0]) == 5);
}

TEST_CASE("canonicalize is idempotent") {
    std::vector<std::string> corpus = {
        twelve_bars,
        "X:1\nL:1/4\nK:C\nC2 D|E F|]\n",
        "X:1\nM:6/8\nK:G\nGAB cde|$fed cBA|]\n",
        "X:1\nK:C\nV:1\nC8|D8|E8|F8|G8|A8|]\nV:2\nc8|d8|e8|f8|g8|a8|]\n",
        "X:1\nL:1/16\nK:D\n(3ABc d2|[L:1/8]ef|]\n",
        "X:1\nK:C\nC>D E<F|z4 [CEG]4|]\n",
        "X:1\nT:Song\nK:C\n\"Am\"C4 {de}f4|]\nw:la la\n",
        "X:1\nK:C\nCD|tEF|]\n", // 't' stays opaque
    };
    for (const auto& abc : corpus) {
        CAPTURE(abc);
        Score once = canonicalize(parse_abc(abc), {});
        Score twice = canonicalize(once, {});
        CHECK(once == twice);
        // And the emitted text is a fixed point through a reparse.
        std::string t1 = emit_abc(once);
        Score reparsed = parse_abc(t1);
        reparsed.dialect = Dialect::canonical;
        CHECK(emit_abc(reparsed) == t1);
    }
}

TEST_CASE("musical content is untouched by canonicalization") {
    std::vector<std::string> corpus = {
        twelve_bars,
        "X:1\nL:1/4\nK:C\nC2 D|E F|]\n",
        "X:1\nM:2/4\nK:G\nG2A2|B4|]\n",
        "X:1\nM:6/8\nK:G\n(3GAB cde|fedceA|]\n",
        "X:1\nL:1/16\nK:D\nA4Bc d2|[L:1/8]ef|]\n",
        "X:1\nK:C\nC>D E<F|z4 [CEG]4|]\n",
    };
    for (const auto& abc : corpus) {
        CAPTURE(abc);
        Score raw = parse_abc(abc);
        Score canon = canonicalize(raw, {});
        CHECK(pitch_stream(raw) == pitch_stream(canon));
    }
}

TEST_CASE("multi-voice canonical text interleaves five-bar groups") {
    std::string out = canon_text(
        "X:1\nK:C\nV:1\nC8|D8|E8|F8|G8|A8|B8|]\nV:2\nc8|d8|e8|f8|g8|a8|b8|]\n");
    auto pos1 = out.find("[V:1]C8|");
    auto pos2 = out.find("[V:2]c8|");
    auto pos3 = out.find("[V:1]A8|");
    auto pos4 = out.find("[V:2]a8|");
    REQUIRE(pos1 != std::string::npos);
    REQUIRE(pos2 != std::string::npos);
    REQUIRE(pos3 != std::string::npos);
    REQUIRE(pos4 != std::string::npos);
    CHECK(pos1 < pos2);
    CHECK(pos2 < pos3);
    CHECK(pos3 < pos4);
    // Both voices carry the same running totals.
    CHECK(out.find("|%5\n") != std::string::npos);
    CHECK(out.find("|]%7\n") != std::string::npos);
    // Idempotence holds for the interleaved layout too.
    Score reparsed = parse_abc(out);
    reparsed.dialect = Dialect::canonical;
    CHECK(emit_abc(canonicalize(reparsed, {})) == out);
}

TEST_CASE("overflowing rescale raises NonRepresentableDuration") {
    try {
        canonicalize(parse_abc("X:1\nL:1/1\nK:C\nC999999999|]\n"), {});
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonRepresentableDuration);
    }
}

TEST_CASE("masking titles, composers, voice names, lyrics, annotations") {
    Score s = parse_abc("X:1\nT:Lacrimosa\nC:Mozart\nK:C\n"
                        "V:1 treble nm=\"Piano\" snm=\"Pno.\"\n"
                        "\"dolce\"C2 D2|]\nw:la crima\n");
    Score masked = mask_text(s, {});
    std::string out = emit_abc(masked);
    CHECK(out.find("T:<|text|>") != std::string::npos);
    CHECK(out.find("C:<|text|>") != std::string::npos);
    CHECK(out.find("nm=\"<|text|>\"") != std::string::npos);
    CHECK(out.find("snm=\"<|text|>\"") != std::string::npos);
    CHECK(out.find("\"<|text|>\"C2") != std::string::npos);
    CHECK(out.find("w:<|text|>") != std::string::npos);
    CHECK(out.find("Lacrimosa") == std::string::npos);
    CHECK(out.find("Mozart") == std::string::npos);
    CHECK(out.find("Piano") == std::string::npos);
    CHECK(out.find("crima") == std::string::npos);
    // Notes are untouched.
    CHECK(pitch_stream(s) == pitch_stream(masked));
}

TEST_CASE("masking a text-free tune is the identity") {
    Score s = parse_abc("X:1\nM:4/4\nL:1/8\nK:C\nCDEF|GABc|]\n");
    CHECK(mask_text(s, {}) == s);
}

TEST_CASE("masking is idempotent") {
    Score s = parse_abc("X:1\nT:Air\nK:C\n\"pp\"C4|]\nw:ah\n");
    Score once = mask_text(s, {});
    CHECK(mask_text(once, {}) == once);
}

TEST_CASE("invalid configs are rejected") {
    CHECK_THROWS_AS(canonicalize(parse_abc("X:1\nK:C\nC|]"), CanonConfig{0}), std::invalid_argument);
    CanonConfig bad;
    bad.unit_note = Rational(1, 3);
    CHECK_THROWS_AS(canonicalize(parse_abc("X:1\nK:C\nC|]"), bad), std::invalid_argument);
    CanonConfig third;
    third.unit_note = Rational(2, 8); // reduces to 1/4, which is allowed
    CHECK_NOTHROW(canonicalize(parse_abc("X:1\nK:C\nC|]"), third));
}
