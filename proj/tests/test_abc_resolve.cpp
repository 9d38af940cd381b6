#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "omrkit/abc.hpp"

using namespace omrkit;
using namespace omrkit::abc;

namespace {

std::vector<ResolvedVoice> resolve(const std::string& text) {
    Score s = parse_abc(text);
    return resolve_events(s);
}

} // namespace

TEST_CASE("durations come out in whole-note units") {
    auto rv = resolve("X:1\nL:1/8\nK:C\nC D2 E/ F3|]");
    REQUIRE(rv.size() == 1);
    REQUIRE(rv[0].measures.size() == 1);
    const auto& notes = rv[0].measures[0].notes;
    REQUIRE(notes.size() == 4);
    CHECK(notes[0].duration == Rational(1, 8));
    CHECK(notes[1].duration == Rational(1, 4));
    CHECK(notes[2].duration == Rational(1, 16));
    CHECK(notes[3].duration == Rational(3, 8));
}

TEST_CASE("unit length changes mid-tune") {
    auto rv = resolve("X:1\nL:1/8\nK:C\nC|[L:1/4]C|]");
    CHECK(rv[0].measures[0].notes[0].duration == Rational(1, 8));
    CHECK(rv[0].measures[1].notes[0].duration == Rational(1, 4));
}

TEST_CASE("broken rhythm dots the long side") {
    auto rv = resolve("X:1\nL:1/8\nK:C\nC>D E<F G>>A|]");
    const auto& n = rv[0].measures[0].notes;
    REQUIRE(n.size() == 6);
    CHECK(n[0].duration == Rational(3, 16)); // dotted
    CHECK(n[1].duration == Rational(1, 16)); // halved
    CHECK(n[2].duration == Rational(1, 16));
    CHECK(n[3].duration == Rational(3, 16));
    CHECK(n[4].duration == Rational(7, 32)); // double dot
    CHECK(n[5].duration == Rational(1, 32));
}

TEST_CASE("triplet scales three notes by 2/3") {
    auto rv = resolve("X:1\nL:1/8\nK:C\n(3CDE F|]");
    const auto& n = rv[0].measures[0].notes;
    REQUIRE(n.size() == 4);
    for (int i = 0; i < 3; ++i) {
        CHECK(n[i].duration == Rational(1, 12));
        CHECK(n[i].tuplet_actual == 3);
        CHECK(n[i].tuplet_normal == 2);
    }
    CHECK(n[3].duration == Rational(1, 8));
    CHECK(n[3].tuplet_actual == 0);
}

TEST_CASE("explicit tuplet ratio (3:2:4 covers four notes") {
    auto rv = resolve("X:1\nL:1/8\nK:C\n(3:2:4CDEF G|]");
    const auto& n = rv[0].measures[0].notes;
    REQUIRE(n.size() == 5);
    for (int i = 0; i < 4; ++i)
        CHECK(n[i].duration == Rational(1, 12));
    CHECK(n[4].duration == Rational(1, 8));
}

TEST_CASE("duplet defaults depend on the meter") {
    // Simple meter: (2 -> 2 in the time of 3? No: q defaults to 3 per the
    // ABC table, and in 6/8 (5 defaults to 3.
    auto simple = resolve("X:1\nM:4/4\nL:1/8\nK:C\n(2CD|]");
    CHECK(simple[0].measures[0].notes[0].duration == Rational(3, 16));
    auto compound = resolve("X:1\nM:6/8\nL:1/8\nK:C\n(5CDEFG|]");
    CHECK(compound[0].measures[0].notes[0].duration == Rational(3, 40));
    auto plain5 = resolve("X:1\nM:4/4\nL:1/8\nK:C\n(5CDEFG|]");
    CHECK(plain5[0].measures[0].notes[0].duration == Rational(1, 20));
}

TEST_CASE("chords use the shared duration times the multiplier") {
    auto rv = resolve("X:1\nL:1/8\nK:C\n[CEG]4|]");
    const auto& n = rv[0].measures[0].notes;
    REQUIRE(n.size() == 1);
    CHECK(n[0].duration == Rational(1, 2));
    CHECK(n[0].heads.size() == 3);
}

TEST_CASE("grace notes take no time") {
    auto rv = resolve("X:1\nL:1/8\nK:C\n{ga}B|]");
    const auto& n = rv[0].measures[0].notes;
    REQUIRE(n.size() == 2);
    CHECK(n[0].grace);
    CHECK(n[0].duration == Rational(0));
    CHECK(!n[1].grace);
}

TEST_CASE("broken rhythm skips grace notes") {
    auto rv = resolve("X:1\nL:1/8\nK:C\nC>{d}E|]");
    const auto& n = rv[0].measures[0].notes;
    REQUIRE(n.size() == 3);
    CHECK(n[0].duration == Rational(3, 16));
    CHECK(n[1].grace);
    CHECK(n[2].duration == Rational(1, 16));
}

TEST_CASE("whole-measure rests expand to full bars") {
    auto rv = resolve("X:1\nM:3/4\nL:1/8\nK:C\nZ3|CDE|]");
    REQUIRE(rv[0].measures.size() == 4);
    for (int i = 0; i < 3; ++i) {
        REQUIRE(rv[0].measures[i].notes.size() == 1);
        CHECK(rv[0].measures[i].notes[0].rest);
        CHECK(rv[0].measures[i].notes[0].duration == Rational(3, 4));
    }
    CHECK(rv[0].measures[2].right.kind == BarKind::plain);
    CHECK(rv[0].measures[3].notes.size() == 3);
}

TEST_CASE("rests keep visibility") {
    auto rv = resolve("X:1\nL:1/8\nK:C\nz x|]");
    const auto& n = rv[0].measures[0].notes;
    CHECK(n[0].visible);
    CHECK(!n[1].visible);
}

TEST_CASE("slurs, decorations, annotations attach to notes") {
    auto rv = resolve("X:1\nL:1/8\nK:C\n!trill!\"Am\"(CD) .E|]");
    const auto& n = rv[0].measures[0].notes;
    REQUIRE(n.size() == 3);
    CHECK(n[0].slur_starts == 1);
    CHECK(n[0].decorations == std::vector<std::string>{"trill"});
    CHECK(n[0].annotations == std::vector<std::string>{"Am"});
    CHECK(n[1].slur_stops == 1);
    CHECK(n[2].decorations == std::vector<std::string>{"."});
}

TEST_CASE("overlay marks the next note") {
    auto rv = resolve("X:1\nL:1/8\nK:C\nC4&E4|]");
    const auto& n = rv[0].measures[0].notes;
    REQUIRE(n.size() == 2);
    CHECK(!n[0].overlay_before);
    CHECK(n[1].overlay_before);
}

TEST_CASE("key and meter changes land on the measure") {
    auto rv = resolve("X:1\nL:1/8\nK:C\nC|[K:G][M:3/4]DEF|]");
    REQUIRE(rv[0].measures.size() == 2);
    CHECK(!rv[0].measures[0].key_change);
    CHECK(rv[0].measures[1].key_change == std::string("G"));
    CHECK(rv[0].measures[1].meter_change == std::string("3/4"));
}

TEST_CASE("ties survive resolution") {
    auto rv = resolve("X:1\nL:1/8\nK:C\nC-C [CE]-[CE]|]");
    const auto& n = rv[0].measures[0].notes;
    CHECK(n[0].tie);
    CHECK(!n[1].tie);
    CHECK(n[2].tie);
}
