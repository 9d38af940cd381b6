#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <optional>
#include <string>

namespace omrkit {

// Exact duration arithmetic. All note lengths are rationals, never floats.
using Rational = boost::rational<std::int64_t>;

inline std::string to_string(const Rational& r) {
    if (r.denominator() == 1)
        return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

// Parses "n", "n/m", or "/m". Returns nullopt on malformed or non-positive input.
std::optional<Rational> parse_fraction(const std::string& text);

std::int64_t gcd64(std::int64_t a, std::int64_t b);
std::int64_t lcm64(std::int64_t a, std::int64_t b);

} // namespace omrkit
