#include "omrkit/rational.hpp"

#include <cctype>
#include <numeric>

namespace omrkit {

std::int64_t gcd64(std::int64_t a, std::int64_t b) {
    return std::gcd(a, b);
}

std::int64_t lcm64(std::int64_t a, std::int64_t b) {
    if (a == 0 || b == 0)
        return 0;
    return a / std::gcd(a, b) * b;
}

std::optional<Rational> parse_fraction(const std::string& text) {
    std::size_t pos = 0;
    auto read_int = [&](std::int64_t& out) -> bool {
        std::size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
            ++pos;
        if (pos == start || pos - start > 9)
            return false;
        out = std::stoll(text.substr(start, pos - start));
        return true;
    };

    std::int64_t num = 1;
    bool have_num = pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]));
    if (have_num && !read_int(num))
        return std::nullopt;
    std::int64_t den = 1;
    if (pos < text.size() && text[pos] == '/') {
        ++pos;
        if (!read_int(den))
            return std::nullopt;
    } else if (!have_num) {
        return std::nullopt;
    }
    if (pos != text.size() || num <= 0 || den <= 0)
        return std::nullopt;
    return Rational(num, den);
}

} // namespace omrkit
