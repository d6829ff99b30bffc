#ifndef FILIFORM_RATIONAL_HPP
#define FILIFORM_RATIONAL_HPP

#include <boost/multiprecision/gmp.hpp>

#include <cctype>
#include <stdexcept>
#include <string>

namespace filiform {

// Exact scalar type used everywhere: a fraction of arbitrary-precision
// integers, kept canonical (positive denominator, gcd(num, den) = 1).
// GMP keeps results canonical as long as every input is canonical, so the
// only place that needs care is parsing.
using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

// Accepts "p" or "p/q" in base 10, optional leading '-', no whitespace.
inline Rational parse_rational(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("rational: empty string");
    std::size_t pos = 0;
    auto eat_int = [&](const char* what) {
        if (pos < text.size() && text[pos] == '-') ++pos;
        std::size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == start)
            throw std::invalid_argument(std::string("rational: missing ") + what + " in '" + text + "'");
    };
    eat_int("numerator");
    if (pos < text.size()) {
        if (text[pos] != '/')
            throw std::invalid_argument("rational: unexpected character in '" + text + "'");
        ++pos;
        eat_int("denominator");
        if (pos != text.size())
            throw std::invalid_argument("rational: trailing characters in '" + text + "'");
    }
    Rational value(text);
    if (denominator(value).is_zero())
        throw std::invalid_argument("rational: zero denominator in '" + text + "'");
    mpq_canonicalize(value.backend().data());
    return value;
}

// "p/q", or just "p" when the denominator is 1.
inline std::string format_rational(const Rational& value) { return value.str(); }

}  // namespace filiform

#endif  // FILIFORM_RATIONAL_HPP
