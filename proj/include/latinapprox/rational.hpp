#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace latinapprox {

// Exact arithmetic used throughout the library. Every geometric quantity
// (cell bounds, measures, tensor entries) is a rational number so that the
// equisize and line-sum identities can be asserted with equality instead of
// tolerances. Monte Carlo estimates are the only place doubles appear.
using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

inline Rational rat(long long num, long long den = 1) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    return Rational(Integer(num), Integer(den));
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

// Largest integer <= q.
inline Integer floor_int(const Rational& q) {
    Integer n = numerator(q), d = denominator(q);  // d > 0 canonical
    Integer t = n / d;
    if (n < 0 && t * d != n) --t;
    return t;
}

inline std::int64_t floor_i64(const Rational& q) {
    return floor_int(q).convert_to<std::int64_t>();
}

inline Rational rat_abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

// q * scale, which must be an integer (scale a common denominator multiple).
inline Integer scaled_int(const Rational& q, const Integer& scale) {
    Rational s = q * scale;
    if (denominator(s) != 1) throw std::invalid_argument("scaled_int: scale is not a common denominator");
    return numerator(s);
}

inline Rational rat_min(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline Rational rat_max(const Rational& a, const Rational& b) { return a < b ? b : a; }

// "p/q" (or "p" when q == 1); used by the JSON serializers so exact
// denominators survive a round trip.
inline std::string rat_str(const Rational& q) {
    std::string s = numerator(q).str();
    if (denominator(q) != 1) s += "/" + denominator(q).str();
    return s;
}

inline Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(Integer(s));
    Integer num(s.substr(0, slash)), den(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("rational with zero denominator: " + s);
    return Rational(num, den);
}

}  // namespace latinapprox
