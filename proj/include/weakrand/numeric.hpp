#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>

namespace weakrand {

/// Exact arbitrary-precision rational. All classical source and adversary
/// computations run on this backend so that inequality checks carry no
/// rounding doubt. Quantum amplitudes use the `double` backend instead.
using Rational = boost::multiprecision::cpp_rational;

/// Per-backend numeric policy. Arithmetic never mixes backends; a whole
/// computation is instantiated either on Rational or on double.
template <class T>
struct NumericTraits;

template <>
struct NumericTraits<Rational> {
    static constexpr bool is_exact = true;
    static Rational tolerance() { return Rational(0); }
    static double to_double(const Rational& v) { return v.template convert_to<double>(); }
    static std::string name() { return "exact"; }
};

template <>
struct NumericTraits<double> {
    static constexpr bool is_exact = false;
    static double tolerance() { return 1e-9; }
    static double to_double(double v) { return v; }
    static std::string name() { return "float"; }
};

/// Renders a rational as "numerator/denominator", always with an explicit
/// denominator ("1/1", "29/200"). This is the canonical wire form.
inline std::string to_fraction_string(const Rational& v) {
    return numerator(v).str() + "/" + denominator(v).str();
}

/// Parses "p/q" or a bare integer "p". Throws on anything else.
inline Rational rational_from_string(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty rational literal");
    const auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(boost::multiprecision::cpp_int(s));
        boost::multiprecision::cpp_int num(s.substr(0, slash));
        boost::multiprecision::cpp_int den(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator");
        return Rational(num, den);
    } catch (const std::runtime_error&) {
        throw std::invalid_argument("malformed rational literal: '" + s + "'");
    }
}

}  // namespace weakrand
