#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <vector>

namespace mec {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt num(const Rational& r) { return boost::multiprecision::numerator(r); }
inline BigInt den(const Rational& r) { return boost::multiprecision::denominator(r); }

/// "p/q" in lowest terms; integers print without the denominator.
inline std::string rational_to_string(const Rational& r) {
    if (den(r) == 1) return num(r).str();
    return num(r).str() + "/" + den(r).str();
}

/// lcm of the denominators in lowest terms; 1 for an empty vector.
inline BigInt lcm_of_denominators(const std::vector<Rational>& values) {
    BigInt l = 1;
    for (const auto& v : values) l = boost::multiprecision::lcm(l, den(v));
    return l;
}

}  // namespace mec
