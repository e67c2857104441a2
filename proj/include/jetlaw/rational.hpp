#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/functional/hash.hpp>

namespace jetlaw {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

inline std::size_t hash_value(const Rational& r) {
    boost::hash<Rational> h;
    return h(r);
}

} // namespace jetlaw
