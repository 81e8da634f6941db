#ifndef DOP_RATIONAL_HPP
#define DOP_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace dop {

// Exact arbitrary-precision rational. Grammar probabilities and the test
// oracles work in this type; the chart converts to double where speed
// matters.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// "p/q" form; integers render without the "/q".
std::string rational_to_string(const Rational& r);

// Parses "p", "p/q", or a plain integer string. Throws std::invalid_argument.
Rational rational_from_string(const std::string& text);

}  // namespace dop

#endif  // DOP_RATIONAL_HPP
