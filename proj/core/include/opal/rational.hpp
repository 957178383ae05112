#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <string>

namespace opal {

// Exact rational scalar. GMP keeps values in canonical reduced form with a
// positive denominator; all arithmetic below inherits that.
using Rat = boost::multiprecision::mpq_rational;

// Parses "p", "-p/q" or "p/q"; denominator must be nonzero.  The result is
// canonicalized regardless of the input form.
Rat parse_rational(const std::string& text);

// Renders "p" or "p/q" in canonical reduced form.
std::string to_string(const Rat& value);

}  // namespace opal
