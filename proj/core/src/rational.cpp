#include "opal/rational.hpp"

#include "opal/errors.hpp"

namespace opal {

Rat parse_rational(const std::string& text) {
  auto slash = text.find('/');
  try {
    if (slash == std::string::npos) {
      boost::multiprecision::mpz_int n(text);
      return Rat(n);
    }
    boost::multiprecision::mpz_int num(text.substr(0, slash));
    boost::multiprecision::mpz_int den(text.substr(slash + 1));
    if (den == 0) throw invalid_input("rational with zero denominator: " + text);
    // Division canonicalizes; mpq string assignment would not.
    return Rat(num) / Rat(den);
  } catch (const std::runtime_error& e) {
    throw invalid_input("cannot parse rational '" + text + "': " + e.what());
  }
}

std::string to_string(const Rat& value) {
  return value.str();
}

}  // namespace opal
