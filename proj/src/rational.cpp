#include "fbsde/rational.hpp"

#include "fbsde/error.hpp"

#include <cctype>

namespace fbsde {

namespace {

boost::multiprecision::cpp_int parse_integer(const std::string& digits, const std::string& text) {
  if (digits.empty()) throw Error(ErrorCode::Parse, "not a number: '" + text + "'");
  for (char c : digits) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw Error(ErrorCode::Parse, "not a number: '" + text + "'");
    }
  }
  return boost::multiprecision::cpp_int(digits);
}

}  // namespace

Rational parse_rational(const std::string& raw) {
  std::string text;
  for (char c : raw) {
    if (!std::isspace(static_cast<unsigned char>(c))) text.push_back(c);
  }
  if (text.empty()) throw Error(ErrorCode::Parse, "empty number");

  if (const auto slash = text.find('/'); slash != std::string::npos) {
    const Rational num = parse_rational(text.substr(0, slash));
    const Rational den = parse_rational(text.substr(slash + 1));
    if (den == 0) throw Error(ErrorCode::Parse, "zero denominator in '" + raw + "'");
    return num / den;
  }

  std::size_t pos = 0;
  bool negative = false;
  if (text[pos] == '+' || text[pos] == '-') {
    negative = text[pos] == '-';
    ++pos;
  }
  long exponent = 0;
  std::string mantissa = text.substr(pos);
  if (const auto e = mantissa.find_first_of("eE"); e != std::string::npos) {
    try {
      exponent = std::stol(mantissa.substr(e + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::Parse, "bad exponent in '" + raw + "'");
    }
    mantissa = mantissa.substr(0, e);
  }
  std::string digits = mantissa;
  if (const auto dot = mantissa.find('.'); dot != std::string::npos) {
    digits = mantissa.substr(0, dot) + mantissa.substr(dot + 1);
    exponent -= static_cast<long>(mantissa.size() - dot - 1);
  }
  if (std::labs(exponent) > 4000) throw Error(ErrorCode::Parse, "exponent out of range: '" + raw + "'");

  Rational value(parse_integer(digits, raw));
  const Rational ten(10);
  for (long k = 0; k < std::labs(exponent); ++k) {
    value = exponent > 0 ? value * ten : value / ten;
  }
  return negative ? Rational(-value) : value;
}

std::string format_rational(const Rational& value) {
  const auto num = boost::multiprecision::numerator(value);
  const auto den = boost::multiprecision::denominator(value);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

}  // namespace fbsde
