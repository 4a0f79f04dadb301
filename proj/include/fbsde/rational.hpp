#pragma once

// Exact rational scalar used for scheme coefficients, with the Eigen glue needed
// to store it in dense matrices.

#include <boost/multiprecision/cpp_int.hpp>

#include <Eigen/Core>

#include <cmath>
#include <string>

namespace fbsde {

using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;

/// Parses "p/q", an integer, or a plain decimal literal ("0.125", "-2.5e-1")
/// into an exact rational. Throws fbsde::Error(Parse) on malformed input.
Rational parse_rational(const std::string& text);

/// "p/q" or "p" when the denominator is one.
std::string format_rational(const Rational& value);

template <typename Scalar>
double to_double(const Scalar& value) {
  return static_cast<double>(value);
}

template <typename Scalar>
double magnitude(const Scalar& value) {
  return std::abs(to_double(value));
}

template <typename Scalar>
Scalar from_ratio(long long num, long long den) {
  if constexpr (std::is_same_v<Scalar, Rational>) {
    return Rational(num) / Rational(den);
  } else {
    return static_cast<Scalar>(num) / static_cast<Scalar>(den);
  }
}

template <typename Scalar>
bool is_exact_zero(const Scalar& value) {
  return value == Scalar(0);
}

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

}  // namespace fbsde

namespace Eigen {

template <>
struct NumTraits<fbsde::Rational> : GenericNumTraits<fbsde::Rational> {
  using Real = fbsde::Rational;
  using NonInteger = fbsde::Rational;
  using Nested = fbsde::Rational;
  using Literal = fbsde::Rational;

  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 8,
    AddCost = 64,
    MulCost = 64
  };

  static inline Real epsilon() { return Real(0); }
  static inline Real dummy_precision() { return Real(0); }
  static inline int digits10() { return 0; }
};

}  // namespace Eigen
