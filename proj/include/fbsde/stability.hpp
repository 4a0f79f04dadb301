#pragma once

// Dahlquist root condition for the corrector's characteristic polynomial
//   P(z) = z^m - alpha_1 z^{m-1} - ... - alpha_m.

#include "fbsde/rational.hpp"
#include "fbsde/scheme.hpp"

#include "json.hpp"

#include <complex>
#include <string_view>
#include <vector>

namespace fbsde {

/// Monic polynomial, coefficients from the highest degree down.
template <typename Scalar>
struct CharacteristicPolynomial {
  Vector<Scalar> coeffs;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

template <typename Scalar>
CharacteristicPolynomial<Scalar> characteristic_polynomial(const CorrectorCoefficients<Scalar>& c) {
  const int m = c.steps();
  CharacteristicPolynomial<Scalar> p{Vector<Scalar>(m + 1)};
  p.coeffs(0) = Scalar(1);
  for (int j = 1; j <= m; ++j) p.coeffs(j) = -c.alpha(j - 1);
  return p;
}

using Complex = std::complex<double>;

/// Horner evaluation; also returns P'(z) through `derivative` when non-null.
Complex evaluate_polynomial(const Eigen::VectorXd& coeffs, Complex z, Complex* derivative = nullptr);

/// All roots (with repetition) from the companion-matrix eigenvalues, each
/// polished by one Newton step. Throws NonConvergence if the eigen iteration
/// fails; the message carries whatever partial roots were obtained.
std::vector<Complex> polynomial_roots(const CharacteristicPolynomial<double>& poly);

template <typename Scalar>
std::vector<Complex> polynomial_roots(const CharacteristicPolynomial<Scalar>& poly) {
  return polynomial_roots(CharacteristicPolynomial<double>{poly.coeffs.template cast<double>()});
}

/// Monic polynomial with the given roots; conjugate pairs are expected so the
/// imaginary parts cancel.
Eigen::VectorXd polynomial_from_roots(const std::vector<Complex>& roots);

enum class StabilityStatus { Stable, Marginal, Unstable };

std::string_view to_string(StabilityStatus status) noexcept;

struct RootCluster {
  Complex center;
  int multiplicity = 1;
};

struct StabilityVerdict {
  StabilityStatus status = StabilityStatus::Stable;
  std::vector<RootCluster> roots;
  std::vector<Complex> offending;
};

inline constexpr double kDefaultRootTolerance = 1e-8;

/// Clusters roots closer than `tol` into multiplicity groups and applies the
/// root condition: Unstable if a root lies outside 1 + tol or a multiple root
/// sits within tol of the unit circle. Marginal flags a near-unit root whose
/// simple/multiple classification changes when the clustering tolerance is
/// loosened to sqrt(tol).
StabilityVerdict check_root_condition(const std::vector<Complex>& roots,
                                      double tol = kDefaultRootTolerance);

template <typename Scalar>
StabilityVerdict scheme_stability(const MultistepScheme<Scalar>& scheme,
                                  double tol = kDefaultRootTolerance) {
  return check_root_condition(polynomial_roots(characteristic_polynomial(scheme.corrector)), tol);
}

nlohmann::json verdict_to_json(const StabilityVerdict& verdict);

}  // namespace fbsde
