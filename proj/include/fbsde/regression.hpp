#pragma once

// Least-squares Monte Carlo on global polynomial bases.

#include "fbsde/types.hpp"

#include <Eigen/Core>
#include <Eigen/QR>

#include <cstddef>
#include <limits>
#include <vector>

namespace fbsde {

inline constexpr std::size_t kDefaultBasisCap = 512;

/// All monomials of total degree <= degree in d variables, graded
/// lexicographic: 1, x1, ..., xd, x1^2, x1 x2, ...
struct PolynomialBasis {
  int d = 1;
  int degree = 0;
  std::vector<std::vector<int>> exponents;

  Eigen::Index size() const { return static_cast<Eigen::Index>(exponents.size()); }

  Eigen::VectorXd evaluate(StateRef x) const;
  /// M x K design matrix, one row per sample.
  Eigen::MatrixXd design(const StateMatrix& x) const;
};

PolynomialBasis build_basis(int d, int degree, std::size_t cap = kDefaultBasisCap);

/// Coordinatewise clamp to [-bound, bound]; identity for an infinite bound.
Eigen::VectorXd truncate(const Eigen::VectorXd& x, double bound);
double truncate(double x, double bound);

/// Factorization of a standardized design matrix, reusable for any number of
/// right-hand sides. Columns are scaled to unit RMS, and centred when the
/// design contains a constant column; the transform is folded back so
/// coefficients refer to the raw columns. Rank-deficient designs yield the
/// minimum-norm solution in the standardized coordinates.
class LeastSquaresProjector {
 public:
  explicit LeastSquaresProjector(const Eigen::MatrixXd& design, double rank_threshold = 1e-10);

  /// K x q coefficients for an M x q response matrix.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& responses) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& responses) const;

  Eigen::Index rank() const { return factor_.rank(); }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return static_cast<Eigen::Index>(scale_.size()); }

 private:
  Eigen::Index rows_ = 0;
  Eigen::VectorXd shift_;
  Eigen::VectorXd scale_;
  Eigen::Index intercept_ = -1;
  double intercept_value_ = 0.0;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> factor_;
};

/// Plain least-squares coefficients for a raw design matrix.
Eigen::MatrixXd ols_fit(const Eigen::MatrixXd& features, const Eigen::MatrixXd& responses);

struct RegressionModel {
  PolynomialBasis basis;
  Eigen::MatrixXd coefficients;  // K x q
  double bound = std::numeric_limits<double>::infinity();

  Eigen::Index outputs() const { return coefficients.cols(); }

  /// Truncated expansion at one state (length q).
  Eigen::VectorXd predict(StateRef x) const;
  double predict_scalar(StateRef x) const;
  /// M x q predictions for a sample of states.
  Eigen::MatrixXd predict_batch(const StateMatrix& x) const;
  /// Same as predict_batch(x) when `design` is basis.design(x).
  Eigen::MatrixXd predict_design(const Eigen::MatrixXd& design) const;
};

/// Fits a model whose outputs are the columns of `responses`.
RegressionModel fit_model(const PolynomialBasis& basis, const LeastSquaresProjector& projector,
                          const Eigen::MatrixXd& responses, double bound);

RegressionModel fit_model(const PolynomialBasis& basis, const StateMatrix& x,
                          const Eigen::MatrixXd& responses, double bound);

/// Model predicting the given constant everywhere (before truncation).
RegressionModel constant_model(const PolynomialBasis& basis, const Eigen::VectorXd& value, double bound);

}  // namespace fbsde
