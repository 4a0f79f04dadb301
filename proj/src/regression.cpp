#include "fbsde/regression.hpp"

#include "fbsde/error.hpp"

#include <algorithm>
#include <cmath>

namespace fbsde {

namespace {

void enumerate_degree(int d, int pos, int remaining, std::vector<int>& current,
                      std::vector<std::vector<int>>& out) {
  if (pos == d - 1) {
    current[pos] = remaining;
    out.push_back(current);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[pos] = e;
    enumerate_degree(d, pos + 1, remaining - e, current, out);
  }
}

// Column k of the result holds x_k^0 .. x_k^degree.
Eigen::MatrixXd powers(StateRef x, int degree) {
  Eigen::MatrixXd p(degree + 1, x.size());
  p.row(0).setOnes();
  for (int e = 1; e <= degree; ++e) p.row(e) = p.row(e - 1).cwiseProduct(x.transpose());
  return p;
}

}  // namespace

PolynomialBasis build_basis(int d, int degree, std::size_t cap) {
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "basis dimension must be positive");
  if (degree < 0) throw Error(ErrorCode::InvalidArgument, "basis degree must be nonnegative");
  // C(d + degree, degree), stopping as soon as the cap is exceeded.
  double count = 1.0;
  for (int k = 1; k <= degree; ++k) {
    count = count * (d + k) / k;
    if (count > static_cast<double>(cap) + 0.5) {
      throw Error(ErrorCode::BasisTooLarge, "basis for d=" + std::to_string(d) + ", degree=" +
                                                std::to_string(degree) + " exceeds the cap of " +
                                                std::to_string(cap) + " functions");
    }
  }
  if (cap < 1) throw Error(ErrorCode::BasisTooLarge, "basis cap must allow the constant function");

  PolynomialBasis basis;
  basis.d = d;
  basis.degree = degree;
  std::vector<int> current(d, 0);
  for (int g = 0; g <= degree; ++g) enumerate_degree(d, 0, g, current, basis.exponents);
  return basis;
}

Eigen::VectorXd PolynomialBasis::evaluate(StateRef x) const {
  if (x.size() != d) throw Error(ErrorCode::DimensionMismatch, "state dimension does not match the basis");
  const Eigen::MatrixXd p = powers(x, degree);
  Eigen::VectorXd out(size());
  for (Eigen::Index j = 0; j < size(); ++j) {
    double v = 1.0;
    for (int k = 0; k < d; ++k) {
      if (exponents[j][k] != 0) v *= p(exponents[j][k], k);
    }
    out(j) = v;
  }
  return out;
}

Eigen::MatrixXd PolynomialBasis::design(const StateMatrix& x) const {
  if (x.cols() != d) throw Error(ErrorCode::DimensionMismatch, "state dimension does not match the basis");
  Eigen::MatrixXd out(x.rows(), size());
  for (Eigen::Index r = 0; r < x.rows(); ++r) out.row(r) = evaluate(x.row(r).transpose()).transpose();
  return out;
}

double truncate(double x, double bound) {
  if (std::isinf(bound)) return x;
  return std::clamp(x, -bound, bound);
}

Eigen::VectorXd truncate(const Eigen::VectorXd& x, double bound) {
  if (std::isinf(bound)) return x;
  return x.cwiseMax(-bound).cwiseMin(bound);
}

LeastSquaresProjector::LeastSquaresProjector(const Eigen::MatrixXd& design, double rank_threshold)
    : rows_(design.rows()) {
  if (design.rows() == 0) throw Error(ErrorCode::EmptySample, "regression sample is empty");
  const Eigen::Index k = design.cols();
  const double m = static_cast<double>(design.rows());
  shift_ = Eigen::VectorXd::Zero(k);
  scale_ = Eigen::VectorXd::Ones(k);

  const Eigen::VectorXd mean = design.colwise().mean().transpose();
  const Eigen::VectorXd raw_rms = (design.colwise().squaredNorm().transpose() / m).cwiseSqrt();
  std::vector<bool> constant(k, false);
  for (Eigen::Index c = 0; c < k; ++c) {
    const double spread = std::sqrt((design.col(c).array() - mean(c)).square().sum() / m);
    constant[c] = spread <= 1e-10 * raw_rms(c);
    if (constant[c] && intercept_ < 0 && raw_rms(c) > 0.0) {
      intercept_ = c;
      intercept_value_ = mean(c);
    }
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    if (constant[c]) {
      if (raw_rms(c) > 0.0) scale_(c) = raw_rms(c);
      continue;
    }
    if (intercept_ >= 0) shift_(c) = mean(c);
    const double rms = std::sqrt((design.col(c).array() - shift_(c)).square().sum() / m);
    if (rms > 0.0) scale_(c) = rms;
  }

  const Eigen::MatrixXd standardized =
      (design.rowwise() - shift_.transpose()).array().rowwise() / scale_.transpose().array();
  factor_.setThreshold(rank_threshold);
  factor_.compute(standardized);
}

Eigen::MatrixXd LeastSquaresProjector::solve(const Eigen::MatrixXd& responses) const {
  if (responses.rows() != rows_) {
    throw Error(ErrorCode::DimensionMismatch, "response count does not match the design");
  }
  Eigen::MatrixXd coef = factor_.solve(responses);
  coef.array().colwise() /= scale_.array();
  if (intercept_ >= 0) {
    const Eigen::RowVectorXd offset = shift_.transpose() * coef;
    coef.row(intercept_) -= offset / intercept_value_;
  }
  return coef;
}

Eigen::VectorXd LeastSquaresProjector::solve(const Eigen::VectorXd& responses) const {
  return solve(Eigen::MatrixXd(responses)).col(0);
}

Eigen::MatrixXd ols_fit(const Eigen::MatrixXd& features, const Eigen::MatrixXd& responses) {
  return LeastSquaresProjector(features).solve(responses);
}

Eigen::VectorXd RegressionModel::predict(StateRef x) const {
  return truncate(Eigen::VectorXd(coefficients.transpose() * basis.evaluate(x)), bound);
}

double RegressionModel::predict_scalar(StateRef x) const {
  if (outputs() != 1) throw Error(ErrorCode::DimensionMismatch, "model is not scalar-valued");
  return predict(x)(0);
}

Eigen::MatrixXd RegressionModel::predict_design(const Eigen::MatrixXd& design) const {
  if (design.cols() != coefficients.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "design width does not match the model");
  }
  Eigen::MatrixXd out = design * coefficients;
  if (!std::isinf(bound)) out = out.cwiseMax(-bound).cwiseMin(bound);
  return out;
}

Eigen::MatrixXd RegressionModel::predict_batch(const StateMatrix& x) const {
  return predict_design(basis.design(x));
}

RegressionModel fit_model(const PolynomialBasis& basis, const LeastSquaresProjector& projector,
                          const Eigen::MatrixXd& responses, double bound) {
  if (projector.cols() != basis.size()) {
    throw Error(ErrorCode::DimensionMismatch, "projector was built for a different basis");
  }
  if (!responses.allFinite()) throw Error(ErrorCode::NonFiniteResponse, "regression responses are not finite");
  return {basis, projector.solve(responses), bound};
}

RegressionModel fit_model(const PolynomialBasis& basis, const StateMatrix& x,
                          const Eigen::MatrixXd& responses, double bound) {
  return fit_model(basis, LeastSquaresProjector(basis.design(x)), responses, bound);
}

RegressionModel constant_model(const PolynomialBasis& basis, const Eigen::VectorXd& value, double bound) {
  RegressionModel model{basis, Eigen::MatrixXd::Zero(basis.size(), value.size()), bound};
  model.coefficients.row(0) = value.transpose();
  return model;
}

}  // namespace fbsde
