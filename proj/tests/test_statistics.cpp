#include "fbsde/error.hpp"
#include "fbsde/statistics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace {

// Student-t CDF by composite Simpson integration of the density from 0.
double t_cdf_quadrature(double t, double nu) {
  const double c = std::exp(std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2)) / std::sqrt(nu * M_PI);
  auto pdf = [&](double x) { return c * std::pow(1 + x * x / nu, -(nu + 1) / 2); };
  const int n = 2 * (1000 + static_cast<int>(std::ceil(std::abs(t) * 500)));
  const double h = t / n;
  double s = pdf(0) + pdf(t);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * pdf(k * h);
  return 0.5 + s * h / 3.0;
}

double t_quantile_oracle(double p, double nu) {
  double lo = 0.0;
  double hi = 200.0;
  for (int it = 0; it < 64; ++it) {
    const double mid = 0.5 * (lo + hi);
    (t_cdf_quadrature(mid, nu) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(IncompleteBeta, ClosedForms) {
  for (double x : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    EXPECT_NEAR(fbsde::incomplete_beta(1, 1, x), x, 1e-14);
    EXPECT_NEAR(fbsde::incomplete_beta(3, 1, x), x * x * x, 1e-14);
    EXPECT_NEAR(fbsde::incomplete_beta(1, 2, x), 1 - (1 - x) * (1 - x), 1e-14);
  }
  EXPECT_NEAR(fbsde::incomplete_beta(7.5, 7.5, 0.5), 0.5, 1e-14);
  EXPECT_NEAR(fbsde::incomplete_beta(2.5, 4, 0.3) + fbsde::incomplete_beta(4, 2.5, 0.7), 1.0, 1e-13);
}

TEST(StudentT, CdfAgainstQuadrature) {
  for (double nu : {1.0, 3.0, 20.0, 100.0}) {
    for (double t : {0.3, 1.0, 2.5}) {
      EXPECT_NEAR(fbsde::student_t_cdf(t, nu), t_cdf_quadrature(t, nu), 1e-10);
      EXPECT_NEAR(fbsde::student_t_cdf(-t, nu), 1 - t_cdf_quadrature(t, nu), 1e-10);
    }
  }
  // Cauchy.
  EXPECT_NEAR(fbsde::student_t_cdf(1.0, 1.0), 0.75, 1e-14);
}

TEST(StudentT, QuantileAgainstQuadratureOracle) {
  const double q = fbsde::t_quantile(0.975, 20);
  EXPECT_NEAR(q, 2.0860, 1e-4);
  EXPECT_NEAR(q, t_quantile_oracle(0.975, 20), 1e-8);
  for (double nu : {1.0, 2.0, 5.0, 30.0}) {
    for (double p : {0.6, 0.9, 0.995}) {
      EXPECT_NEAR(fbsde::t_quantile(p, nu), t_quantile_oracle(p, nu), 1e-7 * std::max(1.0, t_quantile_oracle(p, nu)));
    }
  }
  EXPECT_NEAR(fbsde::t_quantile(0.5, 4), 0.0, 1e-12);
  EXPECT_NEAR(fbsde::t_quantile(0.025, 20), -q, 1e-10);
  EXPECT_NEAR(fbsde::t_quantile(0.975, 1), std::tan(M_PI * 0.475), 1e-8);
}

TEST(BatchCi, FormulaAndErrors) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto ci = fbsde::batch_ci(v, 0.95);
  EXPECT_DOUBLE_EQ(ci.mean, 2.5);
  const double s = std::sqrt(5.0 / 3.0);
  EXPECT_NEAR(ci.stddev, s, 1e-14);
  EXPECT_NEAR(ci.half_width, fbsde::t_quantile(0.975, 3) * s / 2.0, 1e-12);
  EXPECT_NEAR(ci.lower, 2.5 - ci.half_width, 1e-14);
  EXPECT_NEAR(ci.upper, 2.5 + ci.half_width, 1e-14);
  try {
    fbsde::batch_ci({1.0});
    FAIL();
  } catch (const fbsde::Error& e) {
    EXPECT_EQ(e.code(), fbsde::ErrorCode::TooFewBatches);
  }
}

TEST(BatchCi, CoverageOnGaussianErrors) {
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> g(3.0, 0.7);
  const int reps = 2000;
  int covered = 0;
  for (int r = 0; r < reps; ++r) {
    std::vector<double> v(21);
    for (double& x : v) x = g(rng);
    const auto ci = fbsde::batch_ci(v, 0.95);
    covered += (ci.lower <= 3.0 && 3.0 <= ci.upper) ? 1 : 0;
  }
  EXPECT_NEAR(covered / static_cast<double>(reps), 0.95, 0.03);
}

TEST(ConvergenceRate, ExactPowerLaws) {
  const std::vector<double> Ns{5, 10, 15, 20};
  std::vector<double> e;
  for (double n : Ns) e.push_back(3.0 * std::pow(n, -2.0));
  EXPECT_NEAR(fbsde::convergence_rate(Ns, e), 2.0, 1e-12);
  const auto pw = fbsde::pairwise_rates(Ns, e);
  ASSERT_EQ(pw.size(), 3u);
  for (double r : pw) EXPECT_NEAR(r, 2.0, 1e-12);
}

TEST(ConvergenceRate, LeastSquaresSlope) {
  // Slope of log2 e against log2 N, negated; checked against the closed-form
  // regression slope.
  const std::vector<double> Ns{10, 20, 40};
  const std::vector<double> e{1.0, 0.4, 0.2};
  std::vector<double> x, y;
  for (int k = 0; k < 3; ++k) {
    x.push_back(std::log2(Ns[k]));
    y.push_back(std::log2(e[k]));
  }
  const double xm = (x[0] + x[1] + x[2]) / 3;
  const double ym = (y[0] + y[1] + y[2]) / 3;
  double sxy = 0, sxx = 0;
  for (int k = 0; k < 3; ++k) {
    sxy += (x[k] - xm) * (y[k] - ym);
    sxx += (x[k] - xm) * (x[k] - xm);
  }
  EXPECT_NEAR(fbsde::convergence_rate(Ns, e), -sxy / sxx, 1e-12);
}

TEST(ConvergenceRate, Errors) {
  try {
    fbsde::convergence_rate({1, 2}, {0.1, 0.0});
    FAIL();
  } catch (const fbsde::Error& e) {
    EXPECT_EQ(e.code(), fbsde::ErrorCode::NonPositiveError);
  }
  EXPECT_THROW(fbsde::convergence_rate({1}, {0.1}), fbsde::Error);
  EXPECT_THROW(fbsde::convergence_rate({1, 2}, {0.1}), fbsde::Error);
}
