#pragma once

#include <vector>

namespace fbsde {

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double df);

/// Inverse of the Student-t CDF, absolute accuracy about 1e-10.
double t_quantile(double p, double df);

struct ConfidenceInterval {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double half_width = 0.0;
  double stddev = 0.0;  // sample standard deviation of the batch values
};

/// Batch-means interval mean -+ t_{(1+level)/2, n-1} sqrt(s^2 / n).
ConfidenceInterval batch_ci(const std::vector<double>& batch_values, double level = 0.95);

/// Negated least-squares slope of log2(error) against log2(N).
double convergence_rate(const std::vector<double>& Ns, const std::vector<double>& errors);

/// log2(e_k / e_{k+1}) / log2(N_{k+1} / N_k) for each adjacent pair.
std::vector<double> pairwise_rates(const std::vector<double>& Ns, const std::vector<double>& errors);

}  // namespace fbsde
