#include "fbsde/statistics.hpp"

#include "fbsde/error.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace fbsde {

namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) return h;
  }
  throw Error(ErrorCode::NonConvergence, "incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw Error(ErrorCode::InvalidArgument, "degrees of freedom must be positive");
  if (t == 0.0) return 0.5;
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return t > 0.0 ? 1.0 - tail : tail;
}

double t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidArgument, "probability must lie in (0, 1)");
  if (!(df > 0.0)) throw Error(ErrorCode::InvalidArgument, "degrees of freedom must be positive");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -t_quantile(1.0 - p, df);

  // Upper-tail mass q = 1 - p; solve 0.5 I_{df/(df+t^2)}(df/2, 1/2) = q on t > 0.
  const double q = 1.0 - p;
  auto tail = [df](double t) { return 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t)); };
  double lo = 0.0;
  double hi = 1.0;
  while (tail(hi) > q) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw Error(ErrorCode::NonConvergence, "t quantile bracket overflow");
  }
  const double log_norm = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                          0.5 * std::log(df * M_PI);
  double t = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double gap = tail(t) - q;  // decreasing in t
    if (gap > 0.0) lo = t; else hi = t;
    const double density = std::exp(log_norm - 0.5 * (df + 1.0) * std::log1p(t * t / df));
    double next = t + gap / density;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-13 * std::max(1.0, t) || hi - lo <= 1e-14 * std::max(1.0, t)) {
      return next;
    }
    t = next;
  }
  return t;
}

ConfidenceInterval batch_ci(const std::vector<double>& values, double level) {
  if (values.size() < 2) throw Error(ErrorCode::TooFewBatches, "a confidence interval needs at least 2 batches");
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::InvalidArgument, "confidence level must lie in (0, 1)");
  const double n = static_cast<double>(values.size());
  ConfidenceInterval ci;
  ci.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - ci.mean) * (v - ci.mean);
  ci.stddev = std::sqrt(ss / (n - 1.0));
  ci.half_width = t_quantile(0.5 * (1.0 + level), n - 1.0) * ci.stddev / std::sqrt(n);
  ci.lower = ci.mean - ci.half_width;
  ci.upper = ci.mean + ci.half_width;
  return ci;
}

namespace {

void check_rate_inputs(const std::vector<double>& Ns, const std::vector<double>& errors) {
  if (Ns.size() != errors.size()) throw Error(ErrorCode::InvalidArgument, "N and error lists differ in length");
  if (Ns.size() < 2) throw Error(ErrorCode::InvalidArgument, "a rate needs at least two points");
  for (std::size_t k = 0; k < Ns.size(); ++k) {
    if (!(errors[k] > 0.0)) {
      throw Error(ErrorCode::NonPositiveError, "error at N=" + std::to_string(Ns[k]) + " is not positive");
    }
    if (!(Ns[k] > 0.0)) throw Error(ErrorCode::InvalidArgument, "step counts must be positive");
  }
}

}  // namespace

double convergence_rate(const std::vector<double>& Ns, const std::vector<double>& errors) {
  check_rate_inputs(Ns, errors);
  const double n = static_cast<double>(Ns.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < Ns.size(); ++k) {
    sx += std::log2(Ns[k]);
    sy += std::log2(errors[k]);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < Ns.size(); ++k) {
    const double dx = std::log2(Ns[k]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log2(errors[k]) - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::InvalidArgument, "a rate needs at least two distinct N");
  return -sxy / sxx;
}

std::vector<double> pairwise_rates(const std::vector<double>& Ns, const std::vector<double>& errors) {
  check_rate_inputs(Ns, errors);
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < Ns.size(); ++k) {
    out.push_back(std::log2(errors[k] / errors[k + 1]) / std::log2(Ns[k + 1] / Ns[k]));
  }
  return out;
}

}  // namespace fbsde
