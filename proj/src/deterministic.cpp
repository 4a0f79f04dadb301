#include "fbsde/error.hpp"
#include "fbsde/solver.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace fbsde {

namespace {

struct ScalarPath {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> x;
};

void require_zero_diffusion(const FbsdeProblem& problem, double t, const Eigen::VectorXd& x) {
  if (problem.sigma(t, x).cwiseAbs().maxCoeff() != 0.0) {
    throw Error(ErrorCode::NotDeterministic,
                "problem '" + problem.name + "' has non-zero diffusion at t=" + std::to_string(t));
  }
}

// Euler flow of x' = b(t, x) on n steps of size step from (t0, x0).
ScalarPath drift_path(const FbsdeProblem& problem, double t0, const Eigen::VectorXd& x0, int n, double step,
                      double t_end) {
  ScalarPath p;
  p.t.resize(n + 1);
  p.x.resize(n + 1);
  p.x[0] = x0;
  for (int k = 0; k <= n; ++k) p.t[k] = k == n ? t_end : t0 + k * step;
  for (int k = 0; k < n; ++k) {
    require_zero_diffusion(problem, p.t[k], p.x[k]);
    p.x[k + 1] = p.x[k] + step * problem.b(p.t[k], p.x[k]);
  }
  require_zero_diffusion(problem, p.t[n], p.x[n]);
  return p;
}

// (predictor, corrector) at level k from the values at k+1 .. k+m.
std::pair<double, double> scalar_step(const FbsdeProblem& problem, const MultistepScheme<double>& s,
                                      double t, const Eigen::VectorXd& x, double h, const double* y_next,
                                      const double* f_next) {
  const int m = s.steps();
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(problem.d);
  double pred = 0.0;
  double corr = 0.0;
  for (int j = 0; j < m; ++j) {
    pred += s.predictor.alpha(j) * y_next[j] + h * s.predictor.gamma(j) * f_next[j];
    corr += s.corrector.alpha(j) * y_next[j] + h * s.corrector.gamma(j) * f_next[j];
  }
  corr += h * s.corrector.gamma0 * problem.f(t, x, pred, z);
  return {pred, corr};
}

double safe_milne_factor(const MultistepScheme<double>& scheme) {
  try {
    return milne_factor(scheme);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateIndicator) throw;
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

DeterministicSolution deterministic_solve(const FbsdeProblem& problem, const SolverConfig& config) {
  validate_config(config);
  const MultistepScheme<double>& scheme = config.scheme;
  const int m = scheme.steps();
  const int N = config.grid.N;
  const double h = config.grid.h;
  const double T = config.grid.T;
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(problem.d);

  const ScalarPath path = drift_path(problem, 0.0, problem.x0, N, h, T);

  DeterministicSolution out;
  out.t = path.t;
  out.x = path.x;
  out.y.assign(N + 1, 0.0);
  out.y_pred.assign(N + 1, std::numeric_limits<double>::quiet_NaN());
  out.milne.assign(N - m + 1, 0.0);
  out.milne_factor = safe_milne_factor(scheme);
  out.substeps = bootstrap_substeps(config);
  std::vector<double> f(N + 1, 0.0);

  out.y[N] = problem.phi(path.x[N]);
  f[N] = problem.f(T, path.x[N], out.y[N], z);

  if (m > 1) {
    const int start = N - m + 1;
    const int r = out.substeps;
    const int fine_steps = (m - 1) * r;
    const double hf = h / r;
    const ScalarPath fine = drift_path(problem, path.t[start], path.x[start], fine_steps, hf, T);
    const MultistepScheme<double> one_step = scheme_cast<double>(stable_preset<Rational>(1));
    double y_next = problem.phi(fine.x[fine_steps]);
    double f_next = problem.f(T, fine.x[fine_steps], y_next, z);
    for (int n = fine_steps - 1; n >= 0; --n) {
      const double y_now = scalar_step(problem, one_step, fine.t[n], fine.x[n], hf, &y_next, &f_next).second;
      f_next = problem.f(fine.t[n], fine.x[n], y_now, z);
      y_next = y_now;
      if (n % r == 0) {
        const int q = start + n / r;
        out.y[q] = y_now;
        f[q] = problem.f(path.t[q], path.x[q], y_now, z);
      }
    }
  }

  for (int i = N - m; i >= 0; --i) {
    auto [pred, corr] = scalar_step(problem, scheme, path.t[i], path.x[i], h, &out.y[i + 1], &f[i + 1]);
    corr += config.perturbation_y;
    out.y_pred[i] = pred;
    out.y[i] = corr;
    f[i] = problem.f(path.t[i], path.x[i], corr, z);
    out.milne[i] = out.milne_factor * std::abs(pred - corr);
  }
  return out;
}

LocalErrorProbe deterministic_local_step(const FbsdeProblem& problem, const SolverConfig& config, int i) {
  validate_config(config);
  if (!problem.closed_form) throw Error(ErrorCode::NoClosedForm, "local error probe needs a closed form");
  const MultistepScheme<double>& scheme = config.scheme;
  const int m = scheme.steps();
  const int N = config.grid.N;
  if (i < 0 || i + m > N) throw Error(ErrorCode::InvalidArgument, "probe level out of range");
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(problem.d);
  const ScalarPath path = drift_path(problem, 0.0, problem.x0, N, config.grid.h, config.grid.T);

  std::vector<double> y(m), f(m);
  for (int j = 0; j < m; ++j) {
    const int k = i + 1 + j;
    y[j] = problem.closed_form->u(path.t[k], path.x[k]);
    f[j] = problem.f(path.t[k], path.x[k], y[j], z);
  }
  const auto [pred, corr] = scalar_step(problem, scheme, path.t[i], path.x[i], config.grid.h, y.data(), f.data());
  LocalErrorProbe probe;
  probe.local_error = problem.closed_form->u(path.t[i], path.x[i]) - corr;
  probe.predictor_gap = pred - corr;
  probe.indicator = safe_milne_factor(scheme) * std::abs(pred - corr);
  return probe;
}

}  // namespace fbsde
