#include "fbsde/solver.hpp"

#include "fbsde/error.hpp"
#include "fbsde/parallel.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

namespace fbsde {

SolverConfig make_solver_config(const MultistepScheme<Rational>& scheme, const GridSpec& grid) {
  SolverConfig config;
  config.scheme = scheme_cast<double>(scheme);
  config.grid = grid;
  return config;
}

int bootstrap_substeps(const SolverConfig& config) {
  const int m = config.scheme.steps();
  if (m <= 1) return 1;
  if (config.bootstrap_substeps > 0) return config.bootstrap_substeps;
  const double wanted = std::pow(config.grid.h, -0.5 * (m - 1));
  const int cap = std::max(1, config.max_auto_substeps);
  if (!(wanted < cap)) return cap;
  return std::max(1, static_cast<int>(std::ceil(wanted - 1e-9)));
}

StabilityVerdict validate_config(const SolverConfig& config) {
  const int m = config.scheme.steps();
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "scheme has no steps");
  if (config.grid.N < m) {
    throw Error(ErrorCode::InvalidArgument, "grid has N=" + std::to_string(config.grid.N) +
                                                " steps, fewer than the scheme's m=" + std::to_string(m));
  }
  if (config.basis_degree < 0) throw Error(ErrorCode::InvalidArgument, "basis degree must be nonnegative");
  StabilityVerdict verdict = scheme_stability(config.scheme, config.root_tolerance);
  if (verdict.status != StabilityStatus::Stable && !config.allow_unstable) {
    throw Error(ErrorCode::UnstableScheme,
                "scheme '" + config.scheme.name + "' is " + std::string(to_string(verdict.status)) +
                    " under the root condition; pass the unstable override to run it anyway");
  }
  return verdict;
}

namespace {

double safe_milne_factor(const MultistepScheme<double>& scheme) {
  try {
    return milne_factor(scheme);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateIndicator) throw;
    return std::numeric_limits<double>::quiet_NaN();
  }
}

// Values of one level on the paths of a lattice.
struct Level {
  Eigen::VectorXd y;
  StateMatrix z;
  Eigen::VectorXd f;
  std::optional<RegressionModel> y_model;  // empty: terminal rule
};

struct Lattice {
  std::vector<double> t;
  double h = 0.0;
  const std::vector<StateMatrix>* X = nullptr;
  const std::vector<StateMatrix>* dW = nullptr;
};

struct Context {
  const FbsdeProblem& problem;
  const SolverConfig& config;
  PolynomialBasis basis;
  double bound_y;
  double bound_z;
};

struct StepOutput {
  RegressionModel y;
  RegressionModel z;
  double mean_gap = 0.0;
};

Eigen::VectorXd driver_rows(const Context& ctx, double t, const StateMatrix& x,
                            const Eigen::VectorXd& y, const StateMatrix& z) {
  Eigen::VectorXd out(x.rows());
  parallel_for(
      static_cast<std::size_t>(x.rows()),
      [&](std::size_t r) {
        out(r) = ctx.problem.f(t, x.row(r).transpose(), y(r), z.row(r).transpose());
      },
      ctx.config.threads);
  if (!out.allFinite()) {
    throw Error(ErrorCode::NonFiniteResponse, "driver produced a non-finite value at t=" + std::to_string(t));
  }
  return out;
}

Level terminal_level(const Context& ctx, const StateMatrix& x) {
  TerminalValues tv = terminal_values(ctx.problem, x);
  Level level{std::move(tv.y), std::move(tv.z), Eigen::VectorXd(), std::nullopt};
  level.f = driver_rows(ctx, ctx.problem.T, x, level.y, level.z);
  return level;
}

Level model_level(const Context& ctx, double t, const StateMatrix& x, const RegressionModel& y_model,
                  const RegressionModel& z_model) {
  const Eigen::MatrixXd design = ctx.basis.design(x);
  Level level{y_model.predict_design(design).col(0), z_model.predict_design(design), Eigen::VectorXd(),
              y_model};
  level.f = driver_rows(ctx, t, x, level.y, level.z);
  return level;
}

bool is_point_mass(const StateMatrix& x) {
  return x.rows() == 0 || (x.rowwise() - x.row(0)).cwiseAbs().maxCoeff() == 0.0;
}

// Computes level k of the lattice from levels k+1 .. k+m and stores it.
StepOutput backward_step(const Context& ctx, const MultistepScheme<double>& scheme, const Lattice& lat,
                         int k, std::vector<std::optional<Level>>& levels, bool perturb) {
  const int m = scheme.steps();
  const double h = lat.h;
  const double t = lat.t[k];
  const StateMatrix& xk = (*lat.X)[k];
  const Eigen::Index M = xk.rows();
  const int d = static_cast<int>(xk.cols());

  const bool point_mass = is_point_mass(xk);
  Eigen::MatrixXd design;
  std::optional<LeastSquaresProjector> projector;
  if (!point_mass) {
    design = ctx.basis.design(xk);
    projector.emplace(design);
  }
  auto fit = [&](const Eigen::MatrixXd& responses, double bound) {
    if (!responses.allFinite()) {
      throw Error(ErrorCode::NonFiniteResponse, "non-finite regression response at t=" + std::to_string(t));
    }
    if (point_mass) return constant_model(ctx.basis, responses.colwise().mean().transpose(), bound);
    return fit_model(ctx.basis, *projector, responses, bound);
  };
  auto predict = [&](const RegressionModel& model) -> Eigen::MatrixXd {
    if (point_mass) return model.predict(Eigen::VectorXd(xk.row(0).transpose())).transpose().replicate(M, 1);
    return model.predict_design(design);
  };

  // Brownian displacement W_{k+j} - W_k, j = 1..m.
  std::vector<StateMatrix> disp(m + 1);
  disp[0] = StateMatrix::Zero(M, d);
  for (int j = 1; j <= m; ++j) disp[j] = disp[j - 1] + (*lat.dW)[k + j - 1];

  const Level& next = *levels[k + 1];
  Eigen::VectorXd baseline = Eigen::VectorXd::Zero(M);
  if (ctx.config.control_variates) {
    if (next.y_model) {
      baseline = predict(*next.y_model).col(0);
    } else {
      for (Eigen::Index r = 0; r < M; ++r) baseline(r) = ctx.problem.phi(xk.row(r).transpose());
    }
  }

  StateMatrix sz = StateMatrix::Zero(M, d);
  for (int j = 1; j <= m; ++j) {
    const double weight = scheme.zweights.lambda_h(j) / h;
    const Eigen::VectorXd centred = levels[k + j]->y - baseline;
    sz.array() += weight * (disp[j].array().colwise() * centred.array());
  }
  if (perturb && ctx.config.perturbation_z != 0.0) sz.array() += ctx.config.perturbation_z;
  RegressionModel z_model = fit(sz, ctx.bound_z);
  const StateMatrix zc = predict(z_model);

  auto martingale = [&](const Eigen::VectorXd& weights) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(M);
    if (!ctx.config.control_variates) return out;
    for (int j = 1; j <= m; ++j) out += weights(j - 1) * zc.cwiseProduct(disp[j]).rowwise().sum();
    return out;
  };

  Eigen::VectorXd s_pred = -martingale(scheme.predictor.alpha);
  for (int j = 1; j <= m; ++j) {
    const Level& lv = *levels[k + j];
    s_pred += scheme.predictor.alpha(j - 1) * lv.y + h * scheme.predictor.gamma(j - 1) * lv.f;
  }
  const RegressionModel pred_model = fit(s_pred, ctx.bound_y);
  const Eigen::VectorXd y_tilde = predict(pred_model).col(0);
  const Eigen::VectorXd f_tilde = driver_rows(ctx, t, xk, y_tilde, zc);

  Eigen::VectorXd s_corr = h * scheme.corrector.gamma0 * f_tilde - martingale(scheme.corrector.alpha);
  for (int j = 1; j <= m; ++j) {
    const Level& lv = *levels[k + j];
    s_corr += scheme.corrector.alpha(j - 1) * lv.y + h * scheme.corrector.gamma(j - 1) * lv.f;
  }
  if (perturb && ctx.config.perturbation_y != 0.0) s_corr.array() += ctx.config.perturbation_y;
  RegressionModel y_model = fit(s_corr, ctx.bound_y);
  const Eigen::VectorXd yc = predict(y_model).col(0);

  Level level{yc, zc, driver_rows(ctx, t, xk, yc, zc), y_model};
  levels[k] = std::move(level);
  return {std::move(y_model), std::move(z_model), (y_tilde - yc).cwiseAbs().mean()};
}

// Fills levels N-m+1 .. N-1 of the coarse grid by the one-step scheme on a
// refined grid anchored at the coarse paths.
void run_bootstrap(const Context& ctx, const PathEnsemble& ens, int r, BackwardSolution& out,
                   std::vector<std::optional<Level>>& coarse) {
  const int m = ctx.config.scheme.steps();
  const int N = ens.grid.N;
  const int start = N - m + 1;
  const int fine_steps = (m - 1) * r;
  const double h = ens.grid.h;
  const double hf = h / r;

  std::vector<StateMatrix> fine_dw;
  fine_dw.reserve(fine_steps);
  for (int q = start; q < N; ++q) {
    auto pieces = bridge_refinement(ens.dW[q], h, r, ens.seed, q, ctx.config.threads);
    for (auto& p : pieces) fine_dw.push_back(std::move(p));
  }

  Lattice lat;
  lat.h = hf;
  lat.t.resize(fine_steps + 1);
  for (int n = 0; n <= fine_steps; ++n) {
    lat.t[n] = n == fine_steps ? ens.grid.T : ens.grid.time(start) + n * hf;
  }
  std::vector<StateMatrix> fine_x(fine_steps + 1);
  fine_x[0] = ens.X[start];
  for (int n = 0; n < fine_steps; ++n) {
    fine_x[n + 1].resize(ens.M, ens.d);
    parallel_for(
        static_cast<std::size_t>(ens.M),
        [&](std::size_t row) {
          const Eigen::VectorXd x = fine_x[n].row(row).transpose();
          const Eigen::VectorXd nx = x + hf * ctx.problem.b(lat.t[n], x) +
                                     ctx.problem.sigma(lat.t[n], x) * fine_dw[n].row(row).transpose();
          fine_x[n + 1].row(row) = nx.transpose();
        },
        ctx.config.threads);
    if (!fine_x[n + 1].allFinite()) throw Error(ErrorCode::NonFiniteState, "non-finite state in the bootstrap grid");
  }
  lat.X = &fine_x;
  lat.dW = &fine_dw;

  const MultistepScheme<double> one_step = scheme_cast<double>(stable_preset<Rational>(1));
  std::vector<std::optional<Level>> fine(fine_steps + 1);
  fine[fine_steps] = terminal_level(ctx, fine_x[fine_steps]);
  for (int n = fine_steps - 1; n >= 0; --n) {
    StepOutput step = backward_step(ctx, one_step, lat, n, fine, false);
    if (n + 1 < fine_steps) fine[n + 1].reset();  // only the previous level is needed
    if (n % r == 0) {
      const int q = start + n / r;
      out.y_models[q] = std::move(step.y);
      out.z_models[q] = std::move(step.z);
    }
  }
  for (int q = start; q < N; ++q) {
    coarse[q] = model_level(ctx, ens.grid.time(q), ens.X[q], out.y_models[q], out.z_models[q]);
  }
}

BackwardSolution deterministic_as_backward(const FbsdeProblem& problem, const SolverConfig& config) {
  const auto begin = std::chrono::steady_clock::now();
  const DeterministicSolution det = deterministic_solve(problem, config);
  BackwardSolution out;
  out.y0 = det.y.front();
  out.z0 = Eigen::VectorXd::Zero(problem.d);
  out.milne = det.milne;
  out.milne_factor = det.milne_factor;
  out.substeps = det.substeps;
  out.stability = scheme_stability(config.scheme, config.root_tolerance).status;
  out.runtime_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
  return out;
}

}  // namespace

Eigen::VectorXd evaluate_level_y(const BackwardSolution& solution, const FbsdeProblem& problem, int level,
                                 int N, const StateMatrix& x) {
  if (level < 0 || level > N) throw Error(ErrorCode::InvalidArgument, "level out of range");
  if (level == N) return terminal_values(problem, x).y;
  return solution.y_models.at(level).predict_batch(x).col(0);
}

BackwardSolution solve(const FbsdeProblem& problem, const SolverConfig& config, const PathEnsemble& ensemble) {
  if (config.deterministic_mode) return deterministic_as_backward(problem, config);

  const auto begin = std::chrono::steady_clock::now();
  const StabilityVerdict verdict = validate_config(config);
  const GridSpec& grid = ensemble.grid;
  if (grid.N != config.grid.N || grid.T != config.grid.T) {
    throw Error(ErrorCode::DimensionMismatch, "ensemble grid does not match the solver grid");
  }
  if (ensemble.d != problem.d) throw Error(ErrorCode::DimensionMismatch, "ensemble dimension does not match the problem");

  const int N = grid.N;
  const int m = config.scheme.steps();
  Context ctx{problem, config, build_basis(problem.d, config.basis_degree),
              config.bound_y.value_or(problem.bound_y), config.bound_z.value_or(problem.bound_z)};

  BackwardSolution out;
  out.stability = verdict.status;
  out.milne_factor = safe_milne_factor(config.scheme);
  out.substeps = bootstrap_substeps(config);
  out.y_models.resize(N);
  out.z_models.resize(N);
  out.milne.assign(N - m + 1, 0.0);

  std::vector<std::optional<Level>> levels(N + 1);
  levels[N] = terminal_level(ctx, ensemble.X[N]);
  if (m > 1) run_bootstrap(ctx, ensemble, out.substeps, out, levels);

  Lattice lat;
  lat.h = grid.h;
  lat.t.resize(N + 1);
  for (int i = 0; i <= N; ++i) lat.t[i] = grid.time(i);
  lat.X = &ensemble.X;
  lat.dW = &ensemble.dW;

  for (int i = N - m; i >= 0; --i) {
    StepOutput step = backward_step(ctx, config.scheme, lat, i, levels, true);
    out.milne[i] = out.milne_factor * step.mean_gap;
    out.y_models[i] = std::move(step.y);
    out.z_models[i] = std::move(step.z);
    if (i + m <= N) levels[i + m].reset();
  }

  const Eigen::VectorXd x0 = ensemble.X[0].row(0).transpose();
  out.y0 = out.y_models[0].predict_scalar(x0);
  out.z0 = out.z_models[0].predict(x0);
  out.runtime_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
  return out;
}

BackwardSolution solve(const FbsdeProblem& problem, const SolverConfig& config, Eigen::Index M,
                       std::uint64_t seed, const SimulationLimits& limits) {
  if (config.deterministic_mode) return deterministic_as_backward(problem, config);
  validate_config(config);
  const auto begin = std::chrono::steady_clock::now();
  SimulationLimits sim = limits;
  if (sim.threads == 0) sim.threads = config.threads;
  const PathEnsemble ensemble = simulate(problem, config.grid, M, seed, sim);
  BackwardSolution out = solve(problem, config, ensemble);
  out.runtime_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
  return out;
}

nlohmann::json solution_to_json(const BackwardSolution& solution, const SolverConfig& config,
                                const FbsdeProblem& problem) {
  using nlohmann::json;
  auto number = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json milne = json::array();
  for (double v : solution.milne) milne.push_back(number(v));
  json z0 = json::array();
  for (Eigen::Index k = 0; k < solution.z0.size(); ++k) z0.push_back(solution.z0(k));
  const double by = config.bound_y.value_or(problem.bound_y);
  const double bz = config.bound_z.value_or(problem.bound_z);
  return json{{"y0", solution.y0},
              {"z0", z0},
              {"milne", milne},
              {"milne_factor", number(solution.milne_factor)},
              {"config",
               {{"problem", problem.name},
                {"scheme", config.scheme.name},
                {"m", config.scheme.steps()},
                {"N", config.grid.N},
                {"T", config.grid.T},
                {"basis_degree", config.basis_degree},
                {"bound_y", number(by)},
                {"bound_z", number(bz)},
                {"bootstrap_substeps", solution.substeps},
                {"deterministic", config.deterministic_mode},
                {"control_variates", config.control_variates},
                {"stability", std::string(to_string(solution.stability))}}},
              {"runtime_sec", solution.runtime_sec}};
}

}  // namespace fbsde
