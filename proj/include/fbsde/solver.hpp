#pragma once

// Backward predictor-corrector pass. For i = N-m down to 0:
//   z_i  = T_Cz( E_i[ sum_j lambda_j Y_{i+j} (W_{i+j} - W_i) ] )
//   y~_i = T_Cy( E_i[ sum_j a~_j Y_{i+j} + h sum_j g~_j f_{i+j} ] )
//   y_i  = T_Cy( E_i[ sum_j a_j Y_{i+j} + h g0 f(t_i, X_i, y~_i, z_i) + h sum_j g_j f_{i+j} ] )
// with conditional expectations estimated by least squares on a polynomial
// basis in X_i. Levels N-1 .. N-m+1 come from a one-step bootstrap on a
// refined grid.

#include "fbsde/problems.hpp"
#include "fbsde/rational.hpp"
#include "fbsde/regression.hpp"
#include "fbsde/scheme.hpp"
#include "fbsde/simulation.hpp"
#include "fbsde/stability.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace fbsde {

struct SolverConfig {
  MultistepScheme<double> scheme;
  GridSpec grid;
  int basis_degree = 2;
  /// Override the problem's truncation bounds.
  std::optional<double> bound_y;
  std::optional<double> bound_z;
  /// Fine steps per coarse step in the bootstrap; 0 selects
  /// ceil(h^{-(m-1)/2}) capped at max_auto_substeps.
  int bootstrap_substeps = 0;
  int max_auto_substeps = 64;
  /// Regression-free scalar recursion (sigma = 0 problems only).
  bool deterministic_mode = false;
  /// Accept schemes whose characteristic polynomial fails the root condition.
  bool allow_unstable = false;
  /// Subtract mean-zero martingale terms from the regression responses.
  bool control_variates = true;
  /// Constant added to every corrector response (levels 0 .. N-m).
  double perturbation_y = 0.0;
  /// Constant added to every Z response (levels 0 .. N-m).
  double perturbation_z = 0.0;
  double root_tolerance = kDefaultRootTolerance;
  unsigned threads = 0;
};

SolverConfig make_solver_config(const MultistepScheme<Rational>& scheme, const GridSpec& grid);

/// Bootstrap substeps actually used for the configuration.
int bootstrap_substeps(const SolverConfig& config);

/// Stability verdict of the configured scheme. Throws UnstableScheme unless the
/// verdict is Stable or allow_unstable is set.
StabilityVerdict validate_config(const SolverConfig& config);

struct BackwardSolution {
  /// Models for levels 0 .. N-1; level N is the terminal rule.
  std::vector<RegressionModel> y_models;
  std::vector<RegressionModel> z_models;
  double y0 = 0.0;
  Eigen::VectorXd z0;
  /// milne_factor * mean |y~_i - y_i| for i = 0 .. N-m.
  std::vector<double> milne;
  /// NaN when the predictor and corrector error constants coincide.
  double milne_factor = 0.0;
  int substeps = 1;
  double runtime_sec = 0.0;
  StabilityStatus stability = StabilityStatus::Stable;
};

/// Y_i = y_i(X_i) for a level 0 <= i <= N, using the terminal rule at N.
Eigen::VectorXd evaluate_level_y(const BackwardSolution& solution, const FbsdeProblem& problem,
                                 int level, int N, const StateMatrix& x);

BackwardSolution solve(const FbsdeProblem& problem, const SolverConfig& config,
                       const PathEnsemble& ensemble);

/// Simulates M paths from the seed and solves on them (or runs the
/// deterministic recursion when deterministic_mode is set).
BackwardSolution solve(const FbsdeProblem& problem, const SolverConfig& config, Eigen::Index M,
                       std::uint64_t seed, const SimulationLimits& limits = {});

nlohmann::json solution_to_json(const BackwardSolution& solution, const SolverConfig& config,
                                const FbsdeProblem& problem);

// Deterministic reduction ---------------------------------------------------

struct DeterministicSolution {
  std::vector<double> t;       // t_0 .. t_N
  std::vector<Eigen::VectorXd> x;  // drift flow x_0 .. x_N
  std::vector<double> y;       // Y_0 .. Y_N
  std::vector<double> y_pred;  // predictor values, NaN on bootstrap levels and at N
  std::vector<double> milne;   // i = 0 .. N-m
  double milne_factor = 0.0;
  int substeps = 1;
};

/// Scheme recursion on scalars for a problem with sigma = 0 (z = 0). Throws
/// NotDeterministic when sigma does not vanish along the path.
DeterministicSolution deterministic_solve(const FbsdeProblem& problem, const SolverConfig& config);

struct LocalErrorProbe {
  double local_error = 0.0;  // u(t_i) - Y_i
  double indicator = 0.0;    // milne_factor * |Y~_i - Y_i|
  double predictor_gap = 0.0;
};

/// One step of the deterministic recursion at level i started from the exact
/// solution at levels i+1 .. i+m.
LocalErrorProbe deterministic_local_step(const FbsdeProblem& problem, const SolverConfig& config, int i);

}  // namespace fbsde
