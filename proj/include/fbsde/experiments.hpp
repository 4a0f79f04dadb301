#pragma once

// Convergence ladders with batch-mean confidence intervals, stability
// demonstrations and report writers.

#include "fbsde/problems.hpp"
#include "fbsde/solver.hpp"
#include "fbsde/statistics.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fbsde {

enum class ZNorm { Euclidean, First, Max };

ZNorm parse_z_norm(const std::string& name);

struct TrialResult {
  double err_y = 0.0;
  double err_z = 0.0;
  double runtime_sec = 0.0;
  double y0 = 0.0;
  Eigen::VectorXd z0;
};

/// One simulate-and-solve on a grid of N steps over the problem horizon,
/// compared with the closed form at (0, x0). `config.grid` is overwritten.
TrialResult run_trial(const FbsdeProblem& problem, SolverConfig config, int N, Eigen::Index M,
                      std::uint64_t seed, ZNorm z_norm = ZNorm::Euclidean);

struct LadderPoint {
  int N = 0;
  Eigen::Index M = 0;
};

struct TrialLadder {
  std::vector<LadderPoint> points;
  int batches = 21;
  std::uint64_t seed = 1;
  double level = 0.95;
  ZNorm z_norm = ZNorm::Euclidean;
  /// Concurrent trials; 0 means one per hardware core.
  unsigned threads = 0;
};

/// (N, M) pairs used for the published ladder: 5/2778, 10/5996, 15/8809, 20/12018.
std::vector<LadderPoint> published_ladder_points();

/// Seed of batch b, independent of the other batches and of the row.
std::uint64_t batch_seed(std::uint64_t base, int batch);

struct ConvergenceRow {
  int N = 0;
  Eigen::Index M = 0;
  ConfidenceInterval y;
  ConfidenceInterval z;
  double runtime_sec = 0.0;  // mean per trial
  std::vector<double> batch_err_y;
  std::vector<double> batch_err_z;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::optional<double> rate_y;
  std::optional<double> rate_z;
  std::vector<double> pairwise_y;
  std::vector<double> pairwise_z;
  nlohmann::json metadata = nlohmann::json::object();
};

ConvergenceReport run_ladder(const FbsdeProblem& problem, const SolverConfig& config, const TrialLadder& ladder);

/// Fills the fitted and pairwise rates from the row means when defined.
void compute_rates(ConvergenceReport& report);

struct StabilityDemoResult {
  std::vector<int> Ns;
  std::vector<double> errors;      // |Y0 - u(0, x0)|
  std::vector<double> max_errors;  // max_i |Y_i - u(t_i, x_i)|, deterministic mode only
  bool decreasing = false;
  std::string classification;      // "decreasing" or "irregular/divergent"
};

/// "decreasing" when every error is finite, each error is at most 1.5 times
/// its predecessor scaled by (N_prev / N)^expected_order, and the last error is
/// below the first.
bool classify_decreasing(const std::vector<int>& Ns, const std::vector<double>& errors,
                         double expected_order = 0.0);

StabilityDemoResult stability_demo(const FbsdeProblem& problem, SolverConfig config, const std::vector<int>& Ns,
                                   Eigen::Index M, std::uint64_t seed, double expected_order = 0.0);

nlohmann::json stability_demo_to_json(const StabilityDemoResult& result);

enum class ReportFormat { Csv, Json };

ReportFormat parse_report_format(const std::string& name);

/// Header N,M,errY,ciYlo,ciYhi,errZ,ciZlo,ciZhi,runtime, one row per ladder
/// point, and a "# CR_Y=..,CR_Z=.." footer when rates are defined. With
/// include_runtime false the runtime column is written as 0 so reports are
/// reproducible byte for byte.
std::string report_csv(const ConvergenceReport& report, bool include_runtime = true);
nlohmann::json report_json(const ConvergenceReport& report, bool include_runtime = true);
/// Whitespace-separated columns log2N log2errY log2errZ.
std::string report_plot_data(const ConvergenceReport& report);

/// Writes `path` in the requested format and `path + ".plot.dat"` next to it.
void emit_report(const ConvergenceReport& report, const std::string& path, ReportFormat format,
                 bool include_runtime = true);

}  // namespace fbsde
