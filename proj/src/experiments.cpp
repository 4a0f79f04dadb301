#include "fbsde/experiments.hpp"

#include "fbsde/error.hpp"
#include "fbsde/parallel.hpp"
#include "fbsde/rng.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace fbsde {

ZNorm parse_z_norm(const std::string& name) {
  if (name == "euclidean" || name == "l2") return ZNorm::Euclidean;
  if (name == "first") return ZNorm::First;
  if (name == "max") return ZNorm::Max;
  throw Error(ErrorCode::InvalidArgument, "unknown Z norm '" + name + "' (euclidean, first, max)");
}

namespace {

double z_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b, ZNorm norm) {
  const Eigen::VectorXd diff = a - b;
  switch (norm) {
    case ZNorm::Euclidean: return diff.norm();
    case ZNorm::First: return std::abs(diff(0));
    case ZNorm::Max: return diff.cwiseAbs().maxCoeff();
  }
  return diff.norm();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

TrialResult run_trial(const FbsdeProblem& problem, SolverConfig config, int N, Eigen::Index M,
                      std::uint64_t seed, ZNorm z_norm) {
  const auto [u0, zeta0] = closed_form_reference(problem, 0.0, problem.x0);
  config.grid = make_grid(problem.T, N);
  const BackwardSolution sol = solve(problem, config, M, seed);
  TrialResult r;
  r.y0 = sol.y0;
  r.z0 = sol.z0;
  r.err_y = std::abs(sol.y0 - u0);
  r.err_z = z_distance(sol.z0, zeta0, z_norm);
  r.runtime_sec = sol.runtime_sec;
  return r;
}

std::vector<LadderPoint> published_ladder_points() { return {{5, 2778}, {10, 5996}, {15, 8809}, {20, 12018}}; }

std::uint64_t batch_seed(std::uint64_t base, int batch) {
  return mix_seed(base, static_cast<std::uint64_t>(batch));
}

void compute_rates(ConvergenceReport& report) {
  report.rate_y.reset();
  report.rate_z.reset();
  report.pairwise_y.clear();
  report.pairwise_z.clear();
  std::vector<double> ns, ey, ez;
  for (const auto& row : report.rows) {
    ns.push_back(row.N);
    ey.push_back(row.y.mean);
    ez.push_back(row.z.mean);
  }
  auto fill = [&](const std::vector<double>& e, std::optional<double>& rate, std::vector<double>& pairs) {
    if (ns.size() < 2) return;
    for (double v : e) {
      if (!(v > 0.0)) return;
    }
    rate = convergence_rate(ns, e);
    pairs = pairwise_rates(ns, e);
  };
  fill(ey, report.rate_y, report.pairwise_y);
  fill(ez, report.rate_z, report.pairwise_z);
}

ConvergenceReport run_ladder(const FbsdeProblem& problem, const SolverConfig& config, const TrialLadder& ladder) {
  if (ladder.batches < 2) throw Error(ErrorCode::TooFewBatches, "a ladder needs at least 2 batches");
  for (const auto& p : ladder.points) {
    if (p.N < 1 || p.M < 1) throw Error(ErrorCode::InvalidArgument, "ladder points need positive N and M");
  }
  const std::size_t rows = ladder.points.size();
  const std::size_t per_row = static_cast<std::size_t>(ladder.batches);
  std::vector<TrialResult> results(rows * per_row);

  SolverConfig trial_config = config;
  const unsigned workers = ladder.threads == 0 ? default_thread_count() : ladder.threads;
  if (workers > 1) trial_config.threads = 1;
  parallel_for(
      results.size(),
      [&](std::size_t task) {
        const LadderPoint& p = ladder.points[task / per_row];
        const int b = static_cast<int>(task % per_row);
        results[task] = run_trial(problem, trial_config, p.N, p.M, batch_seed(ladder.seed, b), ladder.z_norm);
      },
      workers);

  ConvergenceReport report;
  for (std::size_t r = 0; r < rows; ++r) {
    ConvergenceRow row;
    row.N = ladder.points[r].N;
    row.M = ladder.points[r].M;
    double runtime = 0.0;
    for (std::size_t b = 0; b < per_row; ++b) {
      const TrialResult& t = results[r * per_row + b];
      row.batch_err_y.push_back(t.err_y);
      row.batch_err_z.push_back(t.err_z);
      runtime += t.runtime_sec;
    }
    row.y = batch_ci(row.batch_err_y, ladder.level);
    row.z = batch_ci(row.batch_err_z, ladder.level);
    row.runtime_sec = runtime / static_cast<double>(per_row);
    report.rows.push_back(std::move(row));
  }
  compute_rates(report);
  report.metadata = {{"problem", problem.name},
                     {"scheme", config.scheme.name},
                     {"m", config.scheme.steps()},
                     {"seed", ladder.seed},
                     {"batches", ladder.batches},
                     {"level", ladder.level},
                     {"basis_degree", config.basis_degree},
                     {"control_variates", config.control_variates}};
  return report;
}

bool classify_decreasing(const std::vector<int>& Ns, const std::vector<double>& errors, double expected_order) {
  if (Ns.size() != errors.size() || errors.empty()) return false;
  for (double e : errors) {
    if (!std::isfinite(e)) return false;
  }
  for (std::size_t k = 1; k < errors.size(); ++k) {
    const double scale = std::pow(static_cast<double>(Ns[k - 1]) / Ns[k], expected_order);
    if (errors[k] > 1.5 * errors[k - 1] * scale) return false;
  }
  return errors.size() == 1 || errors.back() < errors.front();
}

StabilityDemoResult stability_demo(const FbsdeProblem& problem, SolverConfig config, const std::vector<int>& Ns,
                                   Eigen::Index M, std::uint64_t seed, double expected_order) {
  const auto [u0, zeta0] = closed_form_reference(problem, 0.0, problem.x0);
  (void)zeta0;
  StabilityDemoResult out;
  out.Ns = Ns;
  for (int N : Ns) {
    config.grid = make_grid(problem.T, N);
    double err = std::numeric_limits<double>::infinity();
    double max_err = std::numeric_limits<double>::quiet_NaN();
    try {
      if (config.deterministic_mode) {
        const DeterministicSolution det = deterministic_solve(problem, config);
        err = std::abs(det.y.front() - u0);
        max_err = 0.0;
        for (int i = 0; i <= N; ++i) {
          const double e = std::abs(det.y[i] - problem.closed_form->u(det.t[i], det.x[i]));
          max_err = std::isnan(e) ? std::numeric_limits<double>::infinity() : std::max(max_err, e);
        }
      } else {
        err = std::abs(solve(problem, config, M, seed).y0 - u0);
      }
    } catch (const Error& e) {
      if (is_validation_error(e.code())) throw;
    }
    if (std::isnan(err)) err = std::numeric_limits<double>::infinity();
    out.errors.push_back(err);
    out.max_errors.push_back(max_err);
  }
  out.decreasing = classify_decreasing(out.Ns, out.errors, expected_order);
  out.classification = out.decreasing ? "decreasing" : "irregular/divergent";
  return out;
}

nlohmann::json stability_demo_to_json(const StabilityDemoResult& r) {
  using nlohmann::json;
  auto number = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json rows = json::array();
  for (std::size_t k = 0; k < r.Ns.size(); ++k) {
    json row{{"N", r.Ns[k]}, {"error", number(r.errors[k])}};
    if (!std::isnan(r.max_errors[k])) row["max_error"] = number(r.max_errors[k]);
    rows.push_back(row);
  }
  return json{{"rows", rows}, {"classification", r.classification}};
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  throw Error(ErrorCode::InvalidArgument, "unknown report format '" + name + "' (csv, json)");
}

std::string report_csv(const ConvergenceReport& report, bool include_runtime) {
  std::ostringstream out;
  out << "N,M,errY,ciYlo,ciYhi,errZ,ciZlo,ciZhi,runtime\n";
  for (const auto& row : report.rows) {
    out << row.N << ',' << row.M << ',' << fmt(row.y.mean) << ',' << fmt(row.y.lower) << ','
        << fmt(row.y.upper) << ',' << fmt(row.z.mean) << ',' << fmt(row.z.lower) << ',' << fmt(row.z.upper)
        << ',' << fmt(include_runtime ? row.runtime_sec : 0.0) << '\n';
  }
  if (report.rate_y || report.rate_z) {
    out << "# CR_Y=" << (report.rate_y ? fmt(*report.rate_y) : "nan") << ",CR_Z="
        << (report.rate_z ? fmt(*report.rate_z) : "nan") << '\n';
  }
  return out.str();
}

nlohmann::json report_json(const ConvergenceReport& report, bool include_runtime) {
  using nlohmann::json;
  json rows = json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"N", row.N},
                    {"M", row.M},
                    {"errY", row.y.mean},
                    {"ciYlo", row.y.lower},
                    {"ciYhi", row.y.upper},
                    {"errZ", row.z.mean},
                    {"ciZlo", row.z.lower},
                    {"ciZhi", row.z.upper},
                    {"runtime", include_runtime ? row.runtime_sec : 0.0},
                    {"batch_errY", row.batch_err_y},
                    {"batch_errZ", row.batch_err_z}});
  }
  json doc{{"rows", rows}, {"metadata", report.metadata}};
  doc["CR_Y"] = report.rate_y ? json(*report.rate_y) : json(nullptr);
  doc["CR_Z"] = report.rate_z ? json(*report.rate_z) : json(nullptr);
  doc["pairwise_CR_Y"] = report.pairwise_y;
  doc["pairwise_CR_Z"] = report.pairwise_z;
  return doc;
}

std::string report_plot_data(const ConvergenceReport& report) {
  std::ostringstream out;
  out << "# log2N log2errY log2errZ\n";
  for (const auto& row : report.rows) {
    out << fmt(std::log2(static_cast<double>(row.N))) << ' ' << fmt(std::log2(row.y.mean)) << ' '
        << fmt(std::log2(row.z.mean)) << '\n';
  }
  return out.str();
}

void emit_report(const ConvergenceReport& report, const std::string& path, ReportFormat format,
                 bool include_runtime) {
  auto write = [](const std::string& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot open '" + file + "' for writing");
    out << text;
    if (!out) throw Error(ErrorCode::Io, "write to '" + file + "' failed");
  };
  write(path, format == ReportFormat::Csv ? report_csv(report, include_runtime)
                                          : report_json(report, include_runtime).dump(2) + "\n");
  write(path + ".plot.dat", report_plot_data(report));
}

}  // namespace fbsde
