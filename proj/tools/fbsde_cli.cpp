// Command line front end: scheme coefficients, stability verdicts, single
// solves, convergence ladders and stability demonstrations.

#include "config.hpp"

#include "fbsde/error.hpp"
#include "fbsde/experiments.hpp"
#include "fbsde/problems.hpp"
#include "fbsde/rational.hpp"
#include "fbsde/scheme.hpp"
#include "fbsde/scheme_io.hpp"
#include "fbsde/solver.hpp"
#include "fbsde/stability.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using fbsde::Error;
using fbsde::ErrorCode;
using nlohmann::json;

struct SchemeOptions {
  std::string scheme;
  std::string scheme_file;
  int steps = 0;
  int adams = 0;
  std::string gamma0;
};

struct ProblemOptions {
  std::string problem = "example1";
  double eta = 0.6;
  std::string tau = "auto";
  int dim = 2;
};

struct RunOptions {
  std::uint64_t seed = 1;
  int basis_degree = 2;
  int substeps = 0;
  bool deterministic = false;
  bool allow_unstable = false;
  bool no_control_variates = false;
  unsigned threads = 0;
  double tol = fbsde::kDefaultRootTolerance;
};

void add_scheme_options(CLI::App* app, SchemeOptions& o) {
  app->add_option("--scheme", o.scheme, "catalog id (adams-k, stable-m, uniform-m, unstable-2, unstable-3) or scheme file");
  app->add_option("--scheme-file", o.scheme_file, "scheme JSON document");
  app->add_option("--steps", o.steps, "stable uniform-weight preset with m steps (1..4)");
  app->add_option("--adams", o.adams, "Adams pair of order k (1..6)");
  app->add_option("--gamma0", o.gamma0, "with --steps: uniform-weight scheme with this gamma0");
}

void add_problem_options(CLI::App* app, ProblemOptions& o) {
  app->add_option("--problem", o.problem, "example1, example2, example2-printed, exponential, constant");
  app->add_option("--eta", o.eta, "example1 offset eta");
  app->add_option("--tau", o.tau, "example1 frequency tau, or 'auto' for 1/sqrt(d)");
  app->add_option("--dim", o.dim, "example1 dimension d");
}

void add_run_options(CLI::App* app, RunOptions& o) {
  app->add_option("--seed", o.seed, "base seed");
  app->add_option("--basis-degree", o.basis_degree, "total degree of the polynomial basis");
  app->add_option("--substeps", o.substeps, "bootstrap substeps per coarse step (0 = automatic)");
  app->add_flag("--deterministic", o.deterministic, "regression-free recursion for sigma = 0 problems");
  app->add_flag("--allow-unstable", o.allow_unstable, "run schemes that fail the root condition");
  app->add_flag("--no-control-variates", o.no_control_variates, "use the plain regression responses");
  app->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  app->add_option("--tol", o.tol, "root clustering tolerance");
}

fbsde::MultistepScheme<fbsde::Rational> resolve_scheme(const SchemeOptions& o) {
  if (!o.scheme_file.empty()) return fbsde::load_scheme_file(o.scheme_file);
  if (!o.scheme.empty()) {
    if (std::filesystem::exists(o.scheme)) return fbsde::load_scheme_file(o.scheme);
    return fbsde::scheme_by_name(o.scheme);
  }
  if (o.adams > 0) return fbsde::adams_pair<fbsde::Rational>(o.adams);
  if (o.steps > 0) {
    if (!o.gamma0.empty()) return fbsde::uniform_scheme<fbsde::Rational>(o.steps, fbsde::parse_rational(o.gamma0));
    return fbsde::stable_preset<fbsde::Rational>(o.steps);
  }
  return fbsde::stable_preset<fbsde::Rational>(2);
}

fbsde::FbsdeProblem resolve_problem(const ProblemOptions& o) {
  double tau = 0.0;
  if (o.tau != "auto") {
    try {
      tau = std::stod(o.tau);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "--tau expects a number or 'auto'");
    }
    if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "--tau must be positive");
  }
  return fbsde::problem_by_name(o.problem, o.eta, tau, o.dim);
}

fbsde::SolverConfig make_config(const fbsde::MultistepScheme<fbsde::Rational>& scheme,
                                const fbsde::FbsdeProblem& problem, int N, const RunOptions& r) {
  fbsde::SolverConfig config = fbsde::make_solver_config(scheme, fbsde::make_grid(problem.T, N));
  config.basis_degree = r.basis_degree;
  config.bootstrap_substeps = r.substeps;
  config.deterministic_mode = r.deterministic;
  config.allow_unstable = r.allow_unstable;
  config.control_variates = !r.no_control_variates;
  config.threads = r.threads;
  config.root_tolerance = r.tol;
  return config;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

std::vector<Eigen::Index> parse_list(const std::string& text, const std::string& flag) {
  std::vector<Eigen::Index> out;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    const std::size_t end = std::min(text.find(',', begin), text.size());
    const std::string item = text.substr(begin, end - begin);
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || v < 1) {
      throw Error(ErrorCode::InvalidArgument, flag + " expects positive integers separated by commas");
    }
    out.push_back(static_cast<Eigen::Index>(v));
    begin = end + 1;
  }
  return out;
}

json stability_doc(const fbsde::MultistepScheme<fbsde::Rational>& scheme, double tol) {
  json doc = fbsde::verdict_to_json(fbsde::scheme_stability(scheme, tol));
  doc["scheme"] = scheme.name;
  return doc;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Multistep predictor-corrector solver for decoupled FBSDEs"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_help_flag("-h,--help", "print help; --config FILE reads key=value defaults for any flag");

  // coeffs
  SchemeOptions coeff_scheme;
  bool all = false;
  std::string coeff_out;
  CLI::App* coeffs = app.add_subcommand("coeffs", "derive and print scheme coefficients as JSON");
  add_scheme_options(coeffs, coeff_scheme);
  coeffs->add_flag("--all", all, "print the whole catalog");
  coeffs->add_option("--out", coeff_out, "output file (default stdout)");

  // stability
  SchemeOptions stab_scheme;
  double stab_tol = fbsde::kDefaultRootTolerance;
  std::string stab_out;
  CLI::App* stability = app.add_subcommand("stability", "root-condition verdict for a scheme");
  add_scheme_options(stability, stab_scheme);
  stability->add_option("--tol", stab_tol, "root clustering tolerance");
  stability->add_option("--out", stab_out, "output file (default stdout)");

  // solve
  SchemeOptions solve_scheme;
  ProblemOptions solve_problem;
  RunOptions solve_run;
  int solve_n = 20;
  long long solve_m = 10000;
  std::string solve_out;
  std::string solve_format = "json";
  CLI::App* solve_cmd = app.add_subcommand("solve", "one backward solve, result as JSON");
  add_scheme_options(solve_cmd, solve_scheme);
  add_problem_options(solve_cmd, solve_problem);
  add_run_options(solve_cmd, solve_run);
  solve_cmd->add_option("--N", solve_n, "time steps");
  solve_cmd->add_option("--M", solve_m, "trajectories");
  solve_cmd->add_option("--out", solve_out, "output file (default stdout)");
  solve_cmd->add_option("--format", solve_format, "json (the only format for single solves)")
      ->check(CLI::IsMember({"json"}));

  // convergence
  SchemeOptions conv_scheme;
  ProblemOptions conv_problem;
  RunOptions conv_run;
  std::string conv_n;
  std::string conv_m;
  int batches = 21;
  std::string preset;
  std::string conv_out;
  std::string conv_format = "csv";
  std::string z_norm = "euclidean";
  bool no_runtime = false;
  CLI::App* conv = app.add_subcommand("convergence", "error ladder over (N, M) with batch confidence intervals");
  add_scheme_options(conv, conv_scheme);
  add_problem_options(conv, conv_problem);
  add_run_options(conv, conv_run);
  conv->add_option("--N", conv_n, "comma-separated step counts");
  conv->add_option("--M", conv_m, "trajectories: one value for all N, or one per N");
  conv->add_option("--batches", batches, "independent batches per ladder point (>= 15 recommended)");
  conv->add_option("--preset", preset, "'published' for N = 5,10,15,20 with M = 2778,5996,8809,12018");
  conv->add_option("--out", conv_out, "report file; a .plot.dat file is written next to it");
  conv->add_option("--format", conv_format, "csv or json");
  conv->add_option("--z-norm", z_norm, "euclidean, first or max");
  conv->add_flag("--no-runtime", no_runtime, "write 0 in the runtime column for reproducible reports");

  // stability-demo
  SchemeOptions demo_scheme;
  ProblemOptions demo_problem;
  RunOptions demo_run;
  std::string demo_n = "5,10,20,40";
  long long demo_m = 10000;
  double expected_order = 0.0;
  std::string demo_out;
  CLI::App* demo = app.add_subcommand("stability-demo", "errors against N for stable and unstable schemes");
  add_scheme_options(demo, demo_scheme);
  add_problem_options(demo, demo_problem);
  add_run_options(demo, demo_run);
  demo->add_option("--N", demo_n, "comma-separated step counts");
  demo->add_option("--M", demo_m, "trajectories");
  demo->add_option("--expected-order", expected_order, "order used to scale the decrease test");
  demo->add_option("--out", demo_out, "output file (default stdout)");

  const std::vector<std::string> args = fbsde::cli::expand_config(argc, argv);
  std::vector<const char*> cargs;
  for (const auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (coeffs->parsed()) {
    json doc;
    if (all) {
      doc = json::array();
      for (const auto& s : fbsde::scheme_catalog()) doc.push_back(fbsde::scheme_to_json(s));
    } else {
      doc = fbsde::scheme_to_json(resolve_scheme(coeff_scheme));
    }
    write_output(coeff_out, doc.dump(2) + "\n");
    return 0;
  }

  if (stability->parsed()) {
    write_output(stab_out, stability_doc(resolve_scheme(stab_scheme), stab_tol).dump(2) + "\n");
    return 0;
  }

  if (solve_cmd->parsed()) {
    const auto problem = resolve_problem(solve_problem);
    const auto config = make_config(resolve_scheme(solve_scheme), problem, solve_n, solve_run);
    const auto sol = fbsde::solve(problem, config, static_cast<Eigen::Index>(solve_m), solve_run.seed);
    json doc = fbsde::solution_to_json(sol, config, problem);
    doc["config"]["M"] = solve_m;
    doc["config"]["seed"] = solve_run.seed;
    if (problem.closed_form) {
      const auto [u0, zeta0] = fbsde::closed_form_reference(problem, 0.0, problem.x0);
      doc["reference"] = {{"y0", u0}, {"z0", std::vector<double>(zeta0.data(), zeta0.data() + zeta0.size())}};
      doc["error_y"] = std::abs(sol.y0 - u0);
      doc["error_z"] = (sol.z0 - zeta0).norm();
    }
    write_output(solve_out, doc.dump(2) + "\n");
    return 0;
  }

  if (conv->parsed()) {
    const auto problem = resolve_problem(conv_problem);
    fbsde::TrialLadder ladder;
    if (preset == "published") {
      ladder.points = fbsde::published_ladder_points();
    } else if (!preset.empty()) {
      throw Error(ErrorCode::InvalidArgument, "unknown preset '" + preset + "'");
    }
    if (!conv_n.empty()) {
      const auto ns = parse_list(conv_n, "--N");
      const auto ms = parse_list(conv_m, "--M");
      if (ms.size() != 1 && ms.size() != ns.size()) {
        throw Error(ErrorCode::InvalidArgument, "--M needs one value or one per N");
      }
      ladder.points.clear();
      for (std::size_t k = 0; k < ns.size(); ++k) {
        ladder.points.push_back({static_cast<int>(ns[k]), ms.size() == 1 ? ms[0] : ms[k]});
      }
    }
    ladder.batches = batches;
    ladder.seed = conv_run.seed;
    ladder.z_norm = fbsde::parse_z_norm(z_norm);
    ladder.threads = conv_run.threads;
    if (ladder.points.empty()) throw Error(ErrorCode::InvalidArgument, "give --N and --M, or --preset published");
    const auto config = make_config(resolve_scheme(conv_scheme), problem, ladder.points.front().N, conv_run);
    const auto report = fbsde::run_ladder(problem, config, ladder);
    const auto format = fbsde::parse_report_format(conv_format);
    if (conv_out.empty()) {
      std::cout << (format == fbsde::ReportFormat::Csv ? fbsde::report_csv(report, !no_runtime)
                                                       : fbsde::report_json(report, !no_runtime).dump(2) + "\n");
    } else {
      fbsde::emit_report(report, conv_out, format, !no_runtime);
    }
    return 0;
  }

  if (demo->parsed()) {
    const auto problem = resolve_problem(demo_problem);
    std::vector<int> ns;
    for (long long n : parse_list(demo_n, "--N")) ns.push_back(static_cast<int>(n));
    const auto config = make_config(resolve_scheme(demo_scheme), problem, ns.front(), demo_run);
    const auto result = fbsde::stability_demo(problem, config, ns, static_cast<Eigen::Index>(demo_m),
                                              demo_run.seed, expected_order);
    json doc = fbsde::stability_demo_to_json(result);
    doc["scheme"] = config.scheme.name;
    doc["problem"] = problem.name;
    write_output(demo_out, doc.dump(2) + "\n");
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fbsde::is_validation_error(e.code()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
