#pragma once

// Brownian increments and forward Euler paths on a uniform grid. Draws for
// trajectory m come from the Philox substream keyed by (seed, m), so a
// trajectory does not depend on how many others are generated with it.

#include "fbsde/problems.hpp"
#include "fbsde/types.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace fbsde {

struct GridSpec {
  double T = 1.0;
  int N = 1;
  double h = 1.0;

  /// t_i, with t_N returned as T exactly.
  double time(int i) const { return i == N ? T : T * static_cast<double>(i) / N; }
};

GridSpec make_grid(double T, int N);

struct SimulationLimits {
  /// Upper bound on the bytes held by one ensemble (increments plus states).
  std::size_t memory_budget = std::size_t{2} << 30;
  /// 0 means one thread per hardware core.
  unsigned threads = 0;
};

struct BrownianIncrements {
  GridSpec grid;
  int d = 1;
  Eigen::Index M = 0;
  std::uint64_t seed = 0;
  std::vector<StateMatrix> dW;  // N entries, each M x d
};

struct PathEnsemble {
  GridSpec grid;
  int d = 1;
  Eigen::Index M = 0;
  std::uint64_t seed = 0;
  std::vector<StateMatrix> dW;  // N entries, each M x d
  std::vector<StateMatrix> X;   // N + 1 entries, each M x d
};

/// Bytes needed for a dense ensemble of this shape.
std::size_t ensemble_bytes(const GridSpec& grid, int d, Eigen::Index M);

/// Throws AllocationTooLarge when ensemble_bytes exceeds the budget.
BrownianIncrements brownian_increments(const GridSpec& grid, int d, Eigen::Index M,
                                       std::uint64_t seed, const SimulationLimits& limits = {});

PathEnsemble euler_paths(const FbsdeProblem& problem, BrownianIncrements increments,
                         const Eigen::VectorXd& x0, const SimulationLimits& limits = {});

PathEnsemble euler_paths(const FbsdeProblem& problem, BrownianIncrements increments,
                         const SimulationLimits& limits = {});

/// brownian_increments followed by euler_paths from problem.x0.
PathEnsemble simulate(const FbsdeProblem& problem, const GridSpec& grid, Eigen::Index M,
                      std::uint64_t seed, const SimulationLimits& limits = {});

/// One trajectory regenerated from (seed, m) without building the ensemble.
struct Trajectory {
  Eigen::MatrixXd dW;  // N x d
  Eigen::MatrixXd X;   // (N + 1) x d
};

Trajectory regenerate_trajectory(const FbsdeProblem& problem, const GridSpec& grid,
                                 std::uint64_t seed, Eigen::Index m);

/// Splits the increments of coarse step `step` into r Brownian-bridge pieces
/// per trajectory: piece l is sqrt(h/r) xi_l minus an equal share of the
/// mismatch, so the pieces sum exactly to the coarse increment.
std::vector<StateMatrix> bridge_refinement(const StateMatrix& coarse_dW, double h, int r,
                                           std::uint64_t seed, int step, unsigned threads = 0);

/// Flat binary dump: 40-byte header ("FBSDEENS", u16 version, u16 d, u32 N,
/// u64 M, f64 T, u64 seed) followed by dW in (m, i, k) order and then X in the
/// same order, all little-endian doubles.
void save_ensemble(const PathEnsemble& ensemble, const std::string& path);
PathEnsemble load_ensemble(const std::string& path);

}  // namespace fbsde
