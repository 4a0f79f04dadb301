#include "fbsde/simulation.hpp"

#include "fbsde/error.hpp"
#include "fbsde/parallel.hpp"
#include "fbsde/rng.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace fbsde {

GridSpec make_grid(double T, int N) {
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorCode::InvalidArgument, "horizon T must be positive");
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "step count N must be positive");
  return {T, N, T / N};
}

std::size_t ensemble_bytes(const GridSpec& grid, int d, Eigen::Index M) {
  const long double cells = static_cast<long double>(M) * d * (2.0L * grid.N + 1.0L);
  const long double bytes = cells * sizeof(double);
  if (bytes > static_cast<long double>(std::numeric_limits<std::size_t>::max())) {
    return std::numeric_limits<std::size_t>::max();
  }
  return static_cast<std::size_t>(bytes);
}

namespace {

void check_shape(int d, Eigen::Index M) {
  if (M < 1) throw Error(ErrorCode::InvalidArgument, "trajectory count M must be positive");
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "dimension d must be positive");
}

void check_budget(const GridSpec& grid, int d, Eigen::Index M, const SimulationLimits& limits) {
  const std::size_t need = ensemble_bytes(grid, d, M);
  if (need > limits.memory_budget) {
    throw Error(ErrorCode::AllocationTooLarge,
                "ensemble needs " + std::to_string(need) + " bytes, budget is " +
                    std::to_string(limits.memory_budget) +
                    "; use regenerate_trajectory for streaming access");
  }
}

template <typename Row>
void fill_increments(Substream& stream, double sqrt_h, Row&& row) {
  for (Eigen::Index k = 0; k < row.size(); ++k) row(k) = sqrt_h * stream.normal();
}

void euler_step(const FbsdeProblem& problem, double t, double h, const Eigen::VectorXd& x,
                StateRef dw, Eigen::VectorXd& next, Eigen::Index trajectory, int step) {
  const Eigen::VectorXd drift = problem.b(t, x);
  const Eigen::MatrixXd vol = problem.sigma(t, x);
  if (drift.size() != x.size() || vol.rows() != x.size() || vol.cols() != dw.size()) {
    throw Error(ErrorCode::DimensionMismatch, "drift or diffusion has the wrong shape");
  }
  if (!drift.allFinite() || !vol.allFinite()) {
    throw Error(ErrorCode::NonFiniteState, "non-finite drift or diffusion at trajectory " +
                                               std::to_string(trajectory) + ", step " +
                                               std::to_string(step));
  }
  next = x + h * drift + vol * dw;
  if (!next.allFinite()) {
    throw Error(ErrorCode::NonFiniteState, "non-finite state at trajectory " +
                                               std::to_string(trajectory) + ", step " +
                                               std::to_string(step + 1));
  }
}

}  // namespace

BrownianIncrements brownian_increments(const GridSpec& grid, int d, Eigen::Index M,
                                       std::uint64_t seed, const SimulationLimits& limits) {
  check_shape(d, M);
  check_budget(grid, d, M, limits);
  BrownianIncrements out{grid, d, M, seed, std::vector<StateMatrix>(grid.N, StateMatrix(M, d))};
  const double sqrt_h = std::sqrt(grid.h);
  parallel_for(
      static_cast<std::size_t>(M),
      [&](std::size_t m) {
        Substream stream(seed, static_cast<std::uint32_t>(StreamPurpose::Increments), m);
        for (int i = 0; i < grid.N; ++i) fill_increments(stream, sqrt_h, out.dW[i].row(m));
      },
      limits.threads);
  return out;
}

PathEnsemble euler_paths(const FbsdeProblem& problem, BrownianIncrements increments,
                         const Eigen::VectorXd& x0, const SimulationLimits& limits) {
  const GridSpec grid = increments.grid;
  const int d = increments.d;
  const Eigen::Index M = increments.M;
  if (problem.d != d || x0.size() != d) {
    throw Error(ErrorCode::DimensionMismatch, "increments, problem and x0 dimensions disagree");
  }
  if (static_cast<int>(increments.dW.size()) != grid.N) {
    throw Error(ErrorCode::DimensionMismatch, "increment count does not match the grid");
  }
  check_budget(grid, d, M, limits);

  PathEnsemble out{grid, d, M, increments.seed, std::move(increments.dW),
                   std::vector<StateMatrix>(grid.N + 1, StateMatrix(M, d))};
  out.X[0] = x0.transpose().replicate(M, 1);
  parallel_for(
      static_cast<std::size_t>(M),
      [&](std::size_t m) {
        Eigen::VectorXd x = x0;
        Eigen::VectorXd next(d);
        for (int i = 0; i < grid.N; ++i) {
          euler_step(problem, grid.time(i), grid.h, x, out.dW[i].row(m).transpose(), next,
                     static_cast<Eigen::Index>(m), i);
          out.X[i + 1].row(m) = next.transpose();
          x.swap(next);
        }
      },
      limits.threads);
  return out;
}

PathEnsemble euler_paths(const FbsdeProblem& problem, BrownianIncrements increments,
                         const SimulationLimits& limits) {
  return euler_paths(problem, std::move(increments), problem.x0, limits);
}

PathEnsemble simulate(const FbsdeProblem& problem, const GridSpec& grid, Eigen::Index M,
                      std::uint64_t seed, const SimulationLimits& limits) {
  return euler_paths(problem, brownian_increments(grid, problem.d, M, seed, limits), limits);
}

Trajectory regenerate_trajectory(const FbsdeProblem& problem, const GridSpec& grid,
                                 std::uint64_t seed, Eigen::Index m) {
  if (m < 0) throw Error(ErrorCode::InvalidArgument, "trajectory index must be nonnegative");
  const int d = problem.d;
  Trajectory out{Eigen::MatrixXd(grid.N, d), Eigen::MatrixXd(grid.N + 1, d)};
  Substream stream(seed, static_cast<std::uint32_t>(StreamPurpose::Increments),
                   static_cast<std::uint64_t>(m));
  const double sqrt_h = std::sqrt(grid.h);
  Eigen::VectorXd x = problem.x0;
  Eigen::VectorXd next(d);
  out.X.row(0) = x.transpose();
  for (int i = 0; i < grid.N; ++i) {
    fill_increments(stream, sqrt_h, out.dW.row(i));
    euler_step(problem, grid.time(i), grid.h, x, out.dW.row(i).transpose(), next, m, i);
    out.X.row(i + 1) = next.transpose();
    x.swap(next);
  }
  return out;
}

std::vector<StateMatrix> bridge_refinement(const StateMatrix& coarse_dW, double h, int r,
                                           std::uint64_t seed, int step, unsigned threads) {
  if (r < 1) throw Error(ErrorCode::InvalidArgument, "refinement factor must be positive");
  const Eigen::Index M = coarse_dW.rows();
  const Eigen::Index d = coarse_dW.cols();
  std::vector<StateMatrix> pieces(r, StateMatrix(M, d));
  if (r == 1) {
    pieces[0] = coarse_dW;
    return pieces;
  }
  const double sqrt_fine = std::sqrt(h / r);
  const auto purpose = static_cast<std::uint32_t>(StreamPurpose::BridgeBase) + static_cast<std::uint32_t>(step);
  parallel_for(
      static_cast<std::size_t>(M),
      [&](std::size_t m) {
        Substream stream(seed, purpose, m);
        Eigen::VectorXd total = Eigen::VectorXd::Zero(d);
        for (int l = 0; l < r; ++l) {
          for (Eigen::Index k = 0; k < d; ++k) {
            const double v = sqrt_fine * stream.normal();
            pieces[l](m, k) = v;
            total(k) += v;
          }
        }
        const Eigen::VectorXd share = (total - coarse_dW.row(m).transpose()) / r;
        for (int l = 0; l < r; ++l) pieces[l].row(m) -= share.transpose();
      },
      threads);
  return pieces;
}

namespace {

constexpr char kMagic[8] = {'F', 'B', 'S', 'D', 'E', 'E', 'N', 'S'};
constexpr std::uint16_t kFormatVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<unsigned char, sizeof(T)> bytes;
  for (std::size_t k = 0; k < sizeof(T); ++k) bytes[k] = static_cast<unsigned char>(value >> (8 * k));
  out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

void put_double(std::ostream& out, double value) { put_le(out, std::bit_cast<std::uint64_t>(value)); }

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw Error(ErrorCode::Io, "ensemble file is truncated");
  T value = 0;
  for (std::size_t k = 0; k < sizeof(T); ++k) value |= static_cast<T>(static_cast<T>(bytes[k]) << (8 * k));
  return value;
}

double get_double(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

}  // namespace

void save_ensemble(const PathEnsemble& e, const std::string& path) {
  if (e.d > 0xFFFF || e.grid.N < 0) throw Error(ErrorCode::InvalidArgument, "ensemble shape does not fit the header");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out.write(kMagic, sizeof(kMagic));
  put_le<std::uint16_t>(out, kFormatVersion);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(e.d));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.grid.N));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(e.M));
  put_double(out, e.grid.T);
  put_le<std::uint64_t>(out, e.seed);
  for (Eigen::Index m = 0; m < e.M; ++m) {
    for (int i = 0; i < e.grid.N; ++i) {
      for (int k = 0; k < e.d; ++k) put_double(out, e.dW[i](m, k));
    }
  }
  for (Eigen::Index m = 0; m < e.M; ++m) {
    for (int i = 0; i <= e.grid.N; ++i) {
      for (int k = 0; k < e.d; ++k) put_double(out, e.X[i](m, k));
    }
  }
  if (!out) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

PathEnsemble load_ensemble(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw Error(ErrorCode::Parse, "'" + path + "' is not an ensemble file");
  }
  const auto version = get_le<std::uint16_t>(in);
  if (version != kFormatVersion) {
    throw Error(ErrorCode::Parse, "unsupported ensemble format version " + std::to_string(version));
  }
  const int d = get_le<std::uint16_t>(in);
  const auto n = get_le<std::uint32_t>(in);
  const auto M = get_le<std::uint64_t>(in);
  const double T = get_double(in);
  const auto seed = get_le<std::uint64_t>(in);
  if (d < 1 || n < 1 || M < 1 || n > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
    throw Error(ErrorCode::Parse, "ensemble header has an invalid shape");
  }
  PathEnsemble e;
  e.grid = make_grid(T, static_cast<int>(n));
  e.d = d;
  e.M = static_cast<Eigen::Index>(M);
  e.seed = seed;
  e.dW.assign(e.grid.N, StateMatrix(e.M, d));
  e.X.assign(e.grid.N + 1, StateMatrix(e.M, d));
  for (Eigen::Index m = 0; m < e.M; ++m) {
    for (int i = 0; i < e.grid.N; ++i) {
      for (int k = 0; k < d; ++k) e.dW[i](m, k) = get_double(in);
    }
  }
  for (Eigen::Index m = 0; m < e.M; ++m) {
    for (int i = 0; i <= e.grid.N; ++i) {
      for (int k = 0; k < d; ++k) e.X[i](m, k) = get_double(in);
    }
  }
  return e;
}

}  // namespace fbsde
