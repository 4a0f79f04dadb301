#pragma once

#include "fbsde/error.hpp"
#include "fbsde/rational.hpp"

#include <algorithm>
#include <utility>

namespace fbsde {

/// Gaussian elimination with partial pivoting, usable with exact and floating
/// scalars alike. A pivot whose magnitude falls below
/// `relative_threshold * max|A_ij|` (or is exactly zero) is reported as
/// ErrorCode::SingularSystem.
template <typename Scalar>
Vector<Scalar> solve_partial_pivot(Matrix<Scalar> a, Vector<Scalar> b,
                                   double relative_threshold = 1e-12) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "linear system must be square");
  }
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) scale = std::max(scale, magnitude(a(i, j)));
  }
  const double threshold = relative_threshold * scale;

  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index pivot = k;
    double best = magnitude(a(k, k));
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double candidate = magnitude(a(i, k));
      if (candidate > best) {
        best = candidate;
        pivot = i;
      }
    }
    if (is_exact_zero(a(pivot, k)) || best < threshold) {
      throw Error(ErrorCode::SingularSystem,
                  "pivot " + std::to_string(k) + " vanishes; the pinned parameters leave the "
                  "order conditions rank-deficient");
    }
    if (pivot != k) {
      a.row(k).swap(a.row(pivot));
      std::swap(b(k), b(pivot));
    }
    for (Eigen::Index i = k + 1; i < n; ++i) {
      if (is_exact_zero(a(i, k))) continue;
      const Scalar factor = a(i, k) / a(k, k);
      for (Eigen::Index j = k; j < n; ++j) a(i, j) -= factor * a(k, j);
      b(i) -= factor * b(k);
    }
  }

  Vector<Scalar> x(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    Scalar acc = b(i);
    for (Eigen::Index j = i + 1; j < n; ++j) acc -= a(i, j) * x(j);
    x(i) = acc / a(i, i);
  }
  return x;
}

}  // namespace fbsde
