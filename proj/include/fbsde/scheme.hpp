#pragma once

// Coefficients of predictor-corrector linear multistep schemes for the backward
// equation: order conditions, Z-derivative weights, error constants and the
// Milne indicator factor. Everything is templated on the scalar so that the
// catalog can be derived in exact rational arithmetic and cast to double for
// the solver.

#include "fbsde/error.hpp"
#include "fbsde/linear_solve.hpp"
#include "fbsde/rational.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fbsde {

/// Implicit multistep formula
///   Y_i = E_i[ sum_j alpha_j Y_{i+j} + h gamma0 f_i + h sum_j gamma_j f_{i+j} ].
template <typename Scalar>
struct CorrectorCoefficients {
  Vector<Scalar> alpha;
  Scalar gamma0{0};
  Vector<Scalar> gamma;

  int steps() const { return static_cast<int>(alpha.size()); }
};

/// Explicit multistep formula; there is no weight on the time-i driver value.
template <typename Scalar>
struct PredictorCoefficients {
  Vector<Scalar> alpha;
  Vector<Scalar> gamma;

  int steps() const { return static_cast<int>(alpha.size()); }
};

/// Weights turning Y-levels t_i .. t_{i+m} into a time derivative at t_i. Stored
/// multiplied by the step size so they do not depend on the grid.
template <typename Scalar>
struct DerivativeWeights {
  Vector<Scalar> lambda_h;

  int steps() const { return static_cast<int>(lambda_h.size()) - 1; }
};

template <typename Scalar>
struct MultistepScheme {
  std::string name;
  PredictorCoefficients<Scalar> predictor;
  CorrectorCoefficients<Scalar> corrector;
  DerivativeWeights<Scalar> zweights;
  Scalar error_constant_pred{0};
  Scalar error_constant_corr{0};

  int steps() const { return corrector.steps(); }
};

/// Partial assignment of corrector weights; unset entries are unknowns.
template <typename Scalar>
struct CorrectorPins {
  std::vector<std::optional<Scalar>> alpha;
  std::optional<Scalar> gamma0;
  std::vector<std::optional<Scalar>> gamma;

  explicit CorrectorPins(int m) : alpha(m), gamma(m) {}
};

template <typename Scalar>
struct PredictorPins {
  std::vector<std::optional<Scalar>> alpha;
  std::vector<std::optional<Scalar>> gamma;

  explicit PredictorPins(int m) : alpha(m), gamma(m) {}
};

namespace detail {

template <typename Scalar>
Scalar int_power(int base, int exponent) {
  Scalar result(1);
  for (int k = 0; k < exponent; ++k) result *= Scalar(base);
  return result;
}

template <typename Scalar>
Scalar factorial(int n) {
  Scalar result(1);
  for (int k = 2; k <= n; ++k) result *= Scalar(k);
  return result;
}

/// One truncation-error condition C_j = constant + row . v, where v stacks
/// (alpha_1..alpha_m, [gamma0], gamma_1..gamma_m).
template <typename Scalar>
struct LinearCondition {
  Scalar constant;
  Vector<Scalar> row;
};

template <typename Scalar>
LinearCondition<Scalar> truncation_condition(int j, int m, bool has_gamma0) {
  const int offset = has_gamma0 ? 1 : 0;
  LinearCondition<Scalar> c{Scalar(0), Vector<Scalar>::Zero(2 * m + offset)};
  if (j == 0) {
    c.constant = Scalar(1);
    for (int l = 1; l <= m; ++l) c.row(l - 1) = Scalar(-1);
    return c;
  }
  const Scalar alpha_scale = Scalar(1) / factorial<Scalar>(j);
  const Scalar gamma_scale = Scalar(1) / factorial<Scalar>(j - 1);
  for (int l = 1; l <= m; ++l) {
    c.row(l - 1) = -alpha_scale * int_power<Scalar>(l, j);
    c.row(m + offset + l - 1) = gamma_scale * int_power<Scalar>(l, j - 1);
  }
  if (has_gamma0 && j == 1) c.row(m) = Scalar(1);
  return c;
}

template <typename Scalar>
bool residual_vanishes(const Scalar& value) {
  if constexpr (std::is_same_v<Scalar, Rational>) {
    return value == 0;
  } else {
    return magnitude(value) <= 1e-12;
  }
}

/// Solves C_0 = ... = C_m = 0 for the unpinned entries of v.
template <typename Scalar>
Vector<Scalar> solve_pinned(int m, bool has_gamma0, const std::vector<std::optional<Scalar>>& pins) {
  const auto n = static_cast<Eigen::Index>(pins.size());
  std::vector<Eigen::Index> unknowns;
  for (Eigen::Index v = 0; v < n; ++v) {
    if (!pins[v]) unknowns.push_back(v);
  }
  const auto n_unknown = static_cast<Eigen::Index>(unknowns.size());

  std::vector<Vector<Scalar>> rows;
  std::vector<Scalar> rhs;
  for (int j = 0; j <= m; ++j) {
    const auto cond = truncation_condition<Scalar>(j, m, has_gamma0);
    Scalar fixed = cond.constant;
    for (Eigen::Index v = 0; v < n; ++v) {
      if (pins[v]) fixed += cond.row(v) * *pins[v];
    }
    Vector<Scalar> reduced(n_unknown);
    bool any = false;
    for (Eigen::Index u = 0; u < n_unknown; ++u) {
      reduced(u) = cond.row(unknowns[u]);
      any = any || !is_exact_zero(reduced(u));
    }
    if (!any) {
      if (!residual_vanishes(fixed)) {
        throw Error(ErrorCode::Overdetermined,
                    "pinned values violate order condition C_" + std::to_string(j));
      }
      continue;
    }
    rows.push_back(std::move(reduced));
    rhs.push_back(-fixed);
  }

  const auto n_cond = static_cast<Eigen::Index>(rows.size());
  if (n_cond > n_unknown) {
    throw Error(ErrorCode::Overdetermined, std::to_string(n_cond) + " active conditions for " +
                                               std::to_string(n_unknown) + " unknowns");
  }
  if (n_cond < n_unknown) {
    throw Error(ErrorCode::Underdetermined, std::to_string(n_cond) + " active conditions for " +
                                                std::to_string(n_unknown) + " unknowns");
  }

  Vector<Scalar> values(n);
  for (Eigen::Index v = 0; v < n; ++v) values(v) = pins[v] ? *pins[v] : Scalar(0);
  if (n_unknown == 0) return values;

  Matrix<Scalar> a(n_cond, n_unknown);
  Vector<Scalar> b(n_cond);
  for (Eigen::Index r = 0; r < n_cond; ++r) {
    a.row(r) = rows[r].transpose();
    b(r) = rhs[r];
  }
  const Vector<Scalar> solution = solve_partial_pivot<Scalar>(std::move(a), std::move(b));
  for (Eigen::Index u = 0; u < n_unknown; ++u) values(unknowns[u]) = solution(u);
  return values;
}

template <typename Scalar>
Scalar abs_value(const Scalar& x) {
  return x < Scalar(0) ? Scalar(-x) : x;
}

}  // namespace detail

/// Residuals C_0..C_{up_to} of the truncation-error expansion. gamma0 enters
/// only C_1.
template <typename Scalar>
Vector<Scalar> truncation_residuals(const CorrectorCoefficients<Scalar>& c, int up_to) {
  const int m = c.steps();
  Vector<Scalar> v(2 * m + 1);
  v << c.alpha, c.gamma0, c.gamma;
  Vector<Scalar> out(up_to + 1);
  for (int j = 0; j <= up_to; ++j) {
    const auto cond = detail::truncation_condition<Scalar>(j, m, true);
    out(j) = cond.constant + cond.row.dot(v);
  }
  return out;
}

template <typename Scalar>
Vector<Scalar> truncation_residuals(const PredictorCoefficients<Scalar>& p, int up_to) {
  const int m = p.steps();
  Vector<Scalar> v(2 * m);
  v << p.alpha, p.gamma;
  Vector<Scalar> out(up_to + 1);
  for (int j = 0; j <= up_to; ++j) {
    const auto cond = detail::truncation_condition<Scalar>(j, m, false);
    out(j) = cond.constant + cond.row.dot(v);
  }
  return out;
}

/// Completes a corrector from pinned values so that C_0..C_m vanish.
template <typename Scalar>
CorrectorCoefficients<Scalar> solve_order_conditions(int m, const CorrectorPins<Scalar>& pins) {
  if (m < 1) throw Error(ErrorCode::UnsupportedOrder, "step count must be positive");
  if (static_cast<int>(pins.alpha.size()) != m || static_cast<int>(pins.gamma.size()) != m) {
    throw Error(ErrorCode::InvalidArgument, "pin vectors must have length m");
  }
  std::vector<std::optional<Scalar>> flat(pins.alpha);
  flat.push_back(pins.gamma0);
  flat.insert(flat.end(), pins.gamma.begin(), pins.gamma.end());
  const Vector<Scalar> v = detail::solve_pinned<Scalar>(m, true, flat);
  CorrectorCoefficients<Scalar> c;
  c.alpha = v.head(m);
  c.gamma0 = v(m);
  c.gamma = v.tail(m);
  return c;
}

template <typename Scalar>
PredictorCoefficients<Scalar> solve_predictor_conditions(int m, const PredictorPins<Scalar>& pins) {
  if (m < 1) throw Error(ErrorCode::UnsupportedOrder, "step count must be positive");
  if (static_cast<int>(pins.alpha.size()) != m || static_cast<int>(pins.gamma.size()) != m) {
    throw Error(ErrorCode::InvalidArgument, "pin vectors must have length m");
  }
  std::vector<std::optional<Scalar>> flat(pins.alpha);
  flat.insert(flat.end(), pins.gamma.begin(), pins.gamma.end());
  const Vector<Scalar> v = detail::solve_pinned<Scalar>(m, false, flat);
  PredictorCoefficients<Scalar> p;
  p.alpha = v.head(m);
  p.gamma = v.tail(m);
  return p;
}

inline constexpr int kMaxDerivativeSteps = 12;

/// Solves (1/j!) sum_n n^j (h lambda_n) = delta_{j1}, j = 0..m.
template <typename Scalar>
DerivativeWeights<Scalar> derivative_weights(int m) {
  if (m < 1) throw Error(ErrorCode::UnsupportedOrder, "step count must be positive");
  if (m > kMaxDerivativeSteps) {
    throw Error(ErrorCode::UnsupportedOrder,
                "Vandermonde system for m > 12 overflows the supported conditioning range");
  }
  Matrix<Scalar> a(m + 1, m + 1);
  Vector<Scalar> b = Vector<Scalar>::Zero(m + 1);
  for (int j = 0; j <= m; ++j) {
    const Scalar scale = Scalar(1) / detail::factorial<Scalar>(j);
    for (int n = 0; n <= m; ++n) a(j, n) = scale * detail::int_power<Scalar>(n, j);
  }
  b(1) = Scalar(1);
  return {solve_partial_pivot<Scalar>(std::move(a), std::move(b))};
}

/// Assembles a scheme from its corrector and predictor, filling in the
/// Z-weights and the error constants C_{m+1}.
template <typename Scalar>
MultistepScheme<Scalar> make_scheme(std::string name, PredictorCoefficients<Scalar> predictor,
                                    CorrectorCoefficients<Scalar> corrector) {
  const int m = corrector.steps();
  if (predictor.steps() != m) {
    throw Error(ErrorCode::InvalidArgument, "predictor and corrector step counts differ");
  }
  MultistepScheme<Scalar> s;
  s.name = std::move(name);
  s.error_constant_pred = truncation_residuals(predictor, m + 1)(m + 1);
  s.error_constant_corr = truncation_residuals(corrector, m + 1)(m + 1);
  s.predictor = std::move(predictor);
  s.corrector = std::move(corrector);
  s.zweights = derivative_weights<Scalar>(m);
  return s;
}

/// Adams-Bashforth predictor paired with the Adams-Moulton corrector of the same
/// order k. Both are stored with m = k steps; the corrector's last weight is 0.
template <typename Scalar>
MultistepScheme<Scalar> adams_pair(int order) {
  if (order < 1 || order > 6) {
    throw Error(ErrorCode::UnsupportedOrder, "Adams pairs are tabulated for orders 1..6");
  }
  const int m = order;
  PredictorPins<Scalar> pp(m);
  CorrectorPins<Scalar> cp(m);
  for (int j = 0; j < m; ++j) {
    pp.alpha[j] = cp.alpha[j] = Scalar(j == 0 ? 1 : 0);
  }
  cp.gamma[m - 1] = Scalar(0);
  return make_scheme<Scalar>("adams-" + std::to_string(order), solve_predictor_conditions(m, pp),
                             solve_order_conditions(m, cp));
}

/// Family with uniform weights alpha_j = 1/m for predictor and corrector; gamma0
/// is the one free parameter left by the order conditions.
template <typename Scalar>
MultistepScheme<Scalar> uniform_scheme(int m, const Scalar& gamma0) {
  if (m < 1) throw Error(ErrorCode::UnsupportedOrder, "step count must be positive");
  PredictorPins<Scalar> pp(m);
  CorrectorPins<Scalar> cp(m);
  for (int j = 0; j < m; ++j) pp.alpha[j] = cp.alpha[j] = Scalar(1) / Scalar(m);
  cp.gamma0 = gamma0;
  return make_scheme<Scalar>("uniform-" + std::to_string(m), solve_predictor_conditions(m, pp),
                             solve_order_conditions(m, cp));
}

/// The stable uniform-weight preset for m = 1..4 (gamma0 = 1/2, 1/2, 5/6, 1/2).
template <typename Scalar>
MultistepScheme<Scalar> stable_preset(int m) {
  switch (m) {
    case 1:
    case 2:
    case 4:
      return uniform_scheme<Scalar>(m, from_ratio<Scalar>(1, 2));
    case 3:
      return uniform_scheme<Scalar>(m, from_ratio<Scalar>(5, 6));
    default:
      throw Error(ErrorCode::UnsupportedOrder, "stable presets exist for m = 1..4");
  }
}

/// Consistent two-step scheme with characteristic roots {1, 2}.
template <typename Scalar>
MultistepScheme<Scalar> unstable_two_step() {
  PredictorPins<Scalar> pp(2);
  CorrectorPins<Scalar> cp(2);
  pp.alpha = cp.alpha = {Scalar(3), Scalar(-2)};
  cp.gamma0 = Scalar(1);
  return make_scheme<Scalar>("unstable-2", solve_predictor_conditions(2, pp),
                             solve_order_conditions(2, cp));
}

/// Consistent three-step scheme with characteristic roots {-2, 1, 3}.
template <typename Scalar>
MultistepScheme<Scalar> unstable_three_step() {
  PredictorPins<Scalar> pp(3);
  CorrectorPins<Scalar> cp(3);
  pp.alpha = cp.alpha = {Scalar(2), Scalar(5), Scalar(-6)};
  cp.gamma0 = Scalar(-3);
  return make_scheme<Scalar>("unstable-3", solve_predictor_conditions(3, pp),
                             solve_order_conditions(3, cp));
}

/// |C / (C - C~)| for the corrector and predictor error constants.
template <typename Scalar>
Scalar milne_factor(const MultistepScheme<Scalar>& s) {
  const Scalar gap = s.error_constant_corr - s.error_constant_pred;
  if (is_exact_zero(gap) || magnitude(gap) == 0.0) {
    throw Error(ErrorCode::DegenerateIndicator, "predictor and corrector error constants coincide");
  }
  return detail::abs_value<Scalar>(s.error_constant_corr / gap);
}

template <typename To, typename From>
MultistepScheme<To> scheme_cast(const MultistepScheme<From>& s) {
  MultistepScheme<To> out;
  out.name = s.name;
  out.predictor.alpha = s.predictor.alpha.template cast<To>();
  out.predictor.gamma = s.predictor.gamma.template cast<To>();
  out.corrector.alpha = s.corrector.alpha.template cast<To>();
  out.corrector.gamma0 = static_cast<To>(s.corrector.gamma0);
  out.corrector.gamma = s.corrector.gamma.template cast<To>();
  out.zweights.lambda_h = s.zweights.lambda_h.template cast<To>();
  out.error_constant_pred = static_cast<To>(s.error_constant_pred);
  out.error_constant_corr = static_cast<To>(s.error_constant_corr);
  return out;
}

/// Catalog lookup used by the CLI and the experiment harness. Recognized ids:
/// "adams-k" (k = 1..6), "uniform-m" / "stable-m" (m = 1..4), "unstable-2",
/// "unstable-3".
MultistepScheme<Rational> scheme_by_name(const std::string& id);

/// Every scheme in the catalog, in a fixed order.
std::vector<MultistepScheme<Rational>> scheme_catalog();

}  // namespace fbsde
