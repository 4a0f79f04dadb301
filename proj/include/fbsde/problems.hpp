#pragma once

// Decoupled FBSDE problems
//   dX = b(t, X) dt + sigma(t, X) dW,          X_0 = x0
//   -dY = f(t, X, Y, Z) dt - Z dW,              Y_T = phi(X_T)
// given pointwise, plus the benchmark instances used by the tests and the CLI.

#include "fbsde/types.hpp"

#include <Eigen/Core>

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>

namespace fbsde {

struct ClosedForm {
  std::function<double(double, StateRef)> u;
  /// grad u times sigma, one entry per Brownian component.
  std::function<Eigen::VectorXd(double, StateRef)> zeta;
};

struct FbsdeProblem {
  std::string name;
  int d = 1;
  double T = 1.0;
  Eigen::VectorXd x0;

  std::function<Eigen::VectorXd(double, StateRef)> b;
  std::function<Eigen::MatrixXd(double, StateRef)> sigma;
  std::function<double(double, StateRef, double, StateRef)> f;
  std::function<double(StateRef)> phi;
  /// Optional; terminal_values falls back to central differences when empty.
  std::function<Eigen::VectorXd(StateRef)> grad_phi;

  double bound_y = std::numeric_limits<double>::infinity();
  double bound_z = std::numeric_limits<double>::infinity();
  std::optional<ClosedForm> closed_form;
};

/// How the exponential damping term in the first benchmark's driver is timed.
enum class DampingTime {
  Running,  // exp(tau^2 d (T - t)/2) at the driver's own time argument
  Frozen,   // exp(tau^2 d T/2) for every t, the literal printed integrand read at t = 0
};

/// Sine benchmark with X = W:
///   f = min{1, (y - eta - 1 - sin(tau 1'x) exp(-tau^2 d (T-t)/2))^2},
///   phi = 1 + eta + sin(tau 1'x).
FbsdeProblem example1(double eta, double tau, int d, double T = 1.0,
                      DampingTime damping = DampingTime::Running);

/// Scalar logistic benchmark with u = e^{t+x}/(1+e^{t+x}), x0 = 1, T = 1.
/// The default driver is the one consistent with that closed form; `as_printed`
/// uses 1/(1+e^{t+x}) in the linear term instead of 1/(1+2e^{t+x}).
FbsdeProblem example2(bool as_printed = false);

/// sigma = 0, b = 0, f = y, phi = 1 in one dimension: Y_t = e^{T-t}.
FbsdeProblem exponential_ode(double T = 1.0);

/// f = 0, phi = c, b = 0, sigma = identity.
FbsdeProblem constant_terminal(int d, double c, double T = 1.0);

/// Looks up "example1", "example2", "exponential", "constant". Parameters not
/// used by the chosen problem are ignored; tau <= 0 means 1/sqrt(d).
FbsdeProblem problem_by_name(const std::string& name, double eta = 0.6, double tau = 0.0,
                             int d = 2);

struct TerminalValues {
  Eigen::VectorXd y;  // M
  StateMatrix z;      // M x d
};

/// y_N = phi(X_N), z_N = sigma(T, X_N)' grad phi(X_N).
TerminalValues terminal_values(const FbsdeProblem& problem, const StateMatrix& x_terminal);

/// Gradient of phi at x, analytic when available.
Eigen::VectorXd terminal_gradient(const FbsdeProblem& problem, StateRef x);

/// (u(t, x), zeta(t, x)); throws NoClosedForm.
std::pair<double, Eigen::VectorXd> closed_form_reference(const FbsdeProblem& problem, double t,
                                                         StateRef x);

}  // namespace fbsde
