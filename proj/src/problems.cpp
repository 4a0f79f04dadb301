#include "fbsde/problems.hpp"

#include "fbsde/error.hpp"

#include <algorithm>
#include <cmath>

namespace fbsde {

FbsdeProblem example1(double eta, double tau, int d, double T, DampingTime damping) {
  if (!(eta > 0.0)) throw Error(ErrorCode::InvalidArgument, "eta must be positive");
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be positive");
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  if (!(T > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");

  FbsdeProblem p;
  p.name = "example1";
  p.d = d;
  p.T = T;
  p.x0 = Eigen::VectorXd::Zero(d);

  const double rate = 0.5 * tau * tau * d;
  auto decay = [rate, T](double t) { return std::exp(-rate * (T - t)); };

  p.b = [d](double, StateRef) { return Eigen::VectorXd::Zero(d).eval(); };
  p.sigma = [d](double, StateRef) { return Eigen::MatrixXd::Identity(d, d).eval(); };
  p.f = [=](double t, StateRef x, double y, StateRef) {
    const double damp = damping == DampingTime::Running ? decay(t) : decay(0.0);
    const double gap = y - eta - 1.0 - std::sin(tau * x.sum()) * damp;
    return std::min(1.0, gap * gap);
  };
  p.phi = [=](StateRef x) { return 1.0 + eta + std::sin(tau * x.sum()); };
  p.grad_phi = [=](StateRef x) {
    return Eigen::VectorXd::Constant(d, tau * std::cos(tau * x.sum())).eval();
  };
  p.bound_y = 2.0 + eta;
  p.bound_z = tau * std::sqrt(static_cast<double>(d));
  p.closed_form = ClosedForm{
      [=](double t, StateRef x) { return 1.0 + eta + std::sin(tau * x.sum()) * decay(t); },
      [=](double t, StateRef x) {
        return Eigen::VectorXd::Constant(d, tau * std::cos(tau * x.sum()) * decay(t)).eval();
      }};
  return p;
}

FbsdeProblem example2(bool as_printed) {
  FbsdeProblem p;
  p.name = "example2";
  p.d = 1;
  p.T = 1.0;
  p.x0 = Eigen::VectorXd::Constant(1, 1.0);

  p.b = [](double t, StateRef x) {
    return Eigen::VectorXd::Constant(1, 1.0 / (1.0 + 2.0 * std::exp(t + x(0)))).eval();
  };
  p.sigma = [](double t, StateRef x) {
    const double e = std::exp(t + x(0));
    return Eigen::MatrixXd::Constant(1, 1, e / (1.0 + e)).eval();
  };
  const double linear_scale = as_printed ? 1.0 : 2.0;
  p.f = [linear_scale](double t, StateRef x, double y, StateRef z) {
    const double e = std::exp(t + x(0));
    return -2.0 * y / (1.0 + linear_scale * e) - 0.5 * (y * z(0) / (1.0 + e) - y * y * z(0));
  };
  const double T = p.T;
  p.phi = [T](StateRef x) {
    const double e = std::exp(T + x(0));
    return e / (1.0 + e);
  };
  p.grad_phi = [T](StateRef x) {
    const double e = std::exp(T + x(0));
    return Eigen::VectorXd::Constant(1, e / ((1.0 + e) * (1.0 + e))).eval();
  };
  p.bound_y = 1.0;
  p.bound_z = 1.0;
  p.closed_form = ClosedForm{[](double t, StateRef x) {
                               const double e = std::exp(t + x(0));
                               return e / (1.0 + e);
                             },
                             [](double t, StateRef x) {
                               const double e = std::exp(t + x(0));
                               return Eigen::VectorXd::Constant(1, e * e / std::pow(1.0 + e, 3))
                                   .eval();
                             }};
  return p;
}

FbsdeProblem exponential_ode(double T) {
  FbsdeProblem p;
  p.name = "exponential";
  p.d = 1;
  p.T = T;
  p.x0 = Eigen::VectorXd::Zero(1);
  p.b = [](double, StateRef) { return Eigen::VectorXd::Zero(1).eval(); };
  p.sigma = [](double, StateRef) { return Eigen::MatrixXd::Zero(1, 1).eval(); };
  p.f = [](double, StateRef, double y, StateRef) { return y; };
  p.phi = [](StateRef) { return 1.0; };
  p.grad_phi = [](StateRef) { return Eigen::VectorXd::Zero(1).eval(); };
  p.closed_form = ClosedForm{[T](double t, StateRef) { return std::exp(T - t); },
                             [](double, StateRef) { return Eigen::VectorXd::Zero(1).eval(); }};
  return p;
}

FbsdeProblem constant_terminal(int d, double c, double T) {
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  FbsdeProblem p;
  p.name = "constant";
  p.d = d;
  p.T = T;
  p.x0 = Eigen::VectorXd::Zero(d);
  p.b = [d](double, StateRef) { return Eigen::VectorXd::Zero(d).eval(); };
  p.sigma = [d](double, StateRef) { return Eigen::MatrixXd::Identity(d, d).eval(); };
  p.f = [](double, StateRef, double, StateRef) { return 0.0; };
  p.phi = [c](StateRef) { return c; };
  p.grad_phi = [d](StateRef) { return Eigen::VectorXd::Zero(d).eval(); };
  p.closed_form = ClosedForm{[c](double, StateRef) { return c; },
                             [d](double, StateRef) { return Eigen::VectorXd::Zero(d).eval(); }};
  return p;
}

FbsdeProblem problem_by_name(const std::string& name, double eta, double tau, int d) {
  if (name == "example1") {
    if (d < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
    return example1(eta, tau > 0.0 ? tau : 1.0 / std::sqrt(static_cast<double>(d)), d);
  }
  if (name == "example2") return example2();
  if (name == "example2-printed") return example2(true);
  if (name == "exponential") return exponential_ode();
  if (name == "constant") return constant_terminal(d, 1.0);
  throw Error(ErrorCode::InvalidArgument, "unknown problem '" + name + "'");
}

Eigen::VectorXd terminal_gradient(const FbsdeProblem& problem, StateRef x) {
  if (problem.grad_phi) return problem.grad_phi(x);
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double step = 1e-6 * (1.0 + std::abs(x(k)));
    probe(k) = x(k) + step;
    const double up = problem.phi(probe);
    probe(k) = x(k) - step;
    const double down = problem.phi(probe);
    probe(k) = x(k);
    g(k) = (up - down) / (2.0 * step);
  }
  return g;
}

TerminalValues terminal_values(const FbsdeProblem& problem, const StateMatrix& x_terminal) {
  if (x_terminal.cols() != problem.d) {
    throw Error(ErrorCode::DimensionMismatch, "terminal states have the wrong dimension");
  }
  const Eigen::Index m = x_terminal.rows();
  TerminalValues out{Eigen::VectorXd(m), StateMatrix(m, problem.d)};
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::VectorXd x = x_terminal.row(k).transpose();
    out.y(k) = problem.phi(x);
    out.z.row(k) = (problem.sigma(problem.T, x).transpose() * terminal_gradient(problem, x)).transpose();
  }
  return out;
}

std::pair<double, Eigen::VectorXd> closed_form_reference(const FbsdeProblem& problem, double t,
                                                         StateRef x) {
  if (!problem.closed_form) {
    throw Error(ErrorCode::NoClosedForm, "problem '" + problem.name + "' has no closed form");
  }
  if (x.size() != problem.d) throw Error(ErrorCode::DimensionMismatch, "state has the wrong dimension");
  return {problem.closed_form->u(t, x), problem.closed_form->zeta(t, x)};
}

}  // namespace fbsde
