#include "fbsde/stability.hpp"

#include "fbsde/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>
#include <sstream>

namespace fbsde {

Complex evaluate_polynomial(const Eigen::VectorXd& coeffs, Complex z, Complex* derivative) {
  Complex value = 0.0;
  Complex slope = 0.0;
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
    slope = slope * z + value;
    value = value * z + coeffs(k);
  }
  if (derivative != nullptr) *derivative = slope;
  return value;
}

std::vector<Complex> polynomial_roots(const CharacteristicPolynomial<double>& poly) {
  const int n = poly.degree();
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "polynomial degree must be at least 1");
  if (poly.coeffs(0) == 0.0) throw Error(ErrorCode::InvalidArgument, "leading coefficient is zero");
  const Eigen::VectorXd monic = poly.coeffs / poly.coeffs(0);

  std::vector<Complex> roots;
  if (n == 1) {
    roots.emplace_back(-monic(1), 0.0);
    return roots;
  }

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  companion.row(0) = -monic.tail(n).transpose();
  companion.diagonal(-1).setOnes();

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
  const Eigen::VectorXcd eig = solver.eigenvalues();
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "companion eigenvalue iteration failed; partial (invalid) roots:";
    for (Eigen::Index k = 0; k < eig.size(); ++k) msg << ' ' << eig(k);
    throw Error(ErrorCode::NonConvergence, msg.str());
  }

  roots.reserve(n);
  for (Eigen::Index k = 0; k < eig.size(); ++k) {
    Complex z = eig(k);
    Complex slope;
    const Complex value = evaluate_polynomial(monic, z, &slope);
    if (std::abs(slope) > 0.0) {
      const Complex polished = z - value / slope;
      if (std::abs(evaluate_polynomial(monic, polished)) <= std::abs(value)) z = polished;
    }
    roots.push_back(z);
  }
  return roots;
}

Eigen::VectorXd polynomial_from_roots(const std::vector<Complex>& roots) {
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(roots.size()) + 1);
  c(0) = 1.0;
  Eigen::Index len = 1;
  for (const Complex& r : roots) {
    for (Eigen::Index k = len; k >= 1; --k) c(k) -= r * c(k - 1);
    ++len;
  }
  return c.real();
}

std::string_view to_string(StabilityStatus status) noexcept {
  switch (status) {
    case StabilityStatus::Stable: return "Stable";
    case StabilityStatus::Marginal: return "Marginal";
    case StabilityStatus::Unstable: return "Unstable";
  }
  return "Unknown";
}

namespace {

struct Clustering {
  std::vector<int> label;  // cluster index per root
  std::vector<RootCluster> clusters;
};

Clustering cluster_roots(const std::vector<Complex>& roots, double tol) {
  const int n = static_cast<int>(roots.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(roots[i] - roots[j]) < tol) parent[find(i)] = find(j);
    }
  }

  Clustering out;
  out.label.assign(n, -1);
  std::vector<int> root_to_cluster(n, -1);
  std::vector<Complex> sums;
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (root_to_cluster[r] < 0) {
      root_to_cluster[r] = static_cast<int>(out.clusters.size());
      out.clusters.push_back({0.0, 0});
      sums.emplace_back(0.0);
    }
    const int c = root_to_cluster[r];
    out.label[i] = c;
    sums[c] += roots[i];
    ++out.clusters[c].multiplicity;
  }
  for (std::size_t c = 0; c < out.clusters.size(); ++c) {
    out.clusters[c].center = sums[c] / static_cast<double>(out.clusters[c].multiplicity);
  }
  return out;
}

}  // namespace

StabilityVerdict check_root_condition(const std::vector<Complex>& roots, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "root tolerance must be positive");

  const Clustering strict = cluster_roots(roots, tol);
  StabilityVerdict verdict;
  verdict.roots = strict.clusters;

  for (std::size_t i = 0; i < roots.size(); ++i) {
    const RootCluster& cluster = strict.clusters[strict.label[i]];
    const double modulus = std::abs(cluster.center);
    const bool outside = std::abs(roots[i]) > 1.0 + tol;
    const bool repeated_on_circle = std::abs(modulus - 1.0) <= tol && cluster.multiplicity >= 2;
    if (outside || repeated_on_circle) verdict.offending.push_back(roots[i]);
  }
  if (!verdict.offending.empty()) {
    verdict.status = StabilityStatus::Unstable;
    return verdict;
  }

  const double loose = std::sqrt(tol);
  const Clustering relaxed = cluster_roots(roots, loose);
  for (const RootCluster& cluster : relaxed.clusters) {
    if (cluster.multiplicity >= 2 && std::abs(std::abs(cluster.center) - 1.0) <= loose) {
      verdict.status = StabilityStatus::Marginal;
      break;
    }
  }
  return verdict;
}

nlohmann::json verdict_to_json(const StabilityVerdict& verdict) {
  using nlohmann::json;
  json doc;
  doc["status"] = std::string(to_string(verdict.status));
  json roots = json::array();
  for (const RootCluster& c : verdict.roots) {
    roots.push_back({{"re", c.center.real()},
                     {"im", c.center.imag()},
                     {"modulus", std::abs(c.center)},
                     {"multiplicity", c.multiplicity}});
  }
  doc["roots"] = roots;
  json offending = json::array();
  for (const Complex& z : verdict.offending) {
    offending.push_back({{"re", z.real()}, {"im", z.imag()}, {"modulus", std::abs(z)}});
  }
  doc["offending"] = offending;
  return doc;
}

}  // namespace fbsde
