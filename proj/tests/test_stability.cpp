#include "fbsde/stability.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

namespace {

using fbsde::Complex;
using fbsde::StabilityStatus;

fbsde::CharacteristicPolynomial<double> poly(std::initializer_list<double> c) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(c.size()));
  Eigen::Index k = 0;
  for (double x : c) v(k++) = x;
  return {v};
}

std::vector<double> sorted_real_parts(const std::vector<Complex>& roots) {
  std::vector<double> out;
  for (const auto& r : roots) out.push_back(r.real());
  std::sort(out.begin(), out.end());
  return out;
}

// Random roots strictly inside the disk of radius `radius`, in conjugate pairs
// plus at most one real root, `degree` in total.
std::vector<Complex> random_roots(std::mt19937_64& rng, int degree, double radius) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Complex> roots;
  while (static_cast<int>(roots.size()) + 2 <= degree) {
    const double rho = radius * std::sqrt(unit(rng));
    const double theta = 3.141592653589793 * unit(rng);
    roots.push_back(std::polar(rho, theta));
    roots.push_back(std::polar(rho, -theta));
  }
  if (static_cast<int>(roots.size()) < degree) roots.emplace_back(radius * (2.0 * unit(rng) - 1.0), 0.0);
  return roots;
}

}  // namespace

TEST(CharacteristicPolynomial, FromCorrectorWeights) {
  const auto u2 = fbsde::unstable_two_step<fbsde::Rational>();
  const auto p = fbsde::characteristic_polynomial(u2.corrector);
  ASSERT_EQ(p.degree(), 2);
  EXPECT_EQ(p.coeffs(0), fbsde::Rational(1));
  EXPECT_EQ(p.coeffs(1), fbsde::Rational(-3));
  EXPECT_EQ(p.coeffs(2), fbsde::Rational(2));

  const auto s3 = fbsde::stable_preset<fbsde::Rational>(3);
  const auto q = fbsde::characteristic_polynomial(s3.corrector);
  for (int j = 1; j <= 3; ++j) EXPECT_EQ(q.coeffs(j), fbsde::Rational(-1) / 3);

  const auto one = fbsde::characteristic_polynomial(fbsde::adams_pair<fbsde::Rational>(1).corrector);
  EXPECT_EQ(one.degree(), 1);
  EXPECT_EQ(one.coeffs(1), fbsde::Rational(-1));
}

TEST(PolynomialRoots, KnownRoots) {
  const auto r2 = sorted_real_parts(fbsde::polynomial_roots(poly({1, -3, 2})));
  EXPECT_NEAR(r2[0], 1.0, 1e-12);
  EXPECT_NEAR(r2[1], 2.0, 1e-12);
  const auto r3 = sorted_real_parts(fbsde::polynomial_roots(poly({1, -2, -5, 6})));
  EXPECT_NEAR(r3[0], -2.0, 1e-12);
  EXPECT_NEAR(r3[1], 1.0, 1e-12);
  EXPECT_NEAR(r3[2], 3.0, 1e-12);
  const auto r1 = fbsde::polynomial_roots(poly({1, -1}));
  ASSERT_EQ(r1.size(), 1u);
  EXPECT_NEAR(std::abs(r1[0] - Complex(1.0, 0.0)), 0.0, 1e-14);
}

TEST(PolynomialRoots, ThreeStepUniformScheme) {
  // z^3 - z^2/3 - z/3 - 1/3 = (z - 1)(z^2 + 2z/3 + 1/3)
  const auto roots = fbsde::polynomial_roots(poly({1, -1.0 / 3, -1.0 / 3, -1.0 / 3}));
  ASSERT_EQ(roots.size(), 3u);
  int unit = 0;
  for (const auto& r : roots) {
    if (std::abs(r - Complex(1.0, 0.0)) < 1e-12) {
      ++unit;
    } else {
      EXPECT_NEAR(r.real(), -1.0 / 3.0, 1e-12);
      EXPECT_NEAR(std::abs(r.imag()), std::sqrt(2.0) / 3.0, 1e-12);
    }
  }
  EXPECT_EQ(unit, 1);
}

TEST(PolynomialRoots, ResidualBound) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 200; ++trial) {
    const int degree = 1 + trial % 8;
    Eigen::VectorXd c(degree + 1);
    c(0) = 1.0;
    for (int k = 1; k <= degree; ++k) c(k) = g(rng);
    const auto roots = fbsde::polynomial_roots(fbsde::CharacteristicPolynomial<double>{c});
    ASSERT_EQ(static_cast<int>(roots.size()), degree);
    for (const auto& r : roots) {
      EXPECT_LE(std::abs(fbsde::evaluate_polynomial(c, r)), 1e-9 * c.cwiseAbs().maxCoeff() * std::max(1.0, std::pow(std::abs(r), degree)));
    }
  }
}

TEST(PolynomialRoots, ReconstructionRecoversCoefficients) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int tested = 0;
  while (tested < 300) {
    const int degree = 1 + tested % 6;
    auto roots = random_roots(rng, degree, 1.5);
    // Keep only well separated configurations.
    double sep = 1.0;
    for (std::size_t a = 0; a < roots.size(); ++a) {
      for (std::size_t b = a + 1; b < roots.size(); ++b) sep = std::min(sep, std::abs(roots[a] - roots[b]));
    }
    if (sep < 0.05) continue;
    ++tested;
    const Eigen::VectorXd c = fbsde::polynomial_from_roots(roots);
    const auto found = fbsde::polynomial_roots(fbsde::CharacteristicPolynomial<double>{c});
    const Eigen::VectorXd back = fbsde::polynomial_from_roots(found);
    EXPECT_LE((back - c).cwiseAbs().maxCoeff(), 1e-8 * c.cwiseAbs().maxCoeff());
  }
}

TEST(RootCondition, Fixtures) {
  EXPECT_EQ(fbsde::check_root_condition(fbsde::polynomial_roots(poly({1, -1}))).status, StabilityStatus::Stable);
  EXPECT_EQ(fbsde::scheme_stability(fbsde::stable_preset<fbsde::Rational>(3)).status, StabilityStatus::Stable);

  const auto v2 = fbsde::scheme_stability(fbsde::unstable_two_step<fbsde::Rational>());
  EXPECT_EQ(v2.status, StabilityStatus::Unstable);
  const auto off2 = sorted_real_parts(v2.offending);
  ASSERT_EQ(off2.size(), 1u);
  EXPECT_NEAR(off2[0], 2.0, 1e-10);

  const auto v3 = fbsde::scheme_stability(fbsde::unstable_three_step<fbsde::Rational>());
  EXPECT_EQ(v3.status, StabilityStatus::Unstable);
  const auto off3 = sorted_real_parts(v3.offending);
  ASSERT_EQ(off3.size(), 2u);
  EXPECT_NEAR(off3[0], -2.0, 1e-10);
  EXPECT_NEAR(off3[1], 3.0, 1e-10);
}

TEST(RootCondition, EveryCatalogSchemeExceptTheUnstableOnes) {
  for (const auto& s : fbsde::scheme_catalog()) {
    const auto v = fbsde::scheme_stability(s);
    if (s.name.rfind("unstable", 0) == 0) {
      EXPECT_EQ(v.status, StabilityStatus::Unstable) << s.name;
    } else {
      EXPECT_EQ(v.status, StabilityStatus::Stable) << s.name;
    }
  }
}

TEST(RootCondition, MultipleUnitRootIsUnstable) {
  const auto v = fbsde::check_root_condition({Complex(1, 0), Complex(1, 0)});
  EXPECT_EQ(v.status, StabilityStatus::Unstable);
  ASSERT_EQ(v.roots.size(), 1u);
  EXPECT_EQ(v.roots[0].multiplicity, 2);
  // A double root inside the disk is harmless.
  EXPECT_EQ(fbsde::check_root_condition({Complex(1, 0), Complex(0.5, 0), Complex(0.5, 0)}).status,
            StabilityStatus::Stable);
}

TEST(RootCondition, NearlyDoubleUnitRootIsMarginal) {
  const auto v = fbsde::check_root_condition({Complex(1, 0), Complex(1 - 1e-6, 0)}, 1e-8);
  EXPECT_EQ(v.status, StabilityStatus::Marginal);
}

TEST(RootCondition, RandomStableAndPlantedUnstable) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int degree = 1 + trial % 6;
    // Consistent schemes always carry the simple root 1.
    auto roots = random_roots(rng, degree - 1, 0.95);
    roots.emplace_back(1.0, 0.0);
    const Eigen::VectorXd c = fbsde::polynomial_from_roots(roots);
    const auto stable = fbsde::check_root_condition(
        fbsde::polynomial_roots(fbsde::CharacteristicPolynomial<double>{c}));
    EXPECT_EQ(stable.status, StabilityStatus::Stable) << "trial " << trial;

    auto planted = roots;
    const double theta = 2.0 * 3.141592653589793 * unit(rng);
    if (degree >= 3) {
      planted[0] = std::polar(1.05, theta);
      planted[1] = std::conj(planted[0]);
    } else if (degree == 2) {
      planted[0] = Complex(unit(rng) < 0.5 ? -1.05 : 1.05, 0.0);
    } else {
      planted[0] = Complex(1.05, 0.0);
    }
    const Eigen::VectorXd cu = fbsde::polynomial_from_roots(planted);
    const auto unstable = fbsde::check_root_condition(
        fbsde::polynomial_roots(fbsde::CharacteristicPolynomial<double>{cu}));
    EXPECT_EQ(unstable.status, StabilityStatus::Unstable) << "trial " << trial;
    EXPECT_FALSE(unstable.offending.empty());
  }
}

TEST(RootCondition, JsonReport) {
  const auto doc = fbsde::verdict_to_json(fbsde::scheme_stability(fbsde::unstable_two_step<fbsde::Rational>()));
  EXPECT_EQ(doc.at("status").get<std::string>(), "Unstable");
  EXPECT_EQ(doc.at("roots").size(), 2u);
  EXPECT_EQ(doc.at("offending").size(), 1u);
  EXPECT_NEAR(doc.at("offending")[0].at("modulus").get<double>(), 2.0, 1e-10);
}
