#include "fbsde/scheme.hpp"
#include "fbsde/scheme_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

namespace {

using fbsde::Rational;
using RVec = fbsde::Vector<Rational>;

Rational R(const char* text) { return fbsde::parse_rational(text); }

RVec vec(std::initializer_list<const char*> items) {
  RVec v(static_cast<Eigen::Index>(items.size()));
  Eigen::Index k = 0;
  for (const char* s : items) v(k++) = R(s);
  return v;
}

void expect_vec(const RVec& got, const RVec& want) {
  ASSERT_EQ(got.size(), want.size());
  for (Eigen::Index k = 0; k < got.size(); ++k) {
    EXPECT_EQ(got(k), want(k)) << "entry " << k << ": " << fbsde::format_rational(got(k)) << " vs "
                               << fbsde::format_rational(want(k));
  }
}

// Apply the corrector to u(t) = t^q on the grid 0, 1, ..., m (h = 1) with the
// backward-equation driver f = -u'. An order-m formula reproduces u(0) exactly
// for every q <= m.
Rational corrector_defect(const fbsde::CorrectorCoefficients<Rational>& c, int q) {
  auto pw = [](int base, int e) {
    Rational r(1);
    for (int k = 0; k < e; ++k) r *= base;
    return r;
  };
  auto du = [&](int t) { return q == 0 ? Rational(0) : Rational(q) * pw(t, q - 1); };
  Rational rhs(0);
  for (int j = 1; j <= c.steps(); ++j) rhs += c.alpha(j - 1) * pw(j, q) - c.gamma(j - 1) * du(j);
  rhs -= c.gamma0 * du(0);
  return pw(0, q) - rhs;
}

Rational predictor_defect(const fbsde::PredictorCoefficients<Rational>& p, int q) {
  fbsde::CorrectorCoefficients<Rational> c{p.alpha, Rational(0), p.gamma};
  return corrector_defect(c, q);
}

struct AdamsRow {
  int order;
  std::initializer_list<const char*> pred;
  std::initializer_list<const char*> corr;  // beta_0, beta_1, ...
  const char* c_pred;
  const char* c_corr;
};

const AdamsRow kTable[] = {
    {1, {"1"}, {"1", "0"}, "1/2", "-1/2"},
    {2, {"3/2", "-1/2"}, {"1/2", "1/2"}, "-5/12", "1/12"},
    {3, {"23/12", "-4/3", "5/12"}, {"5/12", "2/3", "-1/12"}, "3/8", "-1/24"},
    {4, {"55/24", "-59/24", "37/24", "-3/8"}, {"3/8", "19/24", "-5/24", "1/24"}, "-251/720", "19/720"},
    {5,
     {"1901/720", "-1387/360", "109/30", "-637/360", "251/720"},
     {"251/720", "323/360", "-11/30", "53/360", "-19/720"},
     "95/288",
     "-3/160"},
    {6,
     {"4277/1440", "-2641/480", "4991/720", "-3649/720", "959/480", "-95/288"},
     {"95/288", "1427/1440", "-133/240", "241/720", "-173/1440", "3/160"},
     "-19087/60480",
     "863/60480"},
};

}  // namespace

TEST(AdamsPair, MatchesReferenceTable) {
  for (const auto& row : kTable) {
    SCOPED_TRACE("order " + std::to_string(row.order));
    const auto s = fbsde::adams_pair<Rational>(row.order);
    expect_vec(s.predictor.gamma, vec(row.pred));
    const RVec corr = vec(row.corr);
    EXPECT_EQ(s.corrector.gamma0, corr(0));
    // The corrector is stored with `order` steps and a trailing zero weight.
    RVec tail = RVec::Zero(row.order);
    tail.head(corr.size() - 1) = corr.tail(corr.size() - 1);
    expect_vec(s.corrector.gamma, tail);
    EXPECT_EQ(s.error_constant_pred, R(row.c_pred));
    EXPECT_EQ(s.error_constant_corr, R(row.c_corr));
    for (int j = 0; j < row.order; ++j) {
      EXPECT_EQ(s.predictor.alpha(j), Rational(j == 0 ? 1 : 0));
      EXPECT_EQ(s.corrector.alpha(j), Rational(j == 0 ? 1 : 0));
    }
  }
}

TEST(AdamsPair, PolynomialExactness) {
  for (int k = 1; k <= 6; ++k) {
    const auto s = fbsde::adams_pair<Rational>(k);
    for (int q = 0; q <= k; ++q) {
      EXPECT_EQ(corrector_defect(s.corrector, q), Rational(0)) << "k=" << k << " q=" << q;
      EXPECT_EQ(predictor_defect(s.predictor, q), Rational(0)) << "k=" << k << " q=" << q;
    }
    EXPECT_NE(corrector_defect(s.corrector, k + 1), Rational(0));
  }
}

TEST(AdamsPair, RejectsUnsupportedOrders) {
  for (int k : {0, 7, -1}) {
    try {
      fbsde::adams_pair<Rational>(k);
      FAIL() << "order " << k << " accepted";
    } catch (const fbsde::Error& e) {
      EXPECT_EQ(e.code(), fbsde::ErrorCode::UnsupportedOrder);
    }
  }
}

TEST(OrderConditions, OneStepFromGamma0) {
  fbsde::CorrectorPins<Rational> pins(1);
  pins.gamma0 = R("1/2");
  const auto c = fbsde::solve_order_conditions(1, pins);
  EXPECT_EQ(c.alpha(0), Rational(1));
  EXPECT_EQ(c.gamma(0), R("1/2"));

  fbsde::CorrectorPins<Rational> euler(1);
  euler.gamma0 = Rational(1);
  const auto e = fbsde::solve_order_conditions(1, euler);
  EXPECT_EQ(e.alpha(0), Rational(1));
  EXPECT_EQ(e.gamma(0), Rational(0));

  fbsde::PredictorPins<Rational> pp(1);
  pp.alpha[0] = Rational(1);
  EXPECT_EQ(fbsde::solve_predictor_conditions(1, pp).gamma(0), Rational(1));
}

TEST(OrderConditions, ThreeStepUniformScheme) {
  fbsde::CorrectorPins<Rational> cp(3);
  fbsde::PredictorPins<Rational> pp(3);
  for (int j = 0; j < 3; ++j) cp.alpha[j] = pp.alpha[j] = R("1/3");
  cp.gamma0 = R("5/6");
  const auto c = fbsde::solve_order_conditions(3, cp);
  const auto p = fbsde::solve_predictor_conditions(3, pp);
  expect_vec(c.gamma, vec({"-1/3", "11/6", "-1/3"}));
  expect_vec(p.gamma, vec({"39/18", "-2/3", "1/2"}));
  for (int q = 0; q <= 3; ++q) {
    EXPECT_EQ(corrector_defect(c, q), Rational(0));
    EXPECT_EQ(predictor_defect(p, q), Rational(0));
  }
  const auto rc = fbsde::truncation_residuals(c, 3);
  const auto rp = fbsde::truncation_residuals(p, 3);
  for (int j = 0; j <= 3; ++j) {
    EXPECT_LT(fbsde::magnitude(rc(j)), 1e-12);
    EXPECT_LT(fbsde::magnitude(rp(j)), 1e-12);
  }
  // Same system in floating point.
  fbsde::CorrectorPins<double> dp(3);
  for (int j = 0; j < 3; ++j) dp.alpha[j] = 1.0 / 3.0;
  dp.gamma0 = 5.0 / 6.0;
  const auto cd = fbsde::solve_order_conditions(3, dp);
  EXPECT_NEAR(cd.gamma(1), 11.0 / 6.0, 1e-13);
  EXPECT_LT(fbsde::truncation_residuals(cd, 3).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(OrderConditions, TwoStepPredictorFromAdamsPins) {
  fbsde::PredictorPins<Rational> pp(2);
  pp.alpha = {Rational(1), Rational(0)};
  expect_vec(fbsde::solve_predictor_conditions(2, pp).gamma, vec({"3/2", "-1/2"}));
}

TEST(OrderConditions, PinCountErrors) {
  fbsde::CorrectorPins<Rational> none(2);
  try {
    fbsde::solve_order_conditions(2, none);
    FAIL();
  } catch (const fbsde::Error& e) {
    EXPECT_EQ(e.code(), fbsde::ErrorCode::Underdetermined);
  }
  fbsde::CorrectorPins<Rational> all(1);
  all.alpha[0] = Rational(1);
  all.gamma0 = Rational(1);
  all.gamma[0] = Rational(1);
  try {
    fbsde::solve_order_conditions(1, all);
    FAIL();
  } catch (const fbsde::Error& e) {
    EXPECT_EQ(e.code(), fbsde::ErrorCode::Overdetermined);
  }
}

TEST(OrderConditions, SingularPins) {
  // Leaves alpha_1, alpha_3, gamma_0, gamma_2, gamma_4 free: five active
  // conditions for five unknowns, but the reduced matrix has determinant 0.
  fbsde::CorrectorPins<Rational> pins(4);
  pins.alpha[1] = pins.alpha[3] = Rational(0);
  pins.gamma[0] = pins.gamma[2] = Rational(0);
  try {
    fbsde::solve_order_conditions(4, pins);
    FAIL();
  } catch (const fbsde::Error& e) {
    EXPECT_EQ(e.code(), fbsde::ErrorCode::SingularSystem);
  }
}

TEST(TruncationResiduals, DirectSubstitution) {
  fbsde::CorrectorCoefficients<Rational> c{vec({"1"}), Rational(0), vec({"0"})};
  expect_vec(fbsde::truncation_residuals(c, 1), vec({"0", "-1"}));
  const auto a2 = fbsde::adams_pair<Rational>(2);
  expect_vec(fbsde::truncation_residuals(a2.corrector, 3), vec({"0", "0", "0", "1/12"}));
  expect_vec(fbsde::truncation_residuals(a2.predictor, 3), vec({"0", "0", "0", "-5/12"}));
}

TEST(DerivativeWeights, Fixtures) {
  expect_vec(fbsde::derivative_weights<Rational>(1).lambda_h, vec({"-1", "1"}));
  expect_vec(fbsde::derivative_weights<Rational>(2).lambda_h, vec({"-3/2", "2", "-1/2"}));
  expect_vec(fbsde::derivative_weights<Rational>(3).lambda_h, vec({"-11/6", "3", "-3/2", "1/3"}));
}

TEST(DerivativeWeights, DifferentiatePolynomialsExactly) {
  for (int m = 1; m <= 8; ++m) {
    const auto w = fbsde::derivative_weights<Rational>(m).lambda_h;
    EXPECT_EQ(w.sum(), Rational(0));
    for (int q = 1; q <= m; ++q) {
      Rational acc(0);
      for (int n = 0; n <= m; ++n) {
        Rational p(1);
        for (int e = 0; e < q; ++e) p *= n;
        acc += w(n) * p;
      }
      // d/dt t^q at 0 is 1 for q = 1 and 0 otherwise.
      EXPECT_EQ(acc, Rational(q == 1 ? 1 : 0)) << "m=" << m << " q=" << q;
    }
  }
  EXPECT_THROW(fbsde::derivative_weights<Rational>(13), fbsde::Error);
  EXPECT_THROW(fbsde::derivative_weights<Rational>(0), fbsde::Error);
}

TEST(MilneFactor, AdamsPairs) {
  EXPECT_EQ(fbsde::milne_factor(fbsde::adams_pair<Rational>(1)), R("1/2"));
  EXPECT_EQ(fbsde::milne_factor(fbsde::adams_pair<Rational>(2)), R("1/6"));
  EXPECT_EQ(fbsde::milne_factor(fbsde::adams_pair<Rational>(4)), R("19/270"));
}

TEST(MilneFactor, DegenerateWhenConstantsCoincide) {
  auto s = fbsde::adams_pair<Rational>(2);
  s.error_constant_pred = s.error_constant_corr;
  try {
    fbsde::milne_factor(s);
    FAIL();
  } catch (const fbsde::Error& e) {
    EXPECT_EQ(e.code(), fbsde::ErrorCode::DegenerateIndicator);
  }
}

TEST(Presets, UniformFamily) {
  const char* gamma0[] = {"1/2", "1/2", "5/6", "1/2"};
  for (int m = 1; m <= 4; ++m) {
    const auto s = fbsde::stable_preset<Rational>(m);
    EXPECT_EQ(s.corrector.gamma0, R(gamma0[m - 1]));
    for (int j = 0; j < m; ++j) EXPECT_EQ(s.corrector.alpha(j), Rational(1) / m);
    for (int q = 0; q <= m; ++q) EXPECT_EQ(corrector_defect(s.corrector, q), Rational(0));
  }
  EXPECT_THROW(fbsde::stable_preset<Rational>(5), fbsde::Error);
}

TEST(Presets, UnstableSchemes) {
  const auto u2 = fbsde::unstable_two_step<Rational>();
  expect_vec(u2.corrector.alpha, vec({"3", "-2"}));
  EXPECT_EQ(u2.corrector.gamma0, Rational(1));
  const auto u3 = fbsde::unstable_three_step<Rational>();
  expect_vec(u3.corrector.alpha, vec({"2", "5", "-6"}));
  EXPECT_EQ(u3.corrector.gamma0, Rational(-3));
  for (int q = 0; q <= 2; ++q) EXPECT_EQ(corrector_defect(u2.corrector, q), Rational(0));
  for (int q = 0; q <= 3; ++q) EXPECT_EQ(corrector_defect(u3.corrector, q), Rational(0));
}

TEST(Catalog, LookupByName) {
  EXPECT_EQ(fbsde::scheme_by_name("adams-3").steps(), 3);
  EXPECT_EQ(fbsde::scheme_by_name("stable-2").corrector.gamma0, R("1/2"));
  EXPECT_EQ(fbsde::scheme_by_name("unstable-3").steps(), 3);
  EXPECT_THROW(fbsde::scheme_by_name("bogus"), fbsde::Error);
  EXPECT_GE(fbsde::scheme_catalog().size(), 12u);
}

TEST(SchemeIo, RoundTripThroughJson) {
  for (const auto& s : fbsde::scheme_catalog()) {
    const auto back = fbsde::scheme_from_json(fbsde::scheme_to_json(s));
    expect_vec(back.corrector.alpha, s.corrector.alpha);
    expect_vec(back.corrector.gamma, s.corrector.gamma);
    expect_vec(back.predictor.alpha, s.predictor.alpha);
    expect_vec(back.predictor.gamma, s.predictor.gamma);
    expect_vec(back.zweights.lambda_h, s.zweights.lambda_h);
    EXPECT_EQ(back.corrector.gamma0, s.corrector.gamma0);
    EXPECT_EQ(back.error_constant_corr, s.error_constant_corr);
    EXPECT_EQ(back.error_constant_pred, s.error_constant_pred);
  }
}

TEST(SchemeIo, DocumentShape) {
  const auto doc = fbsde::scheme_to_json(fbsde::adams_pair<Rational>(2));
  EXPECT_EQ(doc.at("m").get<int>(), 2);
  EXPECT_EQ(doc.at("gamma0").get<std::string>(), "1/2");
  EXPECT_EQ(doc.at("C_corr").get<std::string>(), "1/12");
  EXPECT_EQ(doc.at("C_pred").get<std::string>(), "-5/12");
  EXPECT_EQ(doc.at("lambda_h").size(), 3u);
}

TEST(SchemeIo, AcceptsDecimalsAndRecomputesDerivedFields) {
  nlohmann::json doc = {{"m", 1},           {"alpha", {"1"}},         {"gamma0", "0.5"},
                        {"gamma", {0.5}},   {"alpha_tilde", {"1"}},   {"gamma_tilde", {"1"}}};
  const auto s = fbsde::scheme_from_json(doc);
  EXPECT_EQ(s.corrector.gamma0, R("1/2"));
  expect_vec(s.zweights.lambda_h, vec({"-1", "1"}));
}

TEST(SchemeIo, RejectsInconsistentDocuments) {
  auto doc = fbsde::scheme_to_json(fbsde::adams_pair<Rational>(2));
  doc["C_corr"] = "1/7";
  EXPECT_THROW(fbsde::scheme_from_json(doc), fbsde::Error);
  auto short_doc = fbsde::scheme_to_json(fbsde::adams_pair<Rational>(2));
  short_doc["alpha"] = {"1"};
  EXPECT_THROW(fbsde::scheme_from_json(short_doc), fbsde::Error);
  EXPECT_THROW(fbsde::parse_rational("1/0"), fbsde::Error);
  EXPECT_THROW(fbsde::parse_rational("abc"), fbsde::Error);
}

TEST(SchemeIo, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "fbsde_scheme_roundtrip.json";
  const auto s = fbsde::scheme_by_name("stable-3");
  fbsde::save_scheme_file(s, path.string());
  const auto back = fbsde::load_scheme_file(path.string());
  EXPECT_EQ(back.corrector.gamma0, s.corrector.gamma0);
  expect_vec(back.predictor.gamma, s.predictor.gamma);
  std::filesystem::remove(path);
  EXPECT_THROW(fbsde::load_scheme_file(path.string()), fbsde::Error);
}
