#include "fbsde/scheme_io.hpp"

#include "fbsde/error.hpp"

#include <fstream>
#include <sstream>

namespace fbsde {

namespace {

using nlohmann::json;

json vec_to_json(const Vector<Rational>& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(format_rational(v(i)));
  return out;
}

Rational number_from_json(const json& value, const std::string& field) {
  if (value.is_string()) return parse_rational(value.get<std::string>());
  if (value.is_number_integer()) return Rational(value.get<long long>());
  if (value.is_number()) {
    // dump() keeps the shortest round-trip representation of the double
    return parse_rational(value.dump());
  }
  throw Error(ErrorCode::Parse, "field '" + field + "' must be a number or numeric string");
}

Vector<Rational> vec_from_json(const json& doc, const std::string& field, int expected) {
  if (!doc.contains(field) || !doc.at(field).is_array()) {
    throw Error(ErrorCode::Parse, "missing array field '" + field + "'");
  }
  const json& arr = doc.at(field);
  if (static_cast<int>(arr.size()) != expected) {
    throw Error(ErrorCode::Parse, "field '" + field + "' must have " + std::to_string(expected) +
                                      " entries, found " + std::to_string(arr.size()));
  }
  Vector<Rational> v(expected);
  for (int i = 0; i < expected; ++i) v(i) = number_from_json(arr.at(i), field);
  return v;
}

}  // namespace

json scheme_to_json(const MultistepScheme<Rational>& s) {
  json doc;
  doc["name"] = s.name;
  doc["m"] = s.steps();
  doc["alpha"] = vec_to_json(s.corrector.alpha);
  doc["gamma0"] = format_rational(s.corrector.gamma0);
  doc["gamma"] = vec_to_json(s.corrector.gamma);
  doc["alpha_tilde"] = vec_to_json(s.predictor.alpha);
  doc["gamma_tilde"] = vec_to_json(s.predictor.gamma);
  doc["lambda_h"] = vec_to_json(s.zweights.lambda_h);
  doc["C_pred"] = format_rational(s.error_constant_pred);
  doc["C_corr"] = format_rational(s.error_constant_corr);
  return doc;
}

MultistepScheme<Rational> scheme_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::Parse, "scheme document must be a JSON object");
  if (!doc.contains("m") || !doc.at("m").is_number_integer()) {
    throw Error(ErrorCode::Parse, "missing integer field 'm'");
  }
  const int m = doc.at("m").get<int>();
  if (m < 1) throw Error(ErrorCode::Parse, "'m' must be positive");
  if (!doc.contains("gamma0")) throw Error(ErrorCode::Parse, "missing field 'gamma0'");

  PredictorCoefficients<Rational> pred{vec_from_json(doc, "alpha_tilde", m),
                                       vec_from_json(doc, "gamma_tilde", m)};
  CorrectorCoefficients<Rational> corr{vec_from_json(doc, "alpha", m),
                                       number_from_json(doc.at("gamma0"), "gamma0"),
                                       vec_from_json(doc, "gamma", m)};
  const std::string name = doc.value("name", std::string("custom-") + std::to_string(m));
  MultistepScheme<Rational> s = make_scheme<Rational>(name, std::move(pred), std::move(corr));

  if (doc.contains("lambda_h") && vec_from_json(doc, "lambda_h", m + 1) != s.zweights.lambda_h) {
    throw Error(ErrorCode::Parse, "'lambda_h' disagrees with the derivative weights for m=" +
                                      std::to_string(m));
  }
  if (doc.contains("C_pred") && number_from_json(doc.at("C_pred"), "C_pred") != s.error_constant_pred) {
    throw Error(ErrorCode::Parse, "'C_pred' disagrees with the predictor's error constant " +
                                      format_rational(s.error_constant_pred));
  }
  if (doc.contains("C_corr") && number_from_json(doc.at("C_corr"), "C_corr") != s.error_constant_corr) {
    throw Error(ErrorCode::Parse, "'C_corr' disagrees with the corrector's error constant " +
                                      format_rational(s.error_constant_corr));
  }
  return s;
}

MultistepScheme<Rational> load_scheme_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open scheme file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, "'" + path + "': " + e.what());
  }
  return scheme_from_json(doc);
}

void save_scheme_file(const MultistepScheme<Rational>& scheme, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write scheme file '" + path + "'");
  out << scheme_to_json(scheme).dump(2) << '\n';
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

}  // namespace fbsde
