#pragma once

#include "fbsde/rational.hpp"
#include "fbsde/scheme.hpp"

#include "json.hpp"

#include <string>

namespace fbsde {

// Scheme documents look like
//   {"m": 2, "alpha": ["1/2","1/2"], "gamma0": "1/2", "gamma": [...],
//    "alpha_tilde": [...], "gamma_tilde": [...], "lambda_h": [...],
//    "C_pred": "-3/8", "C_corr": "1/8"}
// with every coefficient written as a string so rationals survive untouched.
// Decimal strings ("0.5") and bare JSON numbers are accepted on input.

nlohmann::json scheme_to_json(const MultistepScheme<Rational>& scheme);

/// Reads a scheme document. lambda_h and the error constants are recomputed
/// from the coefficients when absent; when present they must agree with the
/// recomputed values.
MultistepScheme<Rational> scheme_from_json(const nlohmann::json& doc);

MultistepScheme<Rational> load_scheme_file(const std::string& path);
void save_scheme_file(const MultistepScheme<Rational>& scheme, const std::string& path);

}  // namespace fbsde
