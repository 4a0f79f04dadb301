#include "fbsde/scheme.hpp"

#include <charconv>

namespace fbsde {

namespace {

int trailing_int(const std::string& id, std::size_t prefix_len) {
  int value = 0;
  const char* first = id.data() + prefix_len;
  const char* last = id.data() + id.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::InvalidArgument, "unknown scheme id '" + id + "'");
  }
  return value;
}

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.rfind(prefix, 0) == 0;
}

}  // namespace

MultistepScheme<Rational> scheme_by_name(const std::string& id) {
  if (starts_with(id, "adams-")) return adams_pair<Rational>(trailing_int(id, 6));
  if (starts_with(id, "uniform-")) return stable_preset<Rational>(trailing_int(id, 8));
  if (starts_with(id, "stable-")) return stable_preset<Rational>(trailing_int(id, 7));
  if (id == "unstable-2") return unstable_two_step<Rational>();
  if (id == "unstable-3") return unstable_three_step<Rational>();
  throw Error(ErrorCode::InvalidArgument, "unknown scheme id '" + id + "'");
}

std::vector<MultistepScheme<Rational>> scheme_catalog() {
  std::vector<MultistepScheme<Rational>> out;
  for (int k = 1; k <= 6; ++k) out.push_back(adams_pair<Rational>(k));
  for (int m = 1; m <= 4; ++m) out.push_back(stable_preset<Rational>(m));
  out.push_back(unstable_two_step<Rational>());
  out.push_back(unstable_three_step<Rational>());
  return out;
}

}  // namespace fbsde
