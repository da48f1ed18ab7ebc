#include "driftlab/exponents.hpp"

#include <cmath>
#include <string>

#include "driftlab/errors.hpp"

namespace driftlab {

std::string_view to_string(ExponentBranch branch) {
  return branch == ExponentBranch::Main ? "main" : "plateau";
}

ExponentValue sigma(SigmaQuery q) {
  const double p = q.p;
  const double s = q.s;
  if (!(p > 2.0) || !std::isfinite(p)) {
    throw Error(ErrorKind::OutOfDomain, "sigma needs finite p > 2, got p=" + std::to_string(p));
  }
  if (!(s >= 0.0) || !(s < p / 2.0 - 1.0)) {
    throw Error(ErrorKind::OutOfDomain, "sigma needs 0 <= s < p/2 - 1, got s=" +
                                            std::to_string(s) + " p=" + std::to_string(p));
  }
  if (p < 4.0) {
    const double lower = (p - 2.0) * (p - 2.0) / (2.0 * p);
    const double upper = 1.0 - 2.0 / p;
    if (lower <= s && s < upper) return {p - 2.0, ExponentBranch::Plateau};
  }
  return {p * (1.0 - s / (p - 2.0)) - 1.0, ExponentBranch::Main};
}

ExponentValue sigma_bar(SigmaBarQuery q) {
  const double p = q.p;
  const double theta = q.theta;
  if (!(p > 2.0) || !std::isfinite(p)) {
    throw Error(ErrorKind::OutOfDomain,
                "sigma_bar needs finite p > 2, got p=" + std::to_string(p));
  }
  if (!(theta >= 1.0)) {
    throw Error(ErrorKind::OutOfDomain,
                "sigma_bar needs theta >= 1, got theta=" + std::to_string(theta));
  }
  if (p < 4.0 && p / 2.0 < theta && theta <= p / (p - 2.0)) {
    return {p - 2.0, ExponentBranch::Plateau};
  }
  const double inv = std::isinf(theta) ? 0.0 : 1.0 / (2.0 * theta);
  return {p * (1.0 - inv) - 1.0, ExponentBranch::Main};
}

std::pair<ExponentValue, ExponentValue> consistency_link(double s, double p) {
  if (!(s > 0.0)) {
    throw Error(ErrorKind::OutOfDomain, "consistency_link needs s > 0");
  }
  const ExponentValue a = sigma({s, p});
  const ExponentValue b = sigma_bar({(p - 2.0) / (2.0 * s), p});
  return {a, b};
}

}  // namespace driftlab
