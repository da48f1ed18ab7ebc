#pragma once

#include <string_view>
#include <utility>

namespace driftlab {

/// Which closed form produced an exponent value.
enum class ExponentBranch { Main, Plateau };

std::string_view to_string(ExponentBranch branch);

struct ExponentValue {
  double value;
  ExponentBranch branch;
};

/// Jump moments of order p > 2 whose state-dependent bound grows like V^s.
/// Valid for 0 <= s < p/2 - 1.
struct SigmaQuery {
  double s;
  double p;
};

/// Jump moments of order p > 2 with an L^theta bound, theta in [1, inf].
struct SigmaBarQuery {
  double theta;
  double p;
};

/// Largest moment order r (exclusive) for which sup_n E[V(X_n)^r] is finite
/// under a jump bound of growth V^s:
///
///   p(1 - s/(p-2)) - 1   main branch
///   p - 2                plateau: 2 < p < 4 and (p-2)^2/(2p) <= s < 1 - 2/p
///
/// Throws Error(OutOfDomain) when p <= 2, s < 0 or s >= p/2 - 1.
ExponentValue sigma(SigmaQuery q);

/// Same as sigma() for an L^theta-bounded jump moment:
///
///   p(1 - 1/(2 theta)) - 1   main branch (theta = inf reads 1/(2 theta) = 0)
///   p - 2                    plateau: 2 < p < 4 and p/2 < theta <= p/(p-2)
///
/// p = 4 falls on the unrestricted main branch. Throws Error(OutOfDomain)
/// when p <= 2 or theta < 1.
ExponentValue sigma_bar(SigmaBarQuery q);

/// Both exponents at the matching point theta = (p-2)/(2s); they agree.
/// Requires 0 < s < p/2 - 1.
std::pair<ExponentValue, ExponentValue> consistency_link(double s, double p);

}  // namespace driftlab
