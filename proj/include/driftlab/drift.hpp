#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "driftlab/linalg.hpp"
#include "driftlab/process.hpp"
#include "driftlab/rng.hpp"

namespace driftlab {

/// Sample mean of V(X_{n+1}) - V(x) given X_n = x.
struct DriftEstimate {
  Vec state;
  std::int64_t time = 0;
  double mean_drift = 0.0;
  double standard_error = 0.0;
  std::int64_t samples = 0;
};

/// Plug-in estimate of E|V(X_{n+1}) - E[V(X_{n+1}) | X_n = x]|^p.
struct JumpMomentEstimate {
  Vec state;
  std::int64_t time = 0;
  double p = 0.0;
  double estimate = 0.0;
  double standard_error = 0.0;  // from 10 batches
  std::int64_t samples = 0;
};

/// Requires samples >= 100. NonFiniteStateError carries (time, sample index).
DriftEstimate estimate_drift(const ProcessModel& model, const Vec& x, std::int64_t n,
                             std::int64_t samples, RngStream& rng);

/// Centered conditional p-th moment of V(X_{n+1}). The conditional mean is
/// estimated from the same draws; the standard error comes from splitting the
/// draws into 10 batches. Requires p > 2 and samples >= 1000.
JumpMomentEstimate estimate_centered_jump_moment(const ProcessModel& model, const Vec& x,
                                                 std::int64_t n, double p,
                                                 std::int64_t samples, RngStream& rng);

/// Uncentered counterpart E|V(X_{n+1}) - V(x)|^p, same batching.
JumpMomentEstimate estimate_raw_jump_moment(const ProcessModel& model, const Vec& x,
                                            std::int64_t n, double p, std::int64_t samples,
                                            RngStream& rng);

enum class Verdict { Pass, Fail, Inconclusive };
std::string_view to_string(Verdict v);

/// Which states and times verify_assumption probes.
///
/// States are the explicit probes plus, for every j in radius_exponents and
/// every direction, the point 2^j * u with u a unit vector. In one dimension
/// the directions are +1 and -1 (and `directions` is ignored); otherwise they
/// are drawn uniformly on the sphere from `seed`.
struct StateSamplingPlan {
  std::vector<Vec> probes;
  std::vector<int> radius_exponents;
  int directions = 4;
  std::vector<std::int64_t> times{0};
  std::int64_t drift_samples = 10000;
  std::int64_t jump_samples = 10000;
  std::uint64_t seed = 0;
  unsigned workers = 0;
};

/// Default geometric plan: radii 2^j for j in [-2, 8].
StateSamplingPlan default_sampling_plan();

std::vector<Vec> plan_states(const StateSamplingPlan& plan, int dim);

struct StateDiagnostics {
  DriftEstimate drift;
  JumpMomentEstimate jump;
  bool in_region = false;
  double lyapunov = 0.0;
  /// E[V(X_{n+1}) | X_n = x] and its standard error.
  double conditional_mean = 0.0;
  double conditional_mean_se = 0.0;
};

/// Statistical check of the three drift/jump/region conditions.
///
/// (a) drift: every sampled state outside D must satisfy mean + 3 SE < 0;
///     drift_margin is min over those states of -(mean + 3 SE), the largest
///     certified A. Inconclusive when only the point estimates are negative.
/// (b) jump: jump_constant is max over all states of (Xi + 3 SE) / (1 + V^s)
///     for the declared s. jump_growth_exponent is the least-squares slope of
///     log Xi against log(1 + V) over states outside D with V >= 1 and Xi > 0 (NaN
///     when fewer than three such V levels exist). Fails for s outside
///     [0, p/2 - 1) or slope > s + 0.5; inconclusive for slope in
///     (s + 0.1, s + 0.5].
/// (c) region: V and E[V(X_{n+1}) | X_n = x] over sampled states in D.
///     region_time_growth is the slope of log(1 + max over D of the
///     conditional mean) against log(1 + n) across plan times. Fails above
///     0.5, inconclusive in (0.1, 0.5] or when no state lies in D.
struct AssumptionReport {
  std::string model_name;
  double p = 0.0;
  double s = 0.0;
  std::vector<StateDiagnostics> states;
  double drift_margin = 0.0;
  double jump_constant = 0.0;
  double jump_growth_exponent = 0.0;
  double region_sup_lyapunov = 0.0;
  double region_sup_conditional_mean = 0.0;
  double region_time_growth = 0.0;
  Verdict drift = Verdict::Inconclusive;
  Verdict jump = Verdict::Inconclusive;
  Verdict region = Verdict::Inconclusive;
};

/// Throws InsufficientCoverage if no sampled state lies outside D.
AssumptionReport verify_assumption(const ProcessModel& model, const StateSamplingPlan& plan,
                                   double p, double s);

/// key = value text summary.
void write_report(const AssumptionReport& report, std::ostream& out);
/// One row per (state, time): time, in_region, V, drift, jump, conditional
/// mean with standard errors, then the state components x0, x1, ...
void write_state_csv(const AssumptionReport& report, std::ostream& out);

/// Increment sampler for a martingale with i.i.d. mean-zero increments.
using IncrementSampler = std::function<double(RngStream&)>;

struct MartingaleScalingRow {
  std::int64_t n = 0;
  double moment = 0.0;  // empirical E|M_n|^p
  double standard_error = 0.0;
  double increment_moment_sum = 0.0;  // sum_{m<n} of empirical E|increment_m|^p
  double bound = 0.0;                 // fitted_constant * n^{p/2-1} * increment_moment_sum
};

struct MartingaleScalingTable {
  double p = 0.0;
  std::vector<MartingaleScalingRow> rows;
  /// Smallest single constant making the bound hold on the whole grid.
  double fitted_constant = 0.0;
  /// max/min of the per-n ratio moment / (n^{p/2-1} sum); near 1 when the
  /// n^{p/2} scaling is tight.
  double constant_spread = 0.0;
  /// Least-squares slope of log E|M_n|^p against log n.
  double log_log_slope = 0.0;
};

MartingaleScalingTable martingale_scaling_harness(const IncrementSampler& increment, double p,
                                                  std::vector<std::int64_t> n_grid,
                                                  std::int64_t trajectories,
                                                  std::uint64_t seed, unsigned workers = 0);

/// Exact E|M_n|^p for the symmetric +-1 walk by enumerating all 2^n paths.
/// n <= 30.
double enumerate_walk_moment(int n, double p);

/// Ordinary least-squares slope of y on x.
double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace driftlab
