#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "driftlab/linalg.hpp"
#include "driftlab/rng.hpp"

namespace driftlab {

/// A discrete-time, possibly time-inhomogeneous stochastic process together
/// with the target function V and the exceptional region D.
///
/// `step(n, x, rng)` draws X_{n+1} given X_n = x. It must be a fresh-draw
/// sampler: the only randomness comes from `rng`, so repeated calls at the
/// same (n, x) produce independent draws from the conditional law. All three
/// callables are invoked concurrently from worker threads and must not
/// mutate shared state.
struct ProcessModel {
  std::string name;
  int dim = 1;
  std::function<Vec(std::int64_t n, const Vec& x, RngStream& rng)> step;
  std::function<double(const Vec& x)> lyapunov;
  std::function<bool(const Vec& x)> in_region;
};

/// Per-time empirical E[V(X_n)^r] for one exponent r.
struct MomentSeries {
  double r = 1.0;
  std::vector<double> mean;            // index n = 0..horizon
  std::vector<double> standard_error;  // same length
  double sup_estimate = 0.0;           // max of mean
};

struct EnsembleMomentReport {
  std::int64_t horizon = 0;
  std::int64_t trajectories = 0;
  std::vector<MomentSeries> series;  // one per requested r, in request order

  /// Series for exponent r; throws InvalidArgument if r was not requested.
  const MomentSeries& at(double r) const;
};

struct EnsembleOptions {
  std::int64_t horizon = 1;
  std::int64_t trajectories = 1;
  std::uint64_t base_seed = 0;
  std::vector<double> r_values{1.0};
  unsigned workers = 0;  // 0: all cores
};

/// Trajectories handled by one accumulation chunk. Chunks are merged in index
/// order, so results do not depend on the worker count.
inline constexpr std::int64_t kTrajectoriesPerChunk = 32;

/// Monte Carlo estimate of E[V(X_n)^r], n = 0..horizon, from x0.
///
/// Trajectory t draws from RngStream(base_seed, t). Only running moments are
/// kept. Throws NonFiniteStateError (time, trajectory) if a state leaves the
/// reals and InvalidArgument on bad options or a negative V.
EnsembleMomentReport simulate_ensemble(const ProcessModel& model, const Vec& x0,
                                       const EnsembleOptions& options);

/// One stored path X_0..X_horizon drawn with `rng`.
std::vector<Vec> simulate_path(const ProcessModel& model, const Vec& x0, std::int64_t horizon,
                               RngStream& rng);

/// CSV with columns time, mean_r_<r>, se_r_<r> for each r.
void write_csv(const EnsembleMomentReport& report, std::ostream& out);

/// Compares the mean of the last tenth of a series (time index >= 0.9 N)
/// with the mean of its middle tenth ([0.45 N, 0.55 N)). The series shows no
/// growth trend when trailing <= factor * middle.
struct TrendCheck {
  double middle = 0.0;
  double trailing = 0.0;
  bool pass = false;
};
TrendCheck no_growth_trend(const std::vector<double>& series, double factor = 2.0);

/// Formats r the way CSV column names do ("1", "0.5", "2").
std::string format_exponent(double r);

/// X_{n+1} = X_n / 2 + xi_{n+1} on the real line with V(x) = |x| and
/// D = {|x| <= 2(mu + 1)}, mu the noise mean. Started from x >= 0 with
/// nonnegative noise, E[X_n] tends to 2 mu.
ProcessModel additive_reference(const NoiseSpec& noise);

/// Deterministic orbit on the positive integers: x - 1 while x > 1, and
/// n + 1 from x = 1 at time n. V(x) = x and D = {1}.
ProcessModel counterexample_reference();

/// X_{n+1} = factor * X_n, V(x) = |x|, D = {|x| <= 1}. Deterministic.
ProcessModel scaling_reference(double factor);

}  // namespace driftlab
