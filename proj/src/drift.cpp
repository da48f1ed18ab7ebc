#include "driftlab/drift.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>

#include "driftlab/errors.hpp"
#include "driftlab/parallel.hpp"
#include "driftlab/running_stats.hpp"

namespace driftlab {

namespace {

constexpr int kJumpBatches = 10;
constexpr double kMargin = 3.0;

std::vector<double> draw_lyapunov(const ProcessModel& model, const Vec& x, std::int64_t n,
                                  std::int64_t samples, RngStream& rng) {
  std::vector<double> out(static_cast<std::size_t>(samples));
  for (std::int64_t i = 0; i < samples; ++i) {
    const Vec next = model.step(n, x, rng);
    if (!next.allFinite()) {
      throw NonFiniteStateError(n + 1, i,
                                "non-finite draw at time " + std::to_string(n + 1) +
                                    ", sample " + std::to_string(i));
    }
    out[static_cast<std::size_t>(i)] = model.lyapunov(next);
  }
  return out;
}

// Mean of |v_i - center|^p overall and its batch standard error.
std::pair<double, double> batched_abs_moment(const std::vector<double>& v, double center,
                                             double p) {
  const auto total = static_cast<std::int64_t>(v.size());
  RunningMoments overall;
  RunningMoments batches;
  for (int b = 0; b < kJumpBatches; ++b) {
    const std::int64_t lo = total * b / kJumpBatches;
    const std::int64_t hi = total * (b + 1) / kJumpBatches;
    RunningMoments batch;
    for (std::int64_t i = lo; i < hi; ++i) {
      const double d = std::pow(std::abs(v[static_cast<std::size_t>(i)] - center), p);
      batch.add(d);
      overall.add(d);
    }
    batches.add(batch.mean());
  }
  return {overall.mean(), batches.standard_error()};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

DriftEstimate estimate_drift(const ProcessModel& model, const Vec& x, std::int64_t n,
                             std::int64_t samples, RngStream& rng) {
  if (samples < 100) throw Error(ErrorKind::InvalidArgument, "estimate_drift needs >= 100 samples");
  const double v0 = model.lyapunov(x);
  RunningMoments acc;
  for (double v : draw_lyapunov(model, x, n, samples, rng)) acc.add(v - v0);
  return DriftEstimate{x, n, acc.mean(), acc.standard_error(), samples};
}

JumpMomentEstimate estimate_centered_jump_moment(const ProcessModel& model, const Vec& x,
                                                 std::int64_t n, double p,
                                                 std::int64_t samples, RngStream& rng) {
  if (!(p > 2.0)) throw Error(ErrorKind::InvalidArgument, "jump moment order must exceed 2");
  if (samples < 1000) {
    throw Error(ErrorKind::InvalidArgument, "centered jump moment needs >= 1000 samples");
  }
  const std::vector<double> v = draw_lyapunov(model, x, n, samples, rng);
  RunningMoments mean;
  for (double d : v) mean.add(d);
  const auto [est, se] = batched_abs_moment(v, mean.mean(), p);
  return JumpMomentEstimate{x, n, p, est, se, samples};
}

JumpMomentEstimate estimate_raw_jump_moment(const ProcessModel& model, const Vec& x,
                                            std::int64_t n, double p, std::int64_t samples,
                                            RngStream& rng) {
  if (!(p > 0.0)) throw Error(ErrorKind::InvalidArgument, "jump moment order must be positive");
  if (samples < 1000) throw Error(ErrorKind::InvalidArgument, "raw jump moment needs >= 1000 samples");
  const std::vector<double> v = draw_lyapunov(model, x, n, samples, rng);
  const auto [est, se] = batched_abs_moment(v, model.lyapunov(x), p);
  return JumpMomentEstimate{x, n, p, est, se, samples};
}

StateSamplingPlan default_sampling_plan() {
  StateSamplingPlan plan;
  for (int j = -2; j <= 8; ++j) plan.radius_exponents.push_back(j);
  return plan;
}

std::vector<Vec> plan_states(const StateSamplingPlan& plan, int dim) {
  std::vector<Vec> states;
  for (const Vec& probe : plan.probes) {
    if (probe.size() != dim) {
      throw Error(ErrorKind::DimensionMismatch, "probe state dimension differs from model");
    }
    states.push_back(probe);
  }
  std::vector<Vec> directions;
  if (dim == 1) {
    directions = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
  } else {
    RngStream rng(plan.seed, 0xd1ec7105ULL);
    for (int i = 0; i < plan.directions; ++i) {
      Vec u(dim);
      do {
        for (int k = 0; k < dim; ++k) u(k) = rng.gaussian();
      } while (u.norm() == 0.0);
      directions.push_back(u / u.norm());
    }
  }
  for (int j : plan.radius_exponents) {
    for (const Vec& u : directions) states.push_back(std::ldexp(1.0, j) * u);
  }
  return states;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2 || x.size() != y.size()) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

AssumptionReport verify_assumption(const ProcessModel& model, const StateSamplingPlan& plan,
                                   double p, double s) {
  if (!(p > 2.0)) throw Error(ErrorKind::InvalidArgument, "p must exceed 2");
  if (plan.times.empty()) throw Error(ErrorKind::InvalidArgument, "sampling plan has no times");
  const std::vector<Vec> states = plan_states(plan, model.dim);
  if (std::none_of(states.begin(), states.end(),
                   [&](const Vec& x) { return !model.in_region(x); })) {
    throw Error(ErrorKind::InsufficientCoverage, "sampling plan has no state outside D");
  }

  const auto nt = static_cast<std::int64_t>(plan.times.size());
  const auto total = static_cast<std::int64_t>(states.size()) * nt;
  AssumptionReport report;
  report.model_name = model.name;
  report.p = p;
  report.s = s;
  report.states.resize(static_cast<std::size_t>(total));

  parallel_for(total, plan.workers, [&](std::int64_t idx) {
    const Vec& x = states[static_cast<std::size_t>(idx / nt)];
    const std::int64_t n = plan.times[static_cast<std::size_t>(idx % nt)];
    RngStream rng(plan.seed, static_cast<std::uint64_t>(idx));
    StateDiagnostics d;
    d.in_region = model.in_region(x);
    d.lyapunov = model.lyapunov(x);
    d.drift = estimate_drift(model, x, n, plan.drift_samples, rng);
    d.jump = estimate_centered_jump_moment(model, x, n, p, plan.jump_samples, rng);
    d.conditional_mean = d.lyapunov + d.drift.mean_drift;
    d.conditional_mean_se = d.drift.standard_error;
    report.states[static_cast<std::size_t>(idx)] = std::move(d);
  });

  // (a) drift outside D
  double margin = std::numeric_limits<double>::infinity();
  bool point_ok = true;
  for (const auto& d : report.states) {
    if (d.in_region) continue;
    margin = std::min(margin, -(d.drift.mean_drift + kMargin * d.drift.standard_error));
    if (!(d.drift.mean_drift < 0.0)) point_ok = false;
  }
  report.drift_margin = margin;
  report.drift = margin > 0.0 ? Verdict::Pass : (point_ok ? Verdict::Inconclusive : Verdict::Fail);

  // (b) jump moment growth against the declared s
  double constant = 0.0;
  std::vector<double> lx, ly;
  std::set<double> levels;
  for (const auto& d : report.states) {
    constant = std::max(constant, (d.jump.estimate + kMargin * d.jump.standard_error) /
                                      (1.0 + std::pow(d.lyapunov, s)));
    // The growth rate is a large-V property; near the origin V = |x| folds the law.
    if (!d.in_region && d.lyapunov >= 1.0 && d.jump.estimate > 0.0) {
      lx.push_back(std::log1p(d.lyapunov));
      ly.push_back(std::log(d.jump.estimate));
      levels.insert(d.lyapunov);
    }
  }
  report.jump_constant = constant;
  report.jump_growth_exponent =
      levels.size() >= 3 ? least_squares_slope(lx, ly) : std::numeric_limits<double>::quiet_NaN();
  if (!(s >= 0.0 && s < p / 2.0 - 1.0)) {
    report.jump = Verdict::Fail;
  } else if (std::isnan(report.jump_growth_exponent) || report.jump_growth_exponent <= s + 0.1) {
    report.jump = Verdict::Pass;
  } else if (report.jump_growth_exponent <= s + 0.5) {
    report.jump = Verdict::Inconclusive;
  } else {
    report.jump = Verdict::Fail;
  }

  // (c) bounds on D
  std::vector<double> per_time(static_cast<std::size_t>(nt), -std::numeric_limits<double>::infinity());
  bool any_region = false;
  for (std::int64_t idx = 0; idx < total; ++idx) {
    const auto& d = report.states[static_cast<std::size_t>(idx)];
    if (!d.in_region) continue;
    any_region = true;
    report.region_sup_lyapunov = std::max(report.region_sup_lyapunov, d.lyapunov);
    const double upper = d.conditional_mean + kMargin * d.conditional_mean_se;
    report.region_sup_conditional_mean = std::max(report.region_sup_conditional_mean, upper);
    auto& slot = per_time[static_cast<std::size_t>(idx % nt)];
    slot = std::max(slot, d.conditional_mean);
  }
  if (!any_region) {
    report.region = Verdict::Inconclusive;
    report.region_time_growth = std::numeric_limits<double>::quiet_NaN();
  } else {
    std::vector<double> tx, ty;
    for (std::int64_t j = 0; j < nt; ++j) {
      tx.push_back(std::log1p(static_cast<double>(plan.times[static_cast<std::size_t>(j)])));
      ty.push_back(std::log1p(std::max(0.0, per_time[static_cast<std::size_t>(j)])));
    }
    const std::set<double> distinct(tx.begin(), tx.end());
    report.region_time_growth = distinct.size() >= 2 ? least_squares_slope(tx, ty) : 0.0;
    const bool finite = std::isfinite(report.region_sup_lyapunov) &&
                        std::isfinite(report.region_sup_conditional_mean);
    if (!finite || report.region_time_growth > 0.5) {
      report.region = Verdict::Fail;
    } else if (report.region_time_growth > 0.1) {
      report.region = Verdict::Inconclusive;
    } else {
      report.region = Verdict::Pass;
    }
  }
  return report;
}

void write_report(const AssumptionReport& report, std::ostream& out) {
  out << "model = " << report.model_name << '\n'
      << "p = " << fmt(report.p) << '\n'
      << "s = " << fmt(report.s) << '\n'
      << "sampled_points = " << report.states.size() << '\n'
      << "drift_margin_A = " << fmt(report.drift_margin) << '\n'
      << "jump_constant_C_phi = " << fmt(report.jump_constant) << '\n'
      << "jump_growth_exponent = " << fmt(report.jump_growth_exponent) << '\n'
      << "region_sup_V = " << fmt(report.region_sup_lyapunov) << '\n'
      << "region_sup_conditional_mean = " << fmt(report.region_sup_conditional_mean) << '\n'
      << "region_time_growth = " << fmt(report.region_time_growth) << '\n'
      << "verdict_drift = " << to_string(report.drift) << '\n'
      << "verdict_jump = " << to_string(report.jump) << '\n'
      << "verdict_region = " << to_string(report.region) << '\n';
}

void write_state_csv(const AssumptionReport& report, std::ostream& out) {
  const Eigen::Index dim = report.states.empty() ? 0 : report.states.front().drift.state.size();
  out << "time,in_region,V,drift_mean,drift_se,jump_moment,jump_se,cond_mean,cond_mean_se";
  for (Eigen::Index k = 0; k < dim; ++k) out << ",x" << k;
  out << '\n';
  for (const auto& d : report.states) {
    out << d.drift.time << ',' << (d.in_region ? 1 : 0) << ',' << fmt(d.lyapunov) << ','
        << fmt(d.drift.mean_drift) << ',' << fmt(d.drift.standard_error) << ','
        << fmt(d.jump.estimate) << ',' << fmt(d.jump.standard_error) << ','
        << fmt(d.conditional_mean) << ',' << fmt(d.conditional_mean_se);
    for (Eigen::Index k = 0; k < dim; ++k) out << ',' << fmt(d.drift.state(k));
    out << '\n';
  }
}

MartingaleScalingTable martingale_scaling_harness(const IncrementSampler& increment, double p,
                                                  std::vector<std::int64_t> n_grid,
                                                  std::int64_t trajectories,
                                                  std::uint64_t seed, unsigned workers) {
  if (!(p > 2.0)) throw Error(ErrorKind::InvalidArgument, "p must exceed 2");
  if (trajectories < 2) throw Error(ErrorKind::InvalidArgument, "need >= 2 trajectories");
  std::sort(n_grid.begin(), n_grid.end());
  n_grid.erase(std::unique(n_grid.begin(), n_grid.end()), n_grid.end());
  if (n_grid.empty() || n_grid.front() < 1) {
    throw Error(ErrorKind::InvalidArgument, "n grid must be nonempty with n >= 1");
  }
  const std::int64_t horizon = n_grid.back();
  const auto ng = n_grid.size();
  constexpr std::int64_t kChunk = 1024;
  const std::int64_t chunks = (trajectories + kChunk - 1) / kChunk;

  struct Partial {
    std::vector<RunningMoments> moment;     // per grid point
    std::vector<RunningMoments> increment;  // per step m
  };
  std::vector<Partial> partial(static_cast<std::size_t>(chunks));

  parallel_for(chunks, workers, [&](std::int64_t chunk) {
    Partial acc{std::vector<RunningMoments>(ng),
                std::vector<RunningMoments>(static_cast<std::size_t>(horizon))};
    const std::int64_t first = chunk * kChunk;
    const std::int64_t last = std::min(trajectories, first + kChunk);
    for (std::int64_t t = first; t < last; ++t) {
      RngStream rng(seed, static_cast<std::uint64_t>(t));
      double m = 0.0;
      std::size_t g = 0;
      for (std::int64_t step = 1; step <= horizon; ++step) {
        const double inc = increment(rng);
        acc.increment[static_cast<std::size_t>(step - 1)].add(std::pow(std::abs(inc), p));
        m += inc;
        if (step == n_grid[g]) {
          acc.moment[g].add(std::pow(std::abs(m), p));
          ++g;
        }
      }
    }
    partial[static_cast<std::size_t>(chunk)] = std::move(acc);
  });

  std::vector<RunningMoments> moment(ng);
  std::vector<RunningMoments> inc(static_cast<std::size_t>(horizon));
  for (const auto& part : partial) {
    for (std::size_t g = 0; g < ng; ++g) moment[g].merge(part.moment[g]);
    for (std::size_t k = 0; k < inc.size(); ++k) inc[k].merge(part.increment[k]);
  }

  MartingaleScalingTable table;
  table.p = p;
  double running = 0.0;
  std::int64_t summed = 0;
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  std::vector<double> lx, ly;
  for (std::size_t g = 0; g < ng; ++g) {
    while (summed < n_grid[g]) running += inc[static_cast<std::size_t>(summed++)].mean();
    MartingaleScalingRow row;
    row.n = n_grid[g];
    row.moment = moment[g].mean();
    row.standard_error = moment[g].standard_error();
    row.increment_moment_sum = running;
    const double scale = std::pow(static_cast<double>(row.n), p / 2.0 - 1.0) * running;
    const double ratio = scale > 0.0 ? row.moment / scale : 0.0;
    min_ratio = std::min(min_ratio, ratio);
    max_ratio = std::max(max_ratio, ratio);
    table.rows.push_back(row);
    if (row.moment > 0.0) {
      lx.push_back(std::log(static_cast<double>(row.n)));
      ly.push_back(std::log(row.moment));
    }
  }
  table.fitted_constant = max_ratio;
  table.constant_spread = min_ratio > 0.0 ? max_ratio / min_ratio : std::numeric_limits<double>::infinity();
  for (auto& row : table.rows) {
    row.bound = max_ratio * std::pow(static_cast<double>(row.n), p / 2.0 - 1.0) *
                row.increment_moment_sum;
  }
  table.log_log_slope = least_squares_slope(lx, ly);
  return table;
}

double enumerate_walk_moment(int n, double p) {
  if (n < 0 || n > 30) throw Error(ErrorKind::InvalidArgument, "enumeration supports 0 <= n <= 30");
  const std::uint64_t paths = 1ULL << n;
  long double sum = 0.0L;
  for (std::uint64_t mask = 0; mask < paths; ++mask) {
    const int ups = std::popcount(mask);
    const int m = 2 * ups - n;
    sum += std::pow(static_cast<long double>(std::abs(m)), static_cast<long double>(p));
  }
  return static_cast<double>(sum / static_cast<long double>(paths));
}

}  // namespace driftlab
