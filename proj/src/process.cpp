#include "driftlab/process.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "driftlab/errors.hpp"
#include "driftlab/parallel.hpp"
#include "driftlab/running_stats.hpp"

namespace driftlab {

namespace {

void check_state(const Vec& x, std::int64_t time, std::int64_t trajectory) {
  if (!x.allFinite()) {
    throw NonFiniteStateError(time, trajectory,
                              "non-finite state at time " + std::to_string(time) +
                                  " in trajectory " + std::to_string(trajectory));
  }
}

double checked_lyapunov(const ProcessModel& model, const Vec& x) {
  const double v = model.lyapunov(x);
  if (!(v >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument,
                "Lyapunov function of model '" + model.name + "' returned " + std::to_string(v));
  }
  return v;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const MomentSeries& EnsembleMomentReport::at(double r) const {
  for (const auto& s : series) {
    if (s.r == r) return s;
  }
  throw Error(ErrorKind::InvalidArgument, "no moment series for r=" + format_exponent(r));
}

TrendCheck no_growth_trend(const std::vector<double>& series, double factor) {
  const auto n = static_cast<std::int64_t>(series.size());
  if (n < 20) throw Error(ErrorKind::InvalidArgument, "trend check needs at least 20 points");
  auto window_mean = [&](std::int64_t lo, std::int64_t hi) {
    long double sum = 0.0L;
    for (std::int64_t i = lo; i < hi; ++i) sum += series[static_cast<std::size_t>(i)];
    return static_cast<double>(sum / static_cast<long double>(hi - lo));
  };
  TrendCheck check;
  check.middle = window_mean(n * 45 / 100, n * 55 / 100);
  check.trailing = window_mean(n * 90 / 100, n);
  check.pass = check.trailing <= factor * check.middle;
  return check;
}

std::string format_exponent(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", r);
  return buf;
}

std::vector<Vec> simulate_path(const ProcessModel& model, const Vec& x0, std::int64_t horizon,
                               RngStream& rng) {
  std::vector<Vec> path;
  path.reserve(static_cast<std::size_t>(horizon + 1));
  path.push_back(x0);
  for (std::int64_t n = 0; n < horizon; ++n) {
    path.push_back(model.step(n, path.back(), rng));
    check_state(path.back(), n + 1, 0);
  }
  return path;
}

EnsembleMomentReport simulate_ensemble(const ProcessModel& model, const Vec& x0,
                                       const EnsembleOptions& options) {
  if (options.horizon < 1 || options.trajectories < 1) {
    throw Error(ErrorKind::InvalidArgument, "horizon and trajectories must be >= 1");
  }
  if (options.r_values.empty()) {
    throw Error(ErrorKind::InvalidArgument, "at least one moment exponent r is required");
  }
  if (x0.size() != model.dim) {
    throw Error(ErrorKind::DimensionMismatch, "initial state has dimension " +
                                                  std::to_string(x0.size()) + ", model has " +
                                                  std::to_string(model.dim));
  }
  check_state(x0, 0, 0);

  const std::int64_t horizon = options.horizon;
  const auto nr = static_cast<std::int64_t>(options.r_values.size());
  const std::int64_t slots = (horizon + 1) * nr;
  const std::int64_t chunks =
      (options.trajectories + kTrajectoriesPerChunk - 1) / kTrajectoriesPerChunk;

  std::vector<std::vector<RunningMoments>> partial(static_cast<std::size_t>(chunks));

  parallel_for(chunks, options.workers, [&](std::int64_t chunk) {
    std::vector<RunningMoments> acc(static_cast<std::size_t>(slots));
    const std::int64_t first = chunk * kTrajectoriesPerChunk;
    const std::int64_t last = std::min(options.trajectories, first + kTrajectoriesPerChunk);
    auto record = [&](std::int64_t n, const Vec& x) {
      const double v = checked_lyapunov(model, x);
      for (std::int64_t k = 0; k < nr; ++k) {
        const double r = options.r_values[static_cast<std::size_t>(k)];
        acc[static_cast<std::size_t>(n * nr + k)].add(r == 1.0 ? v : std::pow(v, r));
      }
    };
    for (std::int64_t t = first; t < last; ++t) {
      RngStream rng(options.base_seed, static_cast<std::uint64_t>(t));
      Vec x = x0;
      record(0, x);
      for (std::int64_t n = 0; n < horizon; ++n) {
        x = model.step(n, x, rng);
        check_state(x, n + 1, t);
        record(n + 1, x);
      }
    }
    partial[static_cast<std::size_t>(chunk)] = std::move(acc);
  });

  std::vector<RunningMoments> total(static_cast<std::size_t>(slots));
  for (auto& chunk : partial) {
    for (std::int64_t i = 0; i < slots; ++i) {
      total[static_cast<std::size_t>(i)].merge(chunk[static_cast<std::size_t>(i)]);
    }
    chunk.clear();
    chunk.shrink_to_fit();
  }

  EnsembleMomentReport report;
  report.horizon = horizon;
  report.trajectories = options.trajectories;
  for (std::int64_t k = 0; k < nr; ++k) {
    MomentSeries s;
    s.r = options.r_values[static_cast<std::size_t>(k)];
    s.mean.resize(static_cast<std::size_t>(horizon + 1));
    s.standard_error.resize(static_cast<std::size_t>(horizon + 1));
    for (std::int64_t n = 0; n <= horizon; ++n) {
      const auto& m = total[static_cast<std::size_t>(n * nr + k)];
      s.mean[static_cast<std::size_t>(n)] = m.mean();
      s.standard_error[static_cast<std::size_t>(n)] = m.standard_error();
    }
    s.sup_estimate = *std::max_element(s.mean.begin(), s.mean.end());
    report.series.push_back(std::move(s));
  }
  return report;
}

void write_csv(const EnsembleMomentReport& report, std::ostream& out) {
  out << "time";
  for (const auto& s : report.series) {
    const std::string r = format_exponent(s.r);
    out << ",mean_r_" << r << ",se_r_" << r;
  }
  out << '\n';
  for (std::int64_t n = 0; n <= report.horizon; ++n) {
    out << n;
    for (const auto& s : report.series) {
      out << ',' << format_number(s.mean[static_cast<std::size_t>(n)]) << ','
          << format_number(s.standard_error[static_cast<std::size_t>(n)]);
    }
    out << '\n';
  }
}

ProcessModel additive_reference(const NoiseSpec& noise) {
  validate_noise(noise);
  if (noise_dim(noise) != 1) {
    throw Error(ErrorKind::DimensionMismatch, "additive reference needs scalar noise");
  }
  const double mu = noise_mean(noise)(0);
  const double radius = 2.0 * (mu + 1.0);
  ProcessModel m;
  m.name = "additive";
  m.dim = 1;
  m.step = [noise](std::int64_t, const Vec& x, RngStream& rng) -> Vec {
    Vec next = sample_noise(noise, rng);
    next(0) += 0.5 * x(0);
    return next;
  };
  m.lyapunov = [](const Vec& x) { return std::abs(x(0)); };
  m.in_region = [radius](const Vec& x) { return std::abs(x(0)) <= radius; };
  return m;
}

ProcessModel counterexample_reference() {
  ProcessModel m;
  m.name = "counterexample";
  m.dim = 1;
  m.step = [](std::int64_t n, const Vec& x, RngStream&) -> Vec {
    Vec next(1);
    next(0) = x(0) > 1.0 ? x(0) - 1.0 : static_cast<double>(n + 1);
    return next;
  };
  m.lyapunov = [](const Vec& x) { return x(0); };
  m.in_region = [](const Vec& x) { return x(0) == 1.0; };
  return m;
}

ProcessModel scaling_reference(double factor) {
  ProcessModel m;
  m.name = "scaling";
  m.dim = 1;
  m.step = [factor](std::int64_t, const Vec& x, RngStream&) -> Vec { return factor * x; };
  m.lyapunov = [](const Vec& x) { return std::abs(x(0)); };
  m.in_region = [](const Vec& x) { return std::abs(x(0)) <= 1.0; };
  return m;
}

}  // namespace driftlab
