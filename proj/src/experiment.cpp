#include "driftlab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "driftlab/control.hpp"
#include "driftlab/drift.hpp"
#include "driftlab/ergodicity.hpp"
#include "driftlab/errors.hpp"
#include "driftlab/exponents.hpp"
#include "driftlab/process.hpp"
#include "driftlab/switching.hpp"

#ifndef DRIFTLAB_VERSION
#define DRIFTLAB_VERSION "0.0.0"
#endif

namespace driftlab {

using json = nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Field access with path-qualified errors.

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::ConfigInvalid, (path.empty() ? "<root>" : path) + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

void require_object(const json& obj, const std::string& path) {
  if (!obj.is_object()) invalid(path, "must be an object");
}

const json& require(const json& obj, const std::string& path, const std::string& key) {
  require_object(obj, path);
  if (!obj.contains(key)) invalid(join(path, key), "missing required field");
  return obj.at(key);
}

const json* optional_field(const json& obj, const std::string& path, const std::string& key) {
  require_object(obj, path);
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double as_number(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
  }
  invalid(path, "must be a number");
}

double number(const json& obj, const std::string& path, const std::string& key) {
  return as_number(require(obj, path, key), join(path, key));
}

double number_or(const json& obj, const std::string& path, const std::string& key,
                 double fallback) {
  const json* v = optional_field(obj, path, key);
  return v ? as_number(*v, join(path, key)) : fallback;
}

std::int64_t as_integer(const json& v, const std::string& path, std::int64_t min) {
  if (!v.is_number_integer()) invalid(path, "must be an integer");
  const auto i = v.get<std::int64_t>();
  if (i < min) invalid(path, "must be >= " + std::to_string(min));
  return i;
}

std::int64_t integer(const json& obj, const std::string& path, const std::string& key,
                     std::int64_t min) {
  return as_integer(require(obj, path, key), join(path, key), min);
}

std::int64_t integer_or(const json& obj, const std::string& path, const std::string& key,
                        std::int64_t fallback, std::int64_t min) {
  const json* v = optional_field(obj, path, key);
  return v ? as_integer(*v, join(path, key), min) : fallback;
}

std::string string_field(const json& obj, const std::string& path, const std::string& key) {
  const json& v = require(obj, path, key);
  if (!v.is_string()) invalid(join(path, key), "must be a string");
  return v.get<std::string>();
}

std::vector<double> number_list(const json& v, const std::string& path) {
  if (!v.is_array()) invalid(path, "must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], index_path(path, i)));
  return out;
}

std::vector<double> number_list_or(const json& obj, const std::string& path,
                                   const std::string& key, std::vector<double> fallback) {
  const json* v = optional_field(obj, path, key);
  return v ? number_list(*v, join(path, key)) : fallback;
}

std::vector<std::int64_t> integer_list(const json& v, const std::string& path,
                                       std::int64_t min) {
  if (!v.is_array()) invalid(path, "must be an array of integers");
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_integer(v[i], index_path(path, i), min));
  }
  return out;
}

std::vector<std::int64_t> integer_list_or(const json& obj, const std::string& path,
                                          const std::string& key,
                                          std::vector<std::int64_t> fallback, std::int64_t min) {
  const json* v = optional_field(obj, path, key);
  return v ? integer_list(*v, join(path, key), min) : fallback;
}

Vec vector_of(const json& v, const std::string& path) {
  const auto values = number_list(v, path);
  if (values.empty()) invalid(path, "must not be empty");
  return Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Mat matrix_of(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) invalid(path, "must be a nonempty array of rows");
  const auto rows = v.size();
  std::size_t cols = 0;
  Mat m;
  for (std::size_t i = 0; i < rows; ++i) {
    const auto row = number_list(v[i], index_path(path, i));
    if (i == 0) {
      cols = row.size();
      if (cols == 0) invalid(index_path(path, i), "must not be empty");
      m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (row.size() != cols) {
      invalid(index_path(path, i), "row length differs from the first row");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
  }
  return m;
}

void require_positive(double v, const std::string& path) {
  if (!(v > 0.0) || !std::isfinite(v)) invalid(path, "must be a positive finite number");
}

// Module validation errors raised while building a plan become ConfigInvalid
// at the given path.
template <typename F>
auto checked(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigInvalid) throw;
    invalid(path, e.what());
  }
}

// ---------------------------------------------------------------------------
// Formatting.

std::string full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string brief(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared parsers.

Vec sized(const json& obj, const std::string& path, const std::string& key, int dim,
          std::optional<double> fallback) {
  const json* v = optional_field(obj, path, key);
  if (!v) {
    if (!fallback) invalid(join(path, key), "missing required field");
    return Vec::Constant(dim, *fallback);
  }
  if (v->is_array()) {
    Vec out = vector_of(*v, join(path, key));
    if (out.size() != dim) {
      invalid(join(path, key), "expected " + std::to_string(dim) + " entries");
    }
    return out;
  }
  return Vec::Constant(dim, as_number(*v, join(path, key)));
}

int inferred_dim(const json& obj, const std::string& path,
                 std::initializer_list<const char*> keys) {
  if (const json* d = optional_field(obj, path, "dim")) {
    return static_cast<int>(as_integer(*d, join(path, "dim"), 1));
  }
  for (const char* key : keys) {
    const json* v = optional_field(obj, path, key);
    if (v && v->is_array()) return static_cast<int>(v->size());
  }
  return 1;
}

NoiseSpec parse_noise(const json& obj, const std::string& path) {
  const std::string family = string_field(obj, path, "family");
  NoiseSpec noise;
  if (family == "gaussian") {
    const int dim = inferred_dim(obj, path, {"mean", "variance"});
    noise = GaussianNoise{sized(obj, path, "mean", dim, 0.0),
                          sized(obj, path, "variance", dim, std::nullopt)};
  } else if (family == "uniform-box") {
    const int dim = inferred_dim(obj, path, {"lo", "hi"});
    noise = UniformBoxNoise{sized(obj, path, "lo", dim, std::nullopt),
                            sized(obj, path, "hi", dim, std::nullopt)};
  } else if (family == "shifted-exponential") {
    const int dim = inferred_dim(obj, path, {"shift", "mean_excess"});
    const Vec excess = sized(obj, path, "mean_excess", dim, std::nullopt);
    if (!(excess.array() > 0.0).all()) invalid(join(path, "mean_excess"), "must be positive");
    noise = ShiftedExponentialNoise{sized(obj, path, "shift", dim, 0.0),
                                    excess.cwiseInverse()};
  } else {
    invalid(join(path, "family"),
            "unknown noise family '" + family +
                "' (expected gaussian, uniform-box or shifted-exponential)");
  }
  checked(path, [&] {
    validate_noise(noise);
    return 0;
  });
  return noise;
}

ProcessModel parse_model(const json& obj, const std::string& path) {
  const std::string type = string_field(obj, path, "type");
  if (type == "additive") {
    const NoiseSpec noise = parse_noise(require(obj, path, "noise"), join(path, "noise"));
    if (noise_dim(noise) != 1) invalid(join(path, "noise"), "additive model is scalar");
    return additive_reference(noise);
  }
  if (type == "counterexample") return counterexample_reference();
  if (type == "scaling") {
    const double factor = number(obj, path, "factor");
    if (!std::isfinite(factor)) invalid(join(path, "factor"), "must be finite");
    return scaling_reference(factor);
  }
  invalid(join(path, "type"),
          "unknown model '" + type + "' (expected additive, counterexample or scaling)");
}

Vec parse_state(const json& obj, const std::string& path, const std::string& key, int dim) {
  Vec x = vector_of(require(obj, path, key), join(path, key));
  if (x.size() != dim) {
    invalid(join(path, key), "expected " + std::to_string(dim) + " entries");
  }
  return x;
}

const json& section_or_empty(const json& obj, const std::string& path, const std::string& key) {
  static const json empty = json::object();
  const json* v = optional_field(obj, path, key);
  if (!v) return empty;
  require_object(*v, join(path, key));
  return *v;
}

Verdict parse_verdict(const json& v, const std::string& path) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "pass") return Verdict::Pass;
    if (s == "fail") return Verdict::Fail;
    if (s == "inconclusive") return Verdict::Inconclusive;
  }
  invalid(path, "must be one of pass, fail, inconclusive");
}

// ---------------------------------------------------------------------------
// Execution context.

class Context {
 public:
  Context(std::filesystem::path dir, unsigned workers, RunManifest& manifest)
      : dir_(std::move(dir)), workers_(workers), manifest_(manifest) {}

  unsigned workers() const { return workers_; }

  /// Opens an output file and records it in the manifest.
  std::ofstream open(const std::string& name) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + (dir_ / name).string());
    manifest_.outputs.push_back(name);
    return out;
  }

  void criterion(std::string name, bool pass, std::string detail) {
    manifest_.criteria.push_back({std::move(name), pass, std::move(detail)});
  }

 private:
  std::filesystem::path dir_;
  unsigned workers_;
  RunManifest& manifest_;
};

using Plan = std::function<void(Context&)>;

struct TrendSpec {
  double r = 2.0;
  double factor = 2.0;
};

std::optional<TrendSpec> parse_trend(const json& checks, const std::string& path) {
  const json* v = optional_field(checks, path, "no_growth");
  if (!v) return std::nullopt;
  const std::string p = join(path, "no_growth");
  TrendSpec t;
  t.r = number_or(*v, p, "r", 2.0);
  t.factor = number_or(*v, p, "factor", 2.0);
  require_positive(t.r, join(p, "r"));
  require_positive(t.factor, join(p, "factor"));
  return t;
}

void ensure_r(std::vector<double>& r_values, double r) {
  if (std::find(r_values.begin(), r_values.end(), r) == r_values.end()) r_values.push_back(r);
}

void report_trend(Context& ctx, const std::string& name, const EnsembleMomentReport& report,
                  const TrendSpec& spec) {
  const TrendCheck t = no_growth_trend(report.at(spec.r).mean, spec.factor);
  ctx.criterion(name, t.pass,
                "trailing-decile mean " + brief(t.trailing) + " vs " + brief(spec.factor) +
                    " x middle-decile mean " + brief(t.middle));
}

std::vector<double> parse_r_values(const json& obj, const std::string& path,
                                   std::vector<double> fallback) {
  auto r = number_list_or(obj, path, "r", std::move(fallback));
  if (r.empty()) invalid(join(path, "r"), "must not be empty");
  for (std::size_t i = 0; i < r.size(); ++i) require_positive(r[i], index_path(join(path, "r"), i));
  return r;
}

// ---------------------------------------------------------------------------
// ensemble

Plan plan_ensemble(const ExperimentConfig& cfg) {
  const json& doc = cfg.body;
  ProcessModel model = parse_model(require(doc, "", "model"), "model");
  const Vec x0 = parse_state(doc, "", "x0", model.dim);
  EnsembleOptions opt;
  opt.horizon = integer(doc, "", "horizon", 1);
  opt.trajectories = integer(doc, "", "trajectories", 1);
  opt.base_seed = cfg.seed;
  opt.r_values = parse_r_values(doc, "", {1.0});

  const json& checks = section_or_empty(doc, "", "checks");
  struct TerminalMean {
    double r, target, se_multiple;
  };
  std::optional<TerminalMean> terminal;
  if (const json* t = optional_field(checks, "checks", "terminal_mean")) {
    const std::string p = "checks.terminal_mean";
    terminal = TerminalMean{number_or(*t, p, "r", 1.0), number(*t, p, "target"),
                            number_or(*t, p, "se_multiple", 3.0)};
    require_positive(terminal->r, join(p, "r"));
    require_positive(terminal->se_multiple, join(p, "se_multiple"));
    ensure_r(opt.r_values, terminal->r);
  }
  const auto trend = parse_trend(checks, "checks");
  if (trend) ensure_r(opt.r_values, trend->r);

  return [=](Context& ctx) {
    EnsembleOptions o = opt;
    o.workers = ctx.workers();
    const EnsembleMomentReport report = simulate_ensemble(model, x0, o);
    {
      auto out = ctx.open("moments.csv");
      write_csv(report, out);
    }
    if (terminal) {
      const MomentSeries& s = report.at(terminal->r);
      const double mean = s.mean.back();
      const double se = s.standard_error.back();
      const double gap = std::abs(mean - terminal->target);
      ctx.criterion("terminal_mean", gap <= terminal->se_multiple * se,
                    "E V^" + format_exponent(terminal->r) + " at n=" +
                        std::to_string(report.horizon) + " is " + brief(mean) + " (se " +
                        brief(se) + "), target " + brief(terminal->target));
    }
    if (trend) report_trend(ctx, "no_growth", report, *trend);
  };
}

// ---------------------------------------------------------------------------
// verify-assumption

Plan plan_verify(const ExperimentConfig& cfg) {
  const json& doc = cfg.body;
  ProcessModel model = parse_model(require(doc, "", "model"), "model");
  const double p = number(doc, "", "p");
  const double s = number_or(doc, "", "s", 0.0);
  if (!(p > 2.0)) invalid("p", "must exceed 2");
  if (!(s >= 0.0)) invalid("s", "must be >= 0");

  StateSamplingPlan plan = default_sampling_plan();
  plan.seed = cfg.seed;
  const json& ps = section_or_empty(doc, "", "plan");
  if (const json* probes = optional_field(ps, "plan", "probes")) {
    if (!probes->is_array()) invalid("plan.probes", "must be an array of states");
    for (std::size_t i = 0; i < probes->size(); ++i) {
      Vec x = vector_of((*probes)[i], index_path("plan.probes", i));
      if (x.size() != model.dim) invalid(index_path("plan.probes", i), "wrong dimension");
      plan.probes.push_back(std::move(x));
    }
  }
  if (const json* re = optional_field(ps, "plan", "radius_exponents")) {
    plan.radius_exponents.clear();
    for (auto j : integer_list(*re, "plan.radius_exponents", -1000)) {
      plan.radius_exponents.push_back(static_cast<int>(j));
    }
  }
  plan.directions = static_cast<int>(integer_or(ps, "plan", "directions", plan.directions, 1));
  plan.times = integer_list_or(ps, "plan", "times", plan.times, 0);
  if (plan.times.empty()) invalid("plan.times", "must not be empty");
  plan.drift_samples = integer_or(ps, "plan", "drift_samples", plan.drift_samples, 100);
  plan.jump_samples = integer_or(ps, "plan", "jump_samples", plan.jump_samples, 1000);
  if (plan.probes.empty() && plan.radius_exponents.empty()) {
    invalid("plan", "needs probes or radius_exponents");
  }

  const json& checks = section_or_empty(doc, "", "checks");
  std::vector<std::pair<std::string, Verdict>> expected;
  if (const json* e = optional_field(checks, "checks", "expect")) {
    require_object(*e, "checks.expect");
    for (const char* key : {"drift", "jump", "region"}) {
      if (const json* v = optional_field(*e, "checks.expect", key)) {
        expected.emplace_back(key, parse_verdict(*v, join("checks.expect", key)));
      }
    }
  }
  struct RunningMax {
    Vec x0;
    std::int64_t horizon;
    double threshold;
  };
  std::optional<RunningMax> running;
  if (const json* r = optional_field(checks, "checks", "running_max")) {
    const std::string rp = "checks.running_max";
    running = RunningMax{parse_state(*r, rp, "x0", model.dim), integer(*r, rp, "horizon", 1),
                         number(*r, rp, "threshold")};
  }

  return [=](Context& ctx) {
    StateSamplingPlan pl = plan;
    pl.workers = ctx.workers();
    const AssumptionReport report = verify_assumption(model, pl, p, s);
    {
      auto out = ctx.open("report.txt");
      write_report(report, out);
    }
    {
      auto out = ctx.open("states.csv");
      write_state_csv(report, out);
    }
    for (const auto& [key, want] : expected) {
      const Verdict got = key == "drift" ? report.drift
                          : key == "jump" ? report.jump
                                          : report.region;
      ctx.criterion("verdict_" + key, got == want,
                    "got " + std::string(to_string(got)) + ", expected " +
                        std::string(to_string(want)));
    }
    if (running) {
      RngStream rng(cfg.seed, 0x70617468ULL);
      const auto path = simulate_path(model, running->x0, running->horizon, rng);
      double vmax = 0.0;
      std::int64_t first_cross = -1;
      auto out = ctx.open("path.csv");
      out << "time,V";
      for (int k = 0; k < model.dim; ++k) out << ",x" << k;
      out << '\n';
      for (std::size_t n = 0; n < path.size(); ++n) {
        const double v = model.lyapunov(path[n]);
        vmax = std::max(vmax, v);
        if (first_cross < 0 && v > running->threshold) first_cross = static_cast<std::int64_t>(n);
        out << n << ',' << full(v);
        for (int k = 0; k < model.dim; ++k) out << ',' << full(path[n](k));
        out << '\n';
      }
      ctx.criterion("running_max", first_cross >= 0,
                    "max V over " + std::to_string(running->horizon) + " steps is " +
                        brief(vmax) + (first_cross >= 0
                                           ? ", first above " + brief(running->threshold) +
                                                 " at n=" + std::to_string(first_cross)
                                           : ", never above " + brief(running->threshold)));
    }
  };
}

// ---------------------------------------------------------------------------
// switching

std::vector<Vec> ring_states(int dim, const std::vector<double>& radii, int directions) {
  std::vector<Vec> states;
  for (double r : radii) {
    if (dim == 2) {
      for (int j = 0; j < directions; ++j) {
        const double a = 2.0 * std::numbers::pi * j / directions;
        Vec x(2);
        x << r * std::cos(a), r * std::sin(a);
        states.push_back(x);
      }
    } else {
      for (int i = 0; i < dim; ++i) {
        for (double sign : {1.0, -1.0}) {
          Vec x = Vec::Zero(dim);
          x(i) = sign * r;
          states.push_back(x);
        }
      }
    }
  }
  return states;
}

Plan plan_switching(const ExperimentConfig& cfg) {
  const json& doc = cfg.body;
  const json& m = require(doc, "", "model");
  const std::string type = string_field(m, "model", "type");
  if (type != "rot-switch") invalid("model.type", "unknown switching model '" + type + "'");
  RotSwitchParams params;
  params.angle0 = number_or(m, "model", "angle0", params.angle0);
  params.angle1 = number_or(m, "model", "angle1", params.angle1);
  params.m0 = number_or(m, "model", "m0", params.m0);
  params.gamma = number_or(m, "model", "gamma", params.gamma);
  params.g0 = number_or(m, "model", "g0", params.g0);
  params.noise_scale = number_or(m, "model", "noise_scale", params.noise_scale);
  const SwitchingSystemSpec spec = checked("model", [&] { return rot_switch_demo(params); });

  const Vec x = parse_state(doc, "", "x0", spec.dim);
  const auto mode0 = integer_or(doc, "", "mode0", 0, 0);
  if (mode0 >= spec.modes) invalid("mode0", "outside mode space");
  Vec x0(spec.dim + 1);
  x0 << x, static_cast<double>(mode0);
  EnsembleOptions opt;
  opt.horizon = integer(doc, "", "horizon", 1);
  opt.trajectories = integer(doc, "", "trajectories", 1);
  opt.base_seed = cfg.seed;
  opt.r_values = parse_r_values(doc, "", {2.0});
  const std::int64_t path_horizon =
      integer_or(doc, "", "path_horizon", std::min<std::int64_t>(opt.horizon, 1000), 1);

  const json& checks = section_or_empty(doc, "", "checks");
  struct DriftProbe {
    std::vector<Vec> states;
    std::vector<std::int64_t> times;
  };
  std::optional<DriftProbe> drift_probe;
  if (const json* d = optional_field(checks, "checks", "switch_drift")) {
    const std::string dp = "checks.switch_drift";
    const auto radii = number_list(require(*d, dp, "radii"), join(dp, "radii"));
    for (std::size_t i = 0; i < radii.size(); ++i) {
      if (!(radii[i] > spec.B)) {
        invalid(index_path(join(dp, "radii"), i), "must exceed the drift radius");
      }
    }
    const int dirs = static_cast<int>(integer_or(*d, dp, "directions", 16, 1));
    drift_probe = DriftProbe{ring_states(spec.dim, radii, dirs),
                             integer_list_or(*d, dp, "times", {0}, 0)};
  }
  struct Growth {
    GrowthProbeGrid grid;
    std::vector<double> p_values;
  };
  std::optional<Growth> growth;
  if (const json* g = optional_field(checks, "checks", "growth")) {
    const std::string gp = "checks.growth";
    Growth gr;
    gr.grid.states = ring_states(spec.dim,
                                 number_list(require(*g, gp, "radii"), join(gp, "radii")),
                                 static_cast<int>(integer_or(*g, gp, "directions", 8, 1)));
    gr.grid.times = integer_list_or(*g, gp, "times", {0}, 0);
    gr.grid.noise_draws = static_cast<int>(integer_or(*g, gp, "noise_draws", 16, 1));
    gr.grid.seed = cfg.seed;
    gr.p_values = number_list_or(*g, gp, "p", {2.0});
    growth = gr;
  }
  const auto trend = parse_trend(checks, "checks");
  if (trend) ensure_r(opt.r_values, trend->r);

  return [=](Context& ctx) {
    if (drift_probe) {
      std::vector<Mode> modes;
      for (int y = 0; y < spec.modes; ++y) modes.push_back(y);
      const SwitchDriftReport r =
          check_switch_drift(spec, drift_probe->states, drift_probe->times, modes);
      double worst = -std::numeric_limits<double>::infinity();
      for (const auto& probe : r.probes) {
        worst = std::max(worst, probe.kernel_average - probe.bound);
      }
      ctx.criterion("switch_drift", r.pass,
                    std::to_string(r.probes.size()) +
                        " probes, max(kernel average - bound) = " + brief(worst));
    }
    double mbar_f2 = std::numeric_limits<double>::quiet_NaN();
    if (growth) {
      const GrowthConstantReport g =
          estimate_growth_constants(spec, growth->p_values, growth->grid);
      auto out = ctx.open("growth.csv");
      out << "family,p,value\n";
      for (const auto& [key, value] : g.averaged) {
        out << to_string(key.first) << ',' << full(key.second) << ',' << full(value) << '\n';
      }
      if (g.averaged.count({GrowthFamily::F, 2.0})) mbar_f2 = g.at(GrowthFamily::F, 2.0);
    }
    const std::string violation = exponent_violation(spec, mbar_f2);
    ctx.criterion("exponents", violation.empty(),
                  violation.empty() ? "declared growth exponents are admissible" : violation);

    const ProcessModel model = as_process_model(spec);
    EnsembleOptions o = opt;
    o.workers = ctx.workers();
    const EnsembleMomentReport report = simulate_ensemble(model, x0, o);
    {
      auto out = ctx.open("moments.csv");
      write_csv(report, out);
    }
    {
      RngStream rng(cfg.seed, 0x70617468ULL);
      const auto path = simulate_switching_path(
          spec, SwitchingState{x, static_cast<Mode>(mode0)}, path_horizon, rng);
      auto out = ctx.open("trajectory.csv");
      write_trajectory_csv(path, out);
    }
    if (trend) report_trend(ctx, "no_growth", report, *trend);
  };
}

// ---------------------------------------------------------------------------
// ergodicity

Plan plan_ergodicity(const ExperimentConfig& cfg) {
  const json& doc = cfg.body;
  const json& m = require(doc, "", "model");
  const std::string type = string_field(m, "model", "type");

  std::optional<FiniteChain> finite;
  std::optional<DiscretizationSpec> grid;
  if (type == "finite") {
    FiniteChain chain;
    if (const json* csv = optional_field(m, "model", "states_csv")) {
      if (!csv->is_string()) invalid("model.states_csv", "must be a path");
      const auto states_path = cfg.base_dir / csv->get<std::string>();
      const auto matrix_path = cfg.base_dir / string_field(m, "model", "matrix_csv");
      std::ifstream si(states_path), mi(matrix_path);
      if (!si) invalid("model.states_csv", "cannot open " + states_path.string());
      if (!mi) invalid("model.matrix_csv", "cannot open " + matrix_path.string());
      chain = checked("model", [&] { return read_chain_csv(si, mi); });
    } else {
      chain.P = matrix_of(require(m, "model", "P"), "model.P");
      const auto n = chain.P.rows();
      for (Eigen::Index i = 0; i < n; ++i) chain.states.push_back(Vec::Constant(1, double(i)));
      chain.V = number_list_or(m, "model", "V", std::vector<double>(std::size_t(n), 0.0));
    }
    checked("model", [&] {
      validate_chain(chain);
      return 0;
    });
    finite = std::move(chain);
  } else if (type == "euler-maruyama-ou") {
    grid = checked("model", [&] {
      return euler_maruyama_ou(number(m, "model", "delta"), number(m, "model", "radius"),
                               static_cast<int>(integer(m, "model", "points", 2)));
    });
  } else if (type == "cubic-drift") {
    grid = checked("model", [&] {
      return cubic_drift(number(m, "model", "c"), number_or(m, "model", "g_exponent", 0.3),
                         number(m, "model", "radius"),
                         static_cast<int>(integer(m, "model", "points", 2)));
    });
  } else {
    invalid("model.type",
            "unknown chain '" + type + "' (expected finite, euler-maruyama-ou or cubic-drift)");
  }
  if (grid) {
    require_positive(grid->radius, "model.radius");
    grid->overflow_cells =
        static_cast<int>(integer_or(m, "model", "overflow_cells", grid->points_per_axis, 0));
  }

  const double r = number_or(doc, "", "r", 1.0);
  require_positive(r, "r");
  std::vector<std::int64_t> n_grid =
      integer_list_or(doc, "", "n_grid", {0, 1, 2, 4, 8, 16, 32, 64, 128, 256, 512}, 0);
  if (n_grid.empty()) invalid("n_grid", "must not be empty");
  std::optional<std::int64_t> x0_index;
  std::optional<Vec> x0_state;
  if (const json* v = optional_field(doc, "", "x0_index")) {
    x0_index = as_integer(*v, "x0_index", 0);
    if (finite && *x0_index >= finite->size()) invalid("x0_index", "outside state space");
  } else if (const json* v = optional_field(doc, "", "x0")) {
    x0_state = vector_of(*v, "x0");
  } else {
    x0_index = 0;
  }

  const json& checks = section_or_empty(doc, "", "checks");
  const std::string cp = "checks";
  std::optional<double> tv_below, weighted_below;
  if (optional_field(checks, cp, "tv_below")) tv_below = number(checks, cp, "tv_below");
  if (optional_field(checks, cp, "weighted_below")) {
    weighted_below = number(checks, cp, "weighted_below");
  }
  struct ClosedForm {
    double rate, atol;
  };
  std::optional<ClosedForm> closed_form;
  if (const json* c = optional_field(checks, cp, "tv_closed_form")) {
    closed_form = ClosedForm{number(*c, "checks.tv_closed_form", "rate"),
                             number_or(*c, "checks.tv_closed_form", "atol", 1e-10)};
  }
  struct Moment {
    double power, target, relative;
  };
  std::optional<Moment> stationary_moment;
  if (const json* s = optional_field(checks, cp, "stationary_moment")) {
    const std::string sp = "checks.stationary_moment";
    stationary_moment = Moment{number_or(*s, sp, "power", 2.0), number(*s, sp, "target"),
                               number_or(*s, sp, "relative", 0.05)};
  }
  struct MonteCarlo {
    std::int64_t chains, burn_in;
    std::vector<double> powers;
    std::optional<double> target;
    double relative;
    Vec x0;
  };
  std::optional<MonteCarlo> monte_carlo;
  if (const json* mc = optional_field(checks, cp, "monte_carlo")) {
    const std::string mp = "checks.monte_carlo";
    if (!grid) invalid(mp, "needs a continuum model");
    MonteCarlo c;
    c.chains = integer(*mc, mp, "chains", 1);
    c.burn_in = integer(*mc, mp, "burn_in", 1);
    c.powers = number_list_or(*mc, mp, "powers", {2.0});
    if (c.powers.empty()) invalid(join(mp, "powers"), "must not be empty");
    for (std::size_t i = 0; i < c.powers.size(); ++i) {
      require_positive(c.powers[i], index_path(join(mp, "powers"), i));
    }
    if (optional_field(*mc, mp, "target")) {
      if (c.powers.size() != 1) invalid(join(mp, "target"), "needs exactly one power");
      c.target = number(*mc, mp, "target");
    }
    c.relative = number_or(*mc, mp, "relative", 0.05);
    c.x0 = optional_field(*mc, mp, "x0") ? parse_state(*mc, mp, "x0", grid->dim)
                                         : Vec(Vec::Zero(grid->dim));
    monte_carlo = c;
  }

  return [=](Context& ctx) {
    FiniteChain chain;
    if (finite) {
      chain = *finite;
    } else {
      const Discretization disc = discretize_multiplicative(*grid, ctx.workers());
      chain = disc.chain;
      ctx.criterion("truncation", true,
                    "row renormalization factors in [" + brief(disc.min_renormalization) + ", " +
                        brief(disc.max_renormalization) + "]");
    }
    int start = 0;
    if (x0_index) {
      start = static_cast<int>(*x0_index);
    } else {
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < chain.size(); ++i) {
        const double d = (chain.states[std::size_t(i)] - *x0_state).norm();
        if (d < best) {
          best = d;
          start = i;
        }
      }
    }
    const Vec pi = stationary_distribution(chain);
    {
      auto out = ctx.open("stationary.csv");
      out << "index,V,pi";
      for (Eigen::Index k = 0; k < chain.states.front().size(); ++k) out << ",x" << k;
      out << '\n';
      for (int i = 0; i < chain.size(); ++i) {
        out << i << ',' << full(chain.V[std::size_t(i)]) << ',' << full(pi(i));
        for (Eigen::Index k = 0; k < chain.states[std::size_t(i)].size(); ++k) {
          out << ',' << full(chain.states[std::size_t(i)](k));
        }
        out << '\n';
      }
    }
    const auto rows = convergence_profile(chain, start, r, n_grid);
    {
      auto out = ctx.open("profile.csv");
      write_profile_csv(rows, out);
    }
    if (tv_below) {
      ctx.criterion("tv_below", rows.back().tv <= *tv_below,
                    "TV at n=" + std::to_string(rows.back().n) + " is " + brief(rows.back().tv));
    }
    if (weighted_below) {
      ctx.criterion("weighted_below", rows.back().weighted <= *weighted_below,
                    "weighted norm at n=" + std::to_string(rows.back().n) + " is " +
                        brief(rows.back().weighted));
    }
    if (closed_form) {
      const auto at0 = convergence_profile(chain, start, r, {0}).front().tv;
      double worst = 0.0;
      for (const auto& row : rows) {
        const double expect = at0 * std::pow(std::abs(closed_form->rate), double(row.n));
        worst = std::max(worst, std::abs(row.tv - expect));
      }
      ctx.criterion("tv_closed_form", worst <= closed_form->atol,
                    "max |TV - TV_0 |rate|^n| = " + brief(worst));
    }
    auto pi_moment = [&](double power) {
      return expectation(chain, pi, [power](const Vec& x) { return std::pow(x.norm(), power); });
    };
    if (stationary_moment) {
      const double got = pi_moment(stationary_moment->power);
      const double rel = std::abs(got - stationary_moment->target) / stationary_moment->target;
      ctx.criterion("stationary_moment", rel <= stationary_moment->relative,
                    "pi-moment of order " + format_exponent(stationary_moment->power) + " is " +
                        brief(got) + ", target " + brief(stationary_moment->target) +
                        " (rel. error " + brief(rel) + ")");
    }
    if (monte_carlo) {
      const ProcessModel model = continuum_model(*grid, gaussian_noise(grid->noise_dim, 0.0, 1.0));
      EnsembleOptions o;
      o.horizon = monte_carlo->burn_in;
      o.trajectories = monte_carlo->chains;
      o.base_seed = cfg.seed;
      o.r_values = monte_carlo->powers;
      o.workers = ctx.workers();
      const EnsembleMomentReport report = simulate_ensemble(model, monte_carlo->x0, o);
      {
        auto out = ctx.open("monte_carlo.csv");
        out << "power,monte_carlo,se,reference\n";
        for (double power : monte_carlo->powers) {
          const auto& s = report.at(power);
          const double ref = monte_carlo->target ? *monte_carlo->target : pi_moment(power);
          out << full(power) << ',' << full(s.mean.back()) << ',' << full(s.standard_error.back())
              << ',' << full(ref) << '\n';
        }
      }
      for (double power : monte_carlo->powers) {
        const double got = report.at(power).mean.back();
        const double ref = monte_carlo->target ? *monte_carlo->target : pi_moment(power);
        const double rel = std::abs(got - ref) / std::abs(ref);
        ctx.criterion("monte_carlo_r" + format_exponent(power), rel <= monte_carlo->relative,
                      "long-run E|X|^" + format_exponent(power) + " = " + brief(got) + " vs " +
                          (monte_carlo->target ? "target " : "grid pi-moment ") + brief(ref) +
                          " (rel. error " + brief(rel) + ")");
      }
    }
  };
}

// ---------------------------------------------------------------------------
// control

Plan plan_control(const ExperimentConfig& cfg) {
  const json& doc = cfg.body;
  const json& pj = require(doc, "", "plant");
  ControlPlant plant;
  plant.A = matrix_of(require(pj, "plant", "A"), "plant.A");
  plant.B = matrix_of(require(pj, "plant", "B"), "plant.B");
  plant.k = static_cast<int>(integer(pj, "plant", "k", 1));
  plant.u_max = number(pj, "plant", "u_max");
  require_positive(plant.u_max, "plant.u_max");
  plant.noise = parse_noise(require(pj, "plant", "noise"), "plant.noise");
  if (!noise_mean(plant.noise).isZero(0.0)) invalid("plant.noise", "must have mean zero");
  // Shape problems are config errors; NotOrthogonal and NotReachable stay
  // module errors so they reach the manifest under their own kind.
  if (plant.A.rows() != plant.A.cols()) invalid("plant.A", "must be square");
  if (plant.B.rows() != plant.A.rows()) invalid("plant.B", "row count differs from A");
  if (noise_dim(plant.noise) != plant.A.rows()) invalid("plant.noise", "dimension differs from A");
  const PolicyArtifacts policy = build_policy(plant);
  const int d = policy.state_dim;

  const Vec x0 = parse_state(doc, "", "x0", d);
  const std::int64_t horizon = integer(doc, "", "horizon", 1);
  const std::int64_t trajectories = integer(doc, "", "trajectories", 1);
  std::vector<double> r_values = parse_r_values(doc, "", {2.0});

  const json& checks = section_or_empty(doc, "", "checks");
  const std::string cp = "checks";
  std::optional<std::int64_t> bound_samples, deadbeat_anchors;
  if (const json* b = optional_field(checks, cp, "control_bound")) {
    bound_samples = integer_or(*b, "checks.control_bound", "samples", 10000, 1);
  }
  if (const json* b = optional_field(checks, cp, "deadbeat")) {
    deadbeat_anchors = integer_or(*b, "checks.deadbeat", "anchors", 100, 1);
  }
  const auto trend = parse_trend(checks, cp);
  if (trend) ensure_r(r_values, trend->r);
  struct OpenLoop {
    std::int64_t trajectories;
    double relative;
  };
  std::optional<OpenLoop> open_loop;
  if (const json* o = optional_field(checks, cp, "open_loop_slope")) {
    const std::string op = "checks.open_loop_slope";
    open_loop = OpenLoop{integer_or(*o, op, "trajectories", trajectories, 1),
                         number_or(*o, op, "relative", 0.1)};
  }

  return [=](Context& ctx) {
    {
      auto out = ctx.open("policy.txt");
      Eigen::IOFormat f(Eigen::FullPrecision, Eigen::DontAlignCols, ", ", "; ", "", "", "[", "]");
      out << "k = " << policy.k << '\n'
          << "u_max = " << full(policy.u_max) << '\n'
          << "saturation_radius = " << full(policy.saturation_radius) << '\n'
          << "gain_norm = " << full(policy.gain_norm) << '\n'
          << "reachability = " << policy.reachability.format(f) << '\n'
          << "right_inverse = " << policy.right_inverse.format(f) << '\n'
          << "gain = " << policy.gain.format(f) << '\n';
      for (int l = 0; l < policy.k; ++l) {
        out << "offset " << l << " reads lifted rows [" << policy.block_row(l) << ", "
            << policy.block_row(l) + policy.input_dim << ")\n";
      }
    }
    if (bound_samples) {
      RngStream rng(cfg.seed, 0xb0a7dULL);
      double worst = 0.0;
      for (std::int64_t i = 0; i < *bound_samples; ++i) {
        Vec anchor(d);
        for (int j = 0; j < d; ++j) anchor(j) = rng.gaussian();
        anchor *= std::pow(10.0, 6.0 * rng.uniform() - 3.0);
        const auto n = static_cast<std::int64_t>(rng.next_u64() % 1000000);
        worst = std::max(worst, control_input(policy, n, anchor).norm());
      }
      ctx.criterion("control_bound", worst <= policy.u_max,
                    "max ||u_n|| over " + std::to_string(*bound_samples) + " anchors is " +
                        brief(worst) + ", u_max " + brief(policy.u_max));
    }
    if (deadbeat_anchors) {
      RngStream rng(cfg.seed, 0xdeadbeefULL);
      double worst = 0.0;
      for (std::int64_t i = 0; i < *deadbeat_anchors; ++i) {
        Vec dir(d);
        do {
          for (int j = 0; j < d; ++j) dir(j) = rng.gaussian();
        } while (dir.norm() == 0.0);
        const Vec anchor = policy.saturation_radius * rng.uniform() * dir / dir.norm();
        Vec x = anchor;
        for (int n = 0; n < policy.k; ++n) x = plant.A * x + plant.B * control_input(policy, n, anchor);
        worst = std::max(worst, x.norm());
      }
      ctx.criterion("deadbeat", worst <= 1e-9,
                    "max ||X_k|| from noise-free anchors in the saturation ball is " +
                        brief(worst));
    }
    const EnsembleMomentReport closed = simulate_controlled(
        plant, policy, x0, horizon, trajectories, r_values, cfg.seed, ctx.workers());
    {
      auto out = ctx.open("closed_loop.csv");
      write_csv(closed, out);
    }
    if (trend) report_trend(ctx, "no_growth", closed, *trend);
    if (open_loop) {
      const EnsembleMomentReport open =
          simulate_controlled(plant, policy, x0, horizon, open_loop->trajectories, {2.0},
                              cfg.seed ^ 0x6f70656eULL, ctx.workers(), true);
      {
        auto out = ctx.open("open_loop.csv");
        write_csv(open, out);
      }
      std::vector<double> t, y;
      const auto& series = open.at(2.0).mean;
      for (std::size_t n = 0; n < series.size(); ++n) {
        t.push_back(double(n));
        y.push_back(series[n]);
      }
      const double slope = least_squares_slope(t, y);
      const double trace = noise_variance(plant.noise).sum();
      const double rel = std::abs(slope - trace) / trace;
      ctx.criterion("open_loop_slope", rel <= open_loop->relative,
                    "open-loop E||X_n||^2 slope " + brief(slope) + " vs noise trace " +
                        brief(trace) + " (rel. error " + brief(rel) + ")");
    }
  };
}

// ---------------------------------------------------------------------------
// exponent-table

Plan plan_exponent_table(const ExperimentConfig& cfg) {
  const json& doc = cfg.body;
  const json& g = require(doc, "", "grid");
  const auto p_values = number_list(require(g, "grid", "p"), "grid.p");
  const auto s_values = number_list_or(g, "grid", "s", {});
  const auto theta_values = number_list_or(g, "grid", "theta", {});
  if (p_values.empty()) invalid("grid.p", "must not be empty");
  const json& checks = section_or_empty(doc, "", "checks");
  std::optional<std::int64_t> consistency;
  if (const json* c = optional_field(checks, "checks", "consistency")) {
    consistency = integer_or(*c, "checks.consistency", "points", 1000, 1);
  }

  return [=](Context& ctx) {
    {
      auto out = ctx.open("exponents.csv");
      out << "function,p,argument,value,branch\n";
      auto row = [&](const char* fn, double p, double arg, auto&& eval) {
        out << fn << ',' << full(p) << ',' << full(arg) << ',';
        try {
          const ExponentValue v = eval();
          out << full(v.value) << ',' << to_string(v.branch) << '\n';
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::OutOfDomain) throw;
          out << "nan,out-of-domain\n";
        }
      };
      for (double p : p_values) {
        for (double s : s_values) row("sigma", p, s, [&] { return sigma({s, p}); });
        for (double th : theta_values) row("sigma_bar", p, th, [&] { return sigma_bar({th, p}); });
      }
    }
    if (consistency) {
      RngStream rng(cfg.seed, 0xc0515ULL);
      double worst = 0.0;
      for (std::int64_t i = 0; i < *consistency; ++i) {
        const double p = 2.0 + 8.0 * rng.uniform_open_below();
        const double s = (p / 2.0 - 1.0) * rng.uniform_open_below();
        if (s <= 0.0) continue;
        const auto [a, b] = consistency_link(s, p);
        const double gap = a.branch == b.branch ? std::abs(a.value - b.value)
                                                : std::numeric_limits<double>::infinity();
        worst = std::max(worst, gap / (1.0 + std::abs(a.value)));
      }
      ctx.criterion("consistency_link", worst <= 1e-12,
                    std::to_string(*consistency) + " random (s, p), max relative gap " +
                        brief(worst));
    }
  };
}

Plan build_plan(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::Ensemble:
      return plan_ensemble(cfg);
    case ExperimentKind::VerifyAssumption:
      return plan_verify(cfg);
    case ExperimentKind::Switching:
      return plan_switching(cfg);
    case ExperimentKind::Ergodicity:
      return plan_ergodicity(cfg);
    case ExperimentKind::Control:
      return plan_control(cfg);
    case ExperimentKind::ExponentTable:
      return plan_exponent_table(cfg);
  }
  invalid("kind", "unknown kind");
}

ExperimentKind parse_kind(const json& doc) {
  const std::string kind = string_field(doc, "", "kind");
  for (auto k : {ExperimentKind::Ensemble, ExperimentKind::VerifyAssumption,
                 ExperimentKind::Switching, ExperimentKind::Ergodicity, ExperimentKind::Control,
                 ExperimentKind::ExponentTable}) {
    if (to_string(k) == kind) return k;
  }
  invalid("kind", "unknown kind '" + kind +
                      "' (expected ensemble, verify-assumption, switching, ergodicity, "
                      "control or exponent-table)");
}

std::string default_output_dir(const std::string& name) { return "driftlab-out/" + name; }

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Ensemble:
      return "ensemble";
    case ExperimentKind::VerifyAssumption:
      return "verify-assumption";
    case ExperimentKind::Switching:
      return "switching";
    case ExperimentKind::Ergodicity:
      return "ergodicity";
    case ExperimentKind::Control:
      return "control";
    case ExperimentKind::ExponentTable:
      return "exponent-table";
  }
  return "unknown";
}

ExperimentConfig parse_config(const json& doc, std::filesystem::path base_dir) {
  require_object(doc, "");
  ExperimentConfig cfg;
  cfg.kind = parse_kind(doc);
  const json* name = optional_field(doc, "", "name");
  if (name && !name->is_string()) invalid("name", "must be a string");
  cfg.name = name ? name->get<std::string>() : std::string(to_string(cfg.kind));
  const json& seed = require(doc, "", "seed");
  if (!seed.is_number_unsigned()) invalid("seed", "must be a nonnegative integer");
  cfg.seed = seed.get<std::uint64_t>();
  const json* out = optional_field(doc, "", "output_dir");
  if (out && !out->is_string()) invalid("output_dir", "must be a string");
  cfg.output_dir = out ? out->get<std::string>() : default_output_dir(cfg.name);
  cfg.base_dir = std::move(base_dir);
  cfg.body = doc;
  build_plan(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigInvalid, path.string() + ": cannot open");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigInvalid, path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

bool RunManifest::all_pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const auto& c) { return c.pass; });
}

int RunManifest::exit_code() const {
  if (!error.empty()) return 1;
  return all_pass() ? 0 : 2;
}

std::string version() { return DRIFTLAB_VERSION; }

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

RunManifest start_manifest(const json& doc) {
  RunManifest m;
  m.version = version();
  m.config_hash = fnv1a_hex(doc.dump());
  return m;
}

void finish(RunManifest& manifest, const std::chrono::steady_clock::time_point& t0) {
  manifest.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (manifest.output_dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(manifest.output_dir, ec);
  std::ofstream out(std::filesystem::path(manifest.output_dir) / "manifest.txt");
  if (out) write_manifest(manifest, out);
}

}  // namespace

RunManifest run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  RunManifest manifest = start_manifest(config.body);
  manifest.name = config.name;
  manifest.kind = std::string(to_string(config.kind));
  manifest.seed = config.seed;
  manifest.output_dir = options.output_dir.empty() ? config.output_dir : options.output_dir;
  try {
    std::filesystem::create_directories(manifest.output_dir);
    const Plan plan = build_plan(config);
    Context ctx(manifest.output_dir, options.workers, manifest);
    plan(ctx);
  } catch (const std::exception& e) {
    manifest.error = e.what();
  }
  finish(manifest, t0);
  return manifest;
}

RunManifest run_document(const json& doc, const RunOptions& options,
                         std::filesystem::path base_dir) {
  ExperimentConfig config;
  try {
    config = parse_config(doc, std::move(base_dir));
  } catch (const std::exception& e) {
    const auto t0 = std::chrono::steady_clock::now();
    RunManifest manifest = start_manifest(doc);
    manifest.error = e.what();
    if (doc.is_object()) {
      if (auto it = doc.find("name"); it != doc.end() && it->is_string()) {
        manifest.name = it->get<std::string>();
      }
      if (auto it = doc.find("kind"); it != doc.end() && it->is_string()) {
        manifest.kind = it->get<std::string>();
      }
    }
    manifest.output_dir = options.output_dir;
    if (manifest.output_dir.empty() && doc.is_object()) {
      if (auto it = doc.find("output_dir"); it != doc.end() && it->is_string()) {
        manifest.output_dir = it->get<std::string>();
      } else if (!manifest.name.empty()) {
        manifest.output_dir = default_output_dir(manifest.name);
      }
    }
    finish(manifest, t0);
    return manifest;
  }
  return run_experiment(config, options);
}

void write_manifest(const RunManifest& m, std::ostream& out) {
  const char* status = m.exit_code() == 0 ? "pass" : m.exit_code() == 2 ? "fail" : "error";
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.3f", m.wall_time_seconds);
  out << "name = " << m.name << '\n'
      << "kind = " << m.kind << '\n'
      << "version = " << m.version << '\n'
      << "config_hash = " << m.config_hash << '\n'
      << "seed = " << m.seed << '\n'
      << "status = " << status << '\n'
      << "exit_code = " << m.exit_code() << '\n'
      << "wall_time_seconds = " << wall << '\n'
      << "output_dir = " << m.output_dir << '\n';
  for (const auto& f : m.outputs) out << "output = " << f << '\n';
  for (const auto& c : m.criteria) {
    out << "criterion." << c.name << " = " << (c.pass ? "pass" : "fail") << " | " << c.detail
        << '\n';
  }
  if (!m.error.empty()) out << "error = " << m.error << '\n';
}

}  // namespace driftlab
