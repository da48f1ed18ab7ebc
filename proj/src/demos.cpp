#include <string>
#include <vector>

#include "driftlab/errors.hpp"
#include "driftlab/experiment.hpp"

namespace driftlab {

namespace {

DemoEntry demo(std::string name, std::string description, const char* body) {
  auto config = nlohmann::json::parse(body);
  config["name"] = name;
  return {std::move(name), std::move(description), std::move(config)};
}

std::vector<DemoEntry> build_catalogue() {
  std::vector<DemoEntry> demos;
  demos.push_back(demo("additive",
                       "X_{n+1} = X_n/2 + xi with Exp(1) noise; terminal mean against 2 E xi",
                       R"({
    "kind": "ensemble",
    "seed": 20240601,
    "model": {"type": "additive",
              "noise": {"family": "shifted-exponential", "shift": 0.0, "mean_excess": 1.0}},
    "x0": [0.0],
    "horizon": 200,
    "trajectories": 10000,
    "r": [1, 2],
    "checks": {"terminal_mean": {"r": 1, "target": 2.0, "se_multiple": 3.0}}
  })"));
  demos.push_back(demo("additive-assumption",
                       "drift, jump and region conditions all certified for the additive chain",
                       R"({
    "kind": "verify-assumption",
    "seed": 20240602,
    "model": {"type": "additive",
              "noise": {"family": "shifted-exponential", "shift": 0.0, "mean_excess": 1.0}},
    "p": 4,
    "s": 0,
    "plan": {"radius_exponents": [-2, -1, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12],
             "times": [0, 100],
             "drift_samples": 4000,
             "jump_samples": 20000},
    "checks": {"expect": {"drift": "pass", "jump": "pass", "region": "pass"}}
  })"));
  demos.push_back(demo("counterexample",
                       "deterministic sequence with negative drift but unbounded excursions "
                       "from the region",
                       R"({
    "kind": "verify-assumption",
    "seed": 20240603,
    "model": {"type": "counterexample"},
    "p": 4,
    "s": 0,
    "plan": {"probes": [[1], [2], [3], [5], [10], [100], [1000]],
             "radius_exponents": [],
             "times": [0, 10, 100, 1000],
             "drift_samples": 100,
             "jump_samples": 1000},
    "checks": {"expect": {"drift": "pass", "jump": "pass", "region": "fail"},
               "running_max": {"x0": [1], "horizon": 10000, "threshold": 100}}
  })"));
  demos.push_back(demo("rot-switch",
                       "two rotation modes switched by the sign of x_0, sublinear restoring "
                       "drift and growing noise",
                       R"({
    "kind": "switching",
    "seed": 20240604,
    "model": {"type": "rot-switch"},
    "x0": [3.0, 0.0],
    "mode0": 0,
    "horizon": 10000,
    "trajectories": 200,
    "r": [1, 2],
    "path_horizon": 1000,
    "checks": {"switch_drift": {"radii": [1.5, 2, 4, 8, 16, 100, 1000], "directions": 32,
                                "times": [0, 1, 1000]},
               "growth": {"radii": [0.5, 1, 2, 4, 8, 16, 32], "directions": 16, "p": [2]},
               "no_growth": {"r": 2, "factor": 2}}
  })"));
  demos.push_back(demo("cubic-drift",
                       "grid chain of x - c x^3/(1+x^2) + (1+|x|)^0.3 xi against long-run "
                       "Monte Carlo",
                       R"({
    "kind": "ergodicity",
    "seed": 20240605,
    "model": {"type": "cubic-drift", "c": 0.5, "g_exponent": 0.3, "radius": 12.0, "points": 241},
    "r": 1,
    "x0": [0.0],
    "n_grid": [0, 1, 2, 4, 8, 16, 32, 64, 128, 256, 512],
    "checks": {"tv_below": 1e-8,
               "weighted_below": 1e-6,
               "monte_carlo": {"chains": 100000, "burn_in": 200, "powers": [1, 2],
                               "relative": 0.10, "x0": [0.0]}}
  })"));
  demos.push_back(demo("euler-maruyama-ou",
                       "Euler-Maruyama Ornstein-Uhlenbeck chain, step 0.1; stationary variance "
                       "against 1/(2 - step)",
                       R"({
    "kind": "ergodicity",
    "seed": 20240606,
    "model": {"type": "euler-maruyama-ou", "delta": 0.1, "radius": 5.0, "points": 201},
    "r": 2,
    "x0": [0.0],
    "n_grid": [0, 1, 2, 4, 8, 16, 32, 64, 128, 256, 512],
    "checks": {"stationary_moment": {"power": 2, "target": 0.5263157894736842, "relative": 0.05},
               "monte_carlo": {"chains": 100000, "burn_in": 200, "powers": [2],
                               "target": 0.5263157894736842, "relative": 0.05, "x0": [0.0]}}
  })"));
  demos.push_back(demo("two-state",
                       "two-state chain with second eigenvalue 0.7; TV decay against the "
                       "closed form",
                       R"({
    "kind": "ergodicity",
    "seed": 20240607,
    "model": {"type": "finite", "P": [[0.9, 0.1], [0.2, 0.8]], "V": [0, 1]},
    "r": 1,
    "x0_index": 0,
    "n_grid": [0, 1, 2, 3, 4, 5, 10, 20, 40, 60, 80],
    "checks": {"tv_closed_form": {"rate": 0.7, "atol": 1e-10}, "tv_below": 1e-8}
  })"));
  demos.push_back(demo("control-rotation",
                       "planar rotation with one bounded input (u_max 0.5) under Gaussian "
                       "noise 0.1 I, against the uncontrolled plant",
                       R"({
    "kind": "control",
    "seed": 20240608,
    "plant": {"A": [[0, 1], [-1, 0]], "B": [[1], [0]], "k": 2, "u_max": 0.5,
              "noise": {"family": "gaussian", "dim": 2, "mean": 0.0, "variance": 0.1}},
    "x0": [5.0, 0.0],
    "horizon": 10000,
    "trajectories": 200,
    "r": [1, 2],
    "checks": {"control_bound": {"samples": 100000},
               "deadbeat": {"anchors": 1000},
               "no_growth": {"r": 2, "factor": 2},
               "open_loop_slope": {"trajectories": 2000, "relative": 0.10}}
  })"));
  demos.push_back(demo("exponent-table",
                       "moment exponents over a grid of jump orders and growth parameters",
                       R"({
    "kind": "exponent-table",
    "seed": 20240609,
    "grid": {"p": [2.5, 3, 3.5, 4, 5, 6, 8],
             "s": [0, 0.05, 0.1, 0.2, 0.25, 0.5, 1, 1.5, 2],
             "theta": [1, 1.5, 2, 3, 4, 6, 8, "inf"]},
    "checks": {"consistency": {"points": 1000}}
  })"));
  return demos;
}

}  // namespace

const std::vector<DemoEntry>& list_demos() {
  static const std::vector<DemoEntry> demos = build_catalogue();
  return demos;
}

const DemoEntry& find_demo(const std::string& name) {
  for (const auto& d : list_demos()) {
    if (d.name == name) return d;
  }
  throw Error(ErrorKind::ConfigInvalid, "demo: no shipped demo named '" + name + "'");
}

}  // namespace driftlab
