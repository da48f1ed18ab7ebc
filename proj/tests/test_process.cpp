#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "driftlab/errors.hpp"
#include "driftlab/process.hpp"

using namespace driftlab;

namespace {

Vec scalar(double v) { return Vec::Constant(1, v); }

// Hand iteration of the counterexample recurrence.
std::vector<double> counterexample_orbit(int steps) {
  std::vector<double> orbit{1.0};
  for (int n = 0; n < steps; ++n) {
    const double x = orbit.back();
    orbit.push_back(x > 1.0 ? x - 1.0 : n + 1.0);
  }
  return orbit;
}

}  // namespace

TEST_SUITE("process") {

TEST_CASE("reference model single steps") {
  RngStream rng(1, 0);
  const ProcessModel additive = additive_reference(zero_noise(1));
  CHECK(additive.step(0, scalar(10.0), rng)(0) == 5.0);
  const ProcessModel ce = counterexample_reference();
  CHECK(ce.step(4, scalar(3.0), rng)(0) == 2.0);
  CHECK(ce.step(3, scalar(1.0), rng)(0) == 4.0);
  CHECK(ce.in_region(scalar(1.0)));
  CHECK_FALSE(ce.in_region(scalar(2.0)));
}

TEST_CASE("counterexample orbit from 1") {
  const ProcessModel ce = counterexample_reference();
  RngStream rng(1, 0);
  const auto path = simulate_path(ce, scalar(1.0), 8, rng);
  const double expected[] = {1, 1, 2, 1, 4, 3, 2, 1, 8};
  for (int n = 0; n <= 8; ++n) CHECK(path[std::size_t(n)](0) == expected[n]);
}

TEST_CASE("deterministic ensemble reproduces the orbit with zero standard error") {
  const ProcessModel ce = counterexample_reference();
  EnsembleOptions opt;
  opt.horizon = 300;
  opt.trajectories = 77;
  opt.r_values = {1.0, 2.0};
  const auto report = simulate_ensemble(ce, scalar(1.0), opt);
  const auto orbit = counterexample_orbit(300);
  for (int n = 0; n <= 300; ++n) {
    CHECK(report.at(1.0).mean[std::size_t(n)] == orbit[std::size_t(n)]);
    CHECK(report.at(1.0).standard_error[std::size_t(n)] == 0.0);
    CHECK(report.at(2.0).mean[std::size_t(n)] == orbit[std::size_t(n)] * orbit[std::size_t(n)]);
  }
  CHECK(report.at(1.0).sup_estimate == *std::max_element(orbit.begin(), orbit.end()));
}

TEST_CASE("counterexample running max outgrows sqrt(N)/2") {
  const ProcessModel ce = counterexample_reference();
  for (int N : {100, 1000, 10000}) {
    EnsembleOptions opt;
    opt.horizon = N;
    opt.trajectories = 1;
    const auto report = simulate_ensemble(ce, scalar(1.0), opt);
    CHECK(report.at(1.0).sup_estimate > std::sqrt(double(N)) / 2.0);
  }
  EnsembleOptions opt;
  opt.horizon = 10000;
  opt.trajectories = 1;
  CHECK(simulate_ensemble(ce, scalar(1.0), opt).at(1.0).sup_estimate >= 100.0);
}

TEST_CASE("streaming moments match a store-all oracle") {
  const ProcessModel model = additive_reference(gaussian_noise(1, 1.0, 2.0));
  EnsembleOptions opt;
  opt.horizon = 40;
  opt.trajectories = 100;
  opt.base_seed = 99;
  opt.r_values = {1.0, 0.5, 3.0};
  const auto report = simulate_ensemble(model, scalar(3.0), opt);

  std::vector<std::vector<double>> values(41);
  for (int t = 0; t < 100; ++t) {
    RngStream rng(99, std::uint64_t(t));
    Vec x = scalar(3.0);
    values[0].push_back(std::abs(x(0)));
    for (int n = 0; n < 40; ++n) {
      x = model.step(n, x, rng);
      values[std::size_t(n + 1)].push_back(std::abs(x(0)));
    }
  }
  for (double r : opt.r_values) {
    for (int n = 0; n <= 40; ++n) {
      const auto& v = values[std::size_t(n)];
      double mean = 0.0;
      for (double a : v) mean += std::pow(a, r);
      mean /= double(v.size());
      double ss = 0.0;
      for (double a : v) ss += (std::pow(a, r) - mean) * (std::pow(a, r) - mean);
      const double se = std::sqrt(ss / double(v.size() - 1) / double(v.size()));
      const auto& s = report.at(r);
      CHECK(std::abs(s.mean[std::size_t(n)] - mean) <= 1e-9 * std::abs(mean));
      if (n > 0) CHECK(std::abs(s.standard_error[std::size_t(n)] - se) <= 1e-9 * se);
    }
  }
}

TEST_CASE("ensemble output does not depend on the worker count") {
  const ProcessModel model = additive_reference(gaussian_noise(1, 0.0, 1.0));
  EnsembleOptions opt;
  opt.horizon = 50;
  opt.trajectories = 1000;
  opt.base_seed = 5;
  opt.r_values = {1.0, 2.0};
  std::string first;
  for (unsigned w : {1u, 2u, 3u, 8u}) {
    opt.workers = w;
    std::ostringstream out;
    write_csv(simulate_ensemble(model, scalar(0.0), opt), out);
    if (first.empty()) first = out.str();
    CHECK(out.str() == first);
  }
}

TEST_CASE("additive mean follows the closed form") {
  // E X_n = mu (2 - 2^{1-n}) from x0 = 0.
  const double mu = 1.0;
  const ProcessModel model = additive_reference(shifted_exponential_noise(0.0, mu));
  EnsembleOptions opt;
  opt.horizon = 200;
  opt.trajectories = 10000;
  opt.base_seed = 2024;
  const auto report = simulate_ensemble(model, scalar(0.0), opt);
  const auto& s = report.at(1.0);
  for (int n : {1, 2, 3, 5, 10, 50, 200}) {
    const double exact = mu * (2.0 - std::pow(2.0, 1.0 - n));
    CHECK(std::abs(s.mean[std::size_t(n)] - exact) <= 4.0 * s.standard_error[std::size_t(n)]);
  }
  CHECK(std::isfinite(s.sup_estimate));
  // Last 50 steps: average of means against 2 mu with the averaged standard error
  // (conservative, the terms are positively correlated).
  double m = 0.0, se = 0.0;
  for (int n = 151; n <= 200; ++n) {
    m += s.mean[std::size_t(n)];
    se += s.standard_error[std::size_t(n)];
  }
  m /= 50.0;
  se /= 50.0;
  CHECK(std::abs(m - 2.0 * mu) <= 3.0 * se);
}

TEST_CASE("non-finite states are reported with time and trajectory") {
  ProcessModel blowup = scaling_reference(1e200);
  EnsembleOptions opt;
  opt.horizon = 10;
  opt.trajectories = 40;
  try {
    simulate_ensemble(blowup, scalar(1.0), opt);
    FAIL("expected NonFiniteStateError");
  } catch (const NonFiniteStateError& e) {
    CHECK(e.kind() == ErrorKind::NonFiniteState);
    CHECK(e.time() == 2);
    CHECK(e.index() == 0);
  }
}

TEST_CASE("ensemble argument validation") {
  const ProcessModel model = scaling_reference(0.5);
  EnsembleOptions opt;
  opt.horizon = 0;
  CHECK_THROWS_AS(simulate_ensemble(model, scalar(1.0), opt), Error);
  opt.horizon = 1;
  CHECK_THROWS_AS(simulate_ensemble(model, Vec::Zero(2), opt), Error);
}

TEST_CASE("moment CSV layout") {
  const ProcessModel model = scaling_reference(0.5);
  EnsembleOptions opt;
  opt.horizon = 2;
  opt.trajectories = 3;
  opt.r_values = {1.0, 0.5};
  std::ostringstream out;
  write_csv(simulate_ensemble(model, scalar(4.0), opt), out);
  CHECK(out.str() == "time,mean_r_1,se_r_1,mean_r_0.5,se_r_0.5\n"
                     "0,4,0,2,0\n"
                     "1,2,0,1.4142135623730951,0\n"
                     "2,1,0,1,0\n");
}

TEST_CASE("trend check windows") {
  std::vector<double> flat(1001, 3.0);
  CHECK(no_growth_trend(flat).pass);
  std::vector<double> linear(1001);
  for (int i = 0; i <= 1000; ++i) linear[std::size_t(i)] = 1.0 + i;
  const auto t = no_growth_trend(linear);
  CHECK(t.trailing == doctest::Approx(1.0 + (900 + 1000) / 2.0));
  CHECK(t.middle == doctest::Approx(1.0 + (450 + 549) / 2.0));
  CHECK(t.pass);  // linear growth is less than a doubling between the windows
  std::vector<double> quadratic(1001);
  for (int i = 0; i <= 1000; ++i) quadratic[std::size_t(i)] = double(i) * i;
  CHECK_FALSE(no_growth_trend(quadratic).pass);
}

}  // TEST_SUITE
