#include <cmath>
#include <cstring>
#include <sstream>

#include "doctest.h"
#include "driftlab/errors.hpp"
#include "driftlab/process.hpp"
#include "driftlab/switching.hpp"

using namespace driftlab;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// Two modes, P = [[0.3, 0.7], [0.6, 0.4]], L(x, y) = a_y x, F(x, y) = -x.
// <F, L>(y') = -a_{y'} |x|^2 with a = (1, 2), so the kernel averages are
// -(0.3 + 1.4)|x|^2 = -1.7|x|^2 from mode 0 and -(0.6 + 0.8)|x|^2 = -1.4|x|^2
// from mode 1.
SwitchingSystemSpec two_mode(double m0) {
  SwitchingSystemSpec s;
  s.name = "two-mode";
  s.dim = 2;
  s.modes = 2;
  s.kernel = [](std::int64_t, const Vec&, Mode y) {
    return y == 0 ? std::vector<double>{0.3, 0.7} : std::vector<double>{0.6, 0.4};
  };
  s.L = [](std::int64_t, const Vec& x, Mode y) -> Vec { return (y == 0 ? 1.0 : 2.0) * x; };
  s.F = [](std::int64_t, const Vec& x, Mode) -> Vec { return -x; };
  s.G = [](std::int64_t, const Vec&, Mode, const Vec& z) -> Vec { return z; };
  s.noise = gaussian_noise(2, 0.0, 1.0);
  s.gamma = 1.0;
  s.m0 = m0;
  s.B = 1.0;
  return s;
}

SwitchingSystemSpec one_mode(std::function<Vec(const Vec&)> f) {
  SwitchingSystemSpec s;
  s.name = "one-mode";
  s.dim = 1;
  s.modes = 1;
  s.kernel = [](std::int64_t, const Vec&, Mode) { return std::vector<double>{1.0}; };
  s.L = [](std::int64_t, const Vec& x, Mode) -> Vec { return 0.5 * x; };
  s.F = [f](std::int64_t, const Vec& x, Mode) -> Vec { return f(x); };
  s.G = [](std::int64_t, const Vec& x, Mode, const Vec& z) -> Vec {
    return std::pow(1.0 + x.norm(), 0.25) * z;
  };
  s.noise = gaussian_noise(1, 0.0, 1.0);
  s.gamma = 1.0;
  s.f0 = 1.0;
  s.g0 = 0.25;
  s.m0 = 0.1;
  s.B = 1.0;
  return s;
}

std::vector<Vec> ring(double r, int k) {
  std::vector<Vec> out;
  for (int j = 0; j < k; ++j) {
    const double a = 2.0 * M_PI * j / k;
    out.push_back(vec2(r * std::cos(a), r * std::sin(a)));
  }
  return out;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_SUITE("switching") {

TEST_CASE("absorbing modes with identity dynamics freeze the state") {
  SwitchingSystemSpec s = two_mode(1.0);
  s.kernel = [](std::int64_t, const Vec&, Mode y) {
    return y == 0 ? std::vector<double>{1.0, 0.0} : std::vector<double>{0.0, 1.0};
  };
  s.L = [](std::int64_t, const Vec& x, Mode) -> Vec { return x; };
  s.F = [](std::int64_t, const Vec& x, Mode) -> Vec { return Vec::Zero(x.size()); };
  s.G = [](std::int64_t, const Vec& x, Mode, const Vec&) -> Vec { return Vec::Zero(x.size()); };
  RngStream rng(51, 0);
  for (Mode y : {0, 1}) {
    const auto path = simulate_switching_path(s, {vec2(1.5, -2.0), y}, 100, rng);
    for (const auto& st : path) {
      CHECK(st.mode == y);
      CHECK(st.x == vec2(1.5, -2.0));
    }
  }
}

TEST_CASE("one-mode system is bitwise the Markov model") {
  const auto f = [](const Vec& x) -> Vec { return -0.1 * x; };
  const SwitchingSystemSpec s = one_mode(f);
  ProcessModel markov;
  markov.dim = 1;
  markov.step = [f](std::int64_t, const Vec& x, RngStream& rng) -> Vec {
    Vec next = 0.5 * x;
    next += f(x);
    next += std::pow(1.0 + x.norm(), 0.25) * sample_noise(gaussian_noise(1, 0.0, 1.0), rng);
    return next;
  };
  markov.lyapunov = [](const Vec& x) { return x.norm(); };
  markov.in_region = [](const Vec&) { return true; };
  RngStream a(52, 3), b(52, 3);
  const auto sp = simulate_switching_path(s, {Vec::Constant(1, 4.0), 0}, 500, a);
  const auto mp = simulate_path(markov, Vec::Constant(1, 4.0), 500, b);
  for (std::size_t n = 0; n < sp.size(); ++n) {
    const double u = sp[n].x(0), v = mp[n](0);
    CHECK(std::memcmp(&u, &v, sizeof u) == 0);
    CHECK(sp[n].mode == 0);
  }
}

TEST_CASE("switch drift one-mode algebra") {
  // L = x/2, F = -x gives <F, L> = -|x|^2 / 2: m0 = 0.5, gamma = 1.
  SwitchingSystemSpec s = one_mode([](const Vec& x) -> Vec { return -x; });
  s.m0 = 0.5;
  std::vector<Vec> states;
  for (double r : {1.5, 2.0, 10.0, 1e3}) states.push_back(Vec::Constant(1, r)), states.push_back(Vec::Constant(1, -r));
  const auto ok = check_switch_drift(s, states, {0, 7}, {0});
  CHECK(ok.pass);
  for (const auto& p : ok.probes) {
    CHECK(p.kernel_average == doctest::Approx(-0.5 * p.x.squaredNorm()).epsilon(1e-15));
  }
  // Positive drift fails everywhere.
  SwitchingSystemSpec bad = one_mode([](const Vec& x) -> Vec { return x; });
  const auto no = check_switch_drift(bad, states, {0}, {0});
  CHECK_FALSE(no.pass);
  for (const auto& p : no.probes) CHECK_FALSE(p.pass);
}

TEST_CASE("switch drift two-mode hand computation") {
  const auto states = ring(3.0, 8);
  const auto r = check_switch_drift(two_mode(1.4), states, {0}, {0, 1});
  CHECK(r.pass);
  for (const auto& p : r.probes) {
    const double expect = (p.mode == 0 ? -1.7 : -1.4) * 9.0;
    CHECK(p.kernel_average == doctest::Approx(expect).epsilon(1e-14));
    CHECK(p.bound == doctest::Approx(-1.4 * 9.0).epsilon(1e-14));
  }
  const auto strict = check_switch_drift(two_mode(1.5), states, {0}, {0, 1});
  CHECK_FALSE(strict.pass);
  for (const auto& p : strict.probes) CHECK(p.pass == (p.mode == 0));
  CHECK_THROWS_AS(check_switch_drift(two_mode(1.0), {vec2(0.5, 0.0)}, {0}, {0}), Error);
}

TEST_CASE("rot-switch drift holds at every probe") {
  const SwitchingSystemSpec s = rot_switch_demo();
  std::vector<Vec> states;
  for (double r : {1.01, 1.5, 3.0, 10.0, 1e4}) {
    const auto rr = ring(r, 64);
    states.insert(states.end(), rr.begin(), rr.end());
  }
  CHECK(check_switch_drift(s, states, {0, 5, 100000}, {0, 1}).pass);
  CHECK(exponent_violation(s, std::nan("")).empty());
}

TEST_CASE("kernel rows are validated") {
  SwitchingSystemSpec s = two_mode(1.0);
  s.kernel = [](std::int64_t, const Vec&, Mode) { return std::vector<double>{0.5, 0.4}; };
  RngStream rng(53, 0);
  CHECK(kind_of([&] { step_switching(s, 0, {vec2(1, 1), 0}, rng); }) ==
        ErrorKind::KernelNotStochastic);
  s.kernel = [](std::int64_t, const Vec&, Mode) { return std::vector<double>{1.5, -0.5}; };
  CHECK(kind_of([&] { step_switching(s, 0, {vec2(1, 1), 0}, rng); }) ==
        ErrorKind::KernelNotStochastic);
  CHECK_NOTHROW(check_kernel_row({0.25, 0.75}, 2));
  CHECK_THROWS_AS(check_kernel_row({1.0}, 2), Error);
}

TEST_CASE("mode draws follow the kernel") {
  const SwitchingSystemSpec s = two_mode(1.0);
  RngStream rng(54, 0);
  const int n = 100000;
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += step_switching(s, 0, {vec2(1, 0), 0}, rng).mode;
  const double se = std::sqrt(0.7 * 0.3 / n);
  CHECK(std::abs(double(ones) / n - 0.7) <= 4.0 * se);
}

TEST_CASE("growth constants in the degenerate families") {
  GrowthProbeGrid grid;
  for (double r : {0.0, 0.5, 1.0, 2.0, 8.0, 100.0}) grid.states.push_back(Vec::Constant(1, r));
  grid.seed = 55;
  // G = (1 + |x|)^{g0} z with a single mode: the constant is 1.
  const auto single = estimate_growth_constants(
      one_mode([](const Vec& x) -> Vec { return -0.1 * x; }), {2.0, 4.0}, grid);
  CHECK(single.at(GrowthFamily::G, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(single.at(GrowthFamily::G, 4.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(single.at(GrowthFamily::FBar, 2.0) == 0.0);
  CHECK(single.at(GrowthFamily::LBar, 2.0) == 0.0);
  CHECK(single.grid_lower_bound);
  CHECK(single.l1_second_moment_ok);

  // L = x in both modes and F identical across modes: both centered families vanish.
  SwitchingSystemSpec s = two_mode(1.0);
  s.L = [](std::int64_t, const Vec& x, Mode) -> Vec { return x; };
  GrowthProbeGrid g2;
  g2.states = ring(2.0, 8);
  g2.states.push_back(vec2(0.0, 0.0));
  g2.seed = 56;
  const auto r = estimate_growth_constants(s, {2.0}, g2);
  CHECK(r.at(GrowthFamily::LBar, 2.0) == 0.0);
  CHECK(r.at(GrowthFamily::FBar, 2.0) == 0.0);
  CHECK(r.at(GrowthFamily::L1, 2.0) == doctest::Approx(1.0));
  for (const auto& [key, value] : r.averaged) {
    CHECK(std::isfinite(value));
    CHECK(value >= 0.0);
  }
}

TEST_CASE("centered L of the two-mode example") {
  // Lbar(x, y') = L(x, y') - sum P(z, y'') L(x, y''). From z = 0 the mean factor
  // is 0.3 + 1.4 = 1.7, so the centered factors are -0.7 and 0.3 and
  // sum_y' P(0, y') |Lbar|^2 / |x|^2 = 0.3 * 0.49 + 0.7 * 0.09 = 0.21.
  // From z = 1 the mean is 1.4 with factors -0.4, 0.6: 0.6*0.16 + 0.4*0.36 = 0.24.
  SwitchingSystemSpec s = two_mode(1.0);
  s.l1 = 1.0;  // normalize by (1 + |x|)
  GrowthProbeGrid grid;
  const double r = 1e6;  // |x|/(1 + |x|) -> 1
  grid.states = {vec2(r, 0.0)};
  const auto rep = estimate_growth_constants(s, {2.0}, grid);
  const double scale = std::pow(r / (1.0 + r), 2.0);
  CHECK(rep.at(GrowthFamily::LBar, 2.0) == doctest::Approx(0.24 * scale).epsilon(1e-12));
}

TEST_CASE("boundary case examples") {
  BoundaryCaseInputs in;
  in.g0 = in.gamma = 0.25;
  in.f0 = 0.5;
  in.mbar_G2 = 1.0;
  in.m_star_sq = 0.25;
  in.m0 = 1.0;
  auto v = boundary_case_check(in);
  CHECK(v.pass);
  CHECK(v.lhs == doctest::Approx(0.5));

  in.mbar_G2 = 4.0;
  in.m_star_sq = 1.0;
  v = boundary_case_check(in);
  CHECK_FALSE(v.pass);
  CHECK(v.lhs == doctest::Approx(2.0));

  in.f0 = (1.0 + in.gamma) / 2.0;
  in.mbar_F2 = 0.8;
  in.mbar_G2 = 1.0;
  in.m_star_sq = 0.25;
  v = boundary_case_check(in);
  CHECK(v.f0_on_boundary);
  CHECK(v.lhs == doctest::Approx(0.9));
  CHECK(v.pass);

  in.g0 = 0.3;
  CHECK(kind_of([&] { boundary_case_check(in); }) == ErrorKind::NotBoundaryCase);
}

TEST_CASE("exponent admissibility") {
  SwitchingSystemSpec s = rot_switch_demo();
  CHECK(exponent_violation(s, 0.0).empty());
  s.g0 = 0.5;
  CHECK_FALSE(exponent_violation(s, 0.0).empty());
  s.g0 = 0.4;
  s.centered_G = false;
  CHECK(exponent_violation(s, 0.0).empty());  // 0.4 < min(0.5, 1/2)
  s.g0 = 0.5;
  CHECK_FALSE(exponent_violation(s, 0.0).empty());
  s = rot_switch_demo();
  s.l1 = 0.5;
  CHECK_FALSE(exponent_violation(s, 0.0).empty());
  s = rot_switch_demo();
  s.f0 = (1.0 + s.gamma) / 2.0;
  CHECK(exponent_violation(s, 2.0 * s.m0).empty());
  CHECK_FALSE(exponent_violation(s, 2.0 * s.m0 + 0.01).empty());
}

TEST_CASE("noise moment estimate") {
  const SwitchingSystemSpec s = rot_switch_demo();
  RngStream rng(57, 0);
  // |z|^2 is chi-square with 2 degrees of freedom: mean 2, variance 4.
  const double m = estimate_noise_moment(s, 2.0, 100000, rng);
  CHECK(std::abs(m - 2.0) <= 4.0 * std::sqrt(4.0 / 100000));
}

TEST_CASE("rot-switch second moment shows no growth trend") {
  const SwitchingSystemSpec s = rot_switch_demo();
  EnsembleOptions opt;
  opt.horizon = 3000;
  opt.trajectories = 100;
  opt.base_seed = 58;
  opt.r_values = {2.0};
  Vec x0(3);
  x0 << 3.0, 0.0, 0.0;
  const auto report = simulate_ensemble(as_process_model(s), x0, opt);
  CHECK(no_growth_trend(report.at(2.0).mean).pass);
}

TEST_CASE("trajectory CSV layout") {
  std::vector<SwitchingState> path{{vec2(1.0, 0.5), 0}, {vec2(-2.0, 0.25), 1}};
  std::ostringstream out;
  write_trajectory_csv(path, out);
  CHECK(out.str() == "time,mode,x0,x1\n0,0,1,0.5\n1,1,-2,0.25\n");
}

}  // TEST_SUITE
