#include <cmath>
#include <sstream>

#include "doctest.h"
#include "driftlab/ergodicity.hpp"
#include "driftlab/errors.hpp"
#include "driftlab/process.hpp"

using namespace driftlab;

namespace {

FiniteChain chain_of(const Mat& P, std::vector<double> V = {}) {
  FiniteChain c;
  c.P = P;
  for (Eigen::Index i = 0; i < P.rows(); ++i) c.states.push_back(Vec::Constant(1, double(i)));
  c.V = V.empty() ? std::vector<double>(std::size_t(P.rows()), 0.0) : std::move(V);
  return c;
}

Mat two_state() {
  Mat P(2, 2);
  P << 0.9, 0.1, 0.2, 0.8;
  return P;
}

FiniteChain random_chain(RngStream& rng, int n) {
  Mat P(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) P(i, j) = 0.05 + rng.uniform();
    P.row(i) /= P.row(i).sum();
  }
  std::vector<double> V;
  for (int i = 0; i < n; ++i) V.push_back(10.0 * rng.uniform());
  return chain_of(P, V);
}

SignedMeasure measure(std::vector<double> w) {
  SignedMeasure nu;
  for (std::size_t i = 0; i < w.size(); ++i) nu.support.push_back(int(i));
  nu.weights = std::move(w);
  return nu;
}

// sup over |f| <= g of |sum f nu| restricted to the extreme points f = +-g.
double sign_pattern_oracle(const SignedMeasure& nu, const std::vector<double>& g) {
  const std::size_t n = g.size();
  double best = 0.0;
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += ((mask >> i) & 1 ? g[i] : -g[i]) * nu.weights[i];
    best = std::max(best, std::abs(s));
  }
  return best;
}

// 2 max over subsets A of |nu(A)|.
double subset_tv_oracle(const SignedMeasure& nu) {
  const std::size_t n = nu.weights.size();
  double best = 0.0;
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if ((mask >> i) & 1) s += nu.weights[i];
    }
    best = std::max(best, std::abs(s));
  }
  return 2.0 * best;
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

TEST_SUITE("ergodicity") {

TEST_CASE("stationary distribution examples") {
  CHECK(stationary_distribution(chain_of(Mat::Identity(1, 1)))(0) == 1.0);
  Mat half(2, 2);
  half << 0.5, 0.5, 0.5, 0.5;
  const Vec a = stationary_distribution(chain_of(half));
  CHECK(a(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(a(1) == doctest::Approx(0.5).epsilon(1e-15));
  const Vec b = stationary_distribution(chain_of(two_state()));
  CHECK(b(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(b(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("stationary residual and matrix-power oracle on random chains") {
  RngStream rng(61, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + int(rng.next_u64() % 9);
    const FiniteChain c = random_chain(rng, n);
    const Vec pi = stationary_distribution(c);
    const Eigen::RowVectorXd row = pi.transpose();
    CHECK((row * c.P - row).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(pi.sum() == doctest::Approx(1.0).epsilon(1e-14));
    Mat power = c.P;
    for (int k = 0; k < 12; ++k) power = power * power;  // P^4096
    CHECK((power.row(0) - row).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("reducible and periodic chains are rejected") {
  CHECK(kind_of([] { stationary_distribution(chain_of(Mat::Identity(2, 2))); }) ==
        ErrorKind::Reducible);
  Mat flip(2, 2);
  flip << 0, 1, 1, 0;
  CHECK(chain_period(flip) == 2);
  CHECK(kind_of([&] { convergence_profile(chain_of(flip), 0, 1.0, {0, 1}); }) ==
        ErrorKind::Periodic);
  Mat cycle3 = Mat::Zero(3, 3);
  cycle3(0, 1) = cycle3(1, 2) = cycle3(2, 0) = 1.0;
  CHECK(chain_period(cycle3) == 3);
  CHECK(is_irreducible(cycle3));
  cycle3(0, 1) = 0.5;
  cycle3(0, 0) = 0.5;
  CHECK(chain_period(cycle3) == 1);
  Mat upper(2, 2);
  upper << 0.5, 0.5, 0.0, 1.0;
  CHECK_FALSE(is_irreducible(upper));
}

TEST_CASE("chain validation") {
  Mat bad(2, 2);
  bad << 0.5, 0.6, 0.5, 0.5;
  CHECK_THROWS_AS(validate_chain(chain_of(bad)), Error);
  Mat neg(2, 2);
  neg << 1.5, -0.5, 0.5, 0.5;
  CHECK_THROWS_AS(validate_chain(chain_of(neg)), Error);
  CHECK_THROWS_AS(validate_chain(chain_of(two_state(), {1.0})), Error);
}

TEST_CASE("g-norm examples") {
  const auto a = measure({0.5, -0.5});
  CHECK(g_norm(a, {1, 1}) == 1.0);
  CHECK(tv_norm(a) == 1.0);
  CHECK(g_norm(measure({0.3, -0.1, -0.2}), {2, 1, 1}) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(kind_of([] { g_norm(measure({0.1, 0.2}), {1.0}); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("g-norm equals the sign-pattern enumeration and satisfies the sandwich") {
  RngStream rng(62, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + int(rng.next_u64() % 12);
    std::vector<double> w, g;
    for (int i = 0; i < n; ++i) {
      w.push_back(2.0 * rng.uniform() - 1.0);
      g.push_back(3.0 * rng.uniform());
    }
    const auto nu = measure(w);
    const double closed = g_norm(nu, g);
    CHECK(std::abs(closed - sign_pattern_oracle(nu, g)) <= 1e-12 * (1.0 + closed));
    double abs_g = 0.0;  // |nu|(g)
    for (int i = 0; i < n; ++i) abs_g += std::abs(w[std::size_t(i)]) * g[std::size_t(i)];
    CHECK(0.5 * abs_g <= closed + 1e-12);
    CHECK(closed <= abs_g + 1e-12);
    // The one-sided version (0 <= f <= g) obeys the same sandwich.
    const double one = one_sided_g_norm(nu, g);
    CHECK(0.5 * abs_g <= one + 1e-12);
    CHECK(one <= abs_g + 1e-12);
  }
}

TEST_CASE("TV norm equals twice the largest subset mass for zero-mass measures") {
  RngStream rng(63, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + int(rng.next_u64() % 11);
    std::vector<double> w;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      w.push_back(2.0 * rng.uniform() - 1.0);
      sum += w.back();
    }
    for (double& x : w) x -= sum / n;  // difference of two probability measures has mass 0
    const auto nu = measure(w);
    CHECK(tv_norm(nu) == doctest::Approx(subset_tv_oracle(nu)).epsilon(1e-12));
  }
}

TEST_CASE("one-state chain has zero distance at every n") {
  const auto rows = convergence_profile(chain_of(Mat::Identity(1, 1), {3.0}), 0, 1.0, {0, 1, 5});
  for (const auto& r : rows) {
    CHECK(r.tv == 0.0);
    CHECK(r.weighted == 0.0);
  }
}

TEST_CASE("two-state TV decays exactly like 0.7^n") {
  const FiniteChain c = chain_of(two_state(), {0.0, 1.0});
  std::vector<std::int64_t> grid;
  for (int n = 0; n <= 60; ++n) grid.push_back(n);
  for (int x0 : {0, 1}) {
    const auto rows = convergence_profile(c, x0, 1.0, grid);
    for (const auto& r : rows) {
      CHECK(std::abs(r.tv - rows[0].tv * std::pow(0.7, double(r.n))) <= 1e-10);
    }
  }
}

TEST_CASE("profiles agree with the matrix-power oracle") {
  RngStream rng(64, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const FiniteChain c = random_chain(rng, 5);
    const Vec pi = stationary_distribution(c);
    const double r = 0.5 + 2.0 * rng.uniform();
    const auto rows = convergence_profile(c, 2, r, {0, 1, 3, 10, 40});
    for (const auto& row : rows) {
      Mat pn = Mat::Identity(5, 5);
      for (std::int64_t k = 0; k < row.n; ++k) pn = pn * c.P;
      double tv = 0.0, weighted = 0.0;
      for (int j = 0; j < 5; ++j) {
        const double d = std::abs(pn(2, j) - pi(j));
        tv += d;
        weighted += d * (std::pow(c.V[std::size_t(j)], r) + 1.0);
      }
      CHECK(row.tv == doctest::Approx(tv).epsilon(1e-10));
      CHECK(row.weighted == doctest::Approx(weighted).epsilon(1e-10));
      // g = V^r + 1 >= 1 makes the weighted norm dominate half the TV norm.
      CHECK(row.weighted >= 0.5 * row.tv);
    }
  }
}

TEST_CASE("five-state chains reach the tolerance the spectral gap predicts") {
  RngStream rng(65, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const FiniteChain c = random_chain(rng, 5);
    const Eigen::VectorXcd ev = c.P.eigenvalues();
    std::vector<double> mods;
    for (Eigen::Index i = 0; i < ev.size(); ++i) mods.push_back(std::abs(ev(i)));
    std::sort(mods.rbegin(), mods.rend());
    const double lambda2 = std::max(mods[1], 1e-3);
    const auto n = std::int64_t(std::ceil(std::log(1e-8) / std::log(lambda2))) + 20;
    const auto rows = convergence_profile(c, 0, 1.0, {n, 4 * n + 100});
    CHECK(rows[0].tv <= 1e-8);
    CHECK(rows[1].weighted <= 1e-6);
  }
}

TEST_CASE("stationary start is a fixed point of the profile") {
  RngStream rng(66, 0);
  const FiniteChain c = random_chain(rng, 6);
  const Vec pi = stationary_distribution(c);
  for (const auto& row : convergence_profile_from(c, pi, 1.0, {0, 1, 10, 100})) {
    CHECK(row.tv <= 1e-12);
    CHECK(row.weighted <= 1e-11);
  }
}

TEST_CASE("chain CSV round trip") {
  RngStream rng(67, 0);
  const FiniteChain c = random_chain(rng, 4);
  std::stringstream states, matrix;
  write_chain_csv(c, states, matrix);
  const FiniteChain back = read_chain_csv(states, matrix);
  CHECK(back.P == c.P);
  CHECK(back.V == c.V);
  for (std::size_t i = 0; i < c.states.size(); ++i) CHECK(back.states[i] == c.states[i]);
}

TEST_CASE("profile CSV layout") {
  std::ostringstream out;
  write_profile_csv({{0, 1.0, 2.0}, {5, 0.25, 0.5}}, out);
  CHECK(out.str() == "n,tv,weighted\n0,1,2\n5,0.25,0.5\n");
}

TEST_CASE("Euler-Maruyama OU grid chain has the AR(1) stationary variance") {
  const double delta = 0.1;
  const Discretization d = discretize_multiplicative(euler_maruyama_ou(delta, 5.0, 201));
  const Vec pi = stationary_distribution(d.chain);
  const double var = expectation(d.chain, pi, [](const Vec& x) { return x(0) * x(0); });
  const double oracle = delta / (1.0 - (1.0 - delta) * (1.0 - delta));
  CHECK(oracle == doctest::Approx(1.0 / (2.0 - delta)));
  CHECK(std::abs(var - oracle) <= 0.05 * oracle);
  CHECK(d.max_renormalization <= 1.05);
  for (Eigen::Index i = 0; i < d.chain.P.rows(); ++i) {
    CHECK(std::abs(d.chain.P.row(i).sum() - 1.0) <= 1e-12);
  }
  const auto windows = window_density(d, 1.0);
  CHECK(windows.size() == 201);
  for (double w : windows) CHECK(std::isfinite(w));
}

TEST_CASE("grid chain rows match the Gaussian cell masses") {
  // Midpoint rule error per cell is at most h^3/24 max|f''|, and the max of
  // |f''| for a N(m, sd^2) density is 1/(sd^3 sqrt(2 pi)). Row renormalization
  // scales each entry by at most the recorded factor.
  const double delta = 0.1;
  const Discretization d = discretize_multiplicative(euler_maruyama_ou(delta, 4.0, 81));
  const double h = d.cell_width;
  const double sd = std::sqrt(delta);
  const double quad = h * h * h / 24.0 / (sd * sd * sd * std::sqrt(2.0 * M_PI));
  const double renorm = std::max(d.max_renormalization - 1.0, 1.0 - d.min_renormalization);
  auto Phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
  for (int i : {20, 40, 60}) {
    const double x = d.chain.states[std::size_t(i)](0);
    const double mean = (1.0 - delta) * x;
    for (int j = 5; j < 76; ++j) {
      const double y = d.chain.states[std::size_t(j)](0);
      const double exact = Phi((y + h / 2 - mean) / sd) - Phi((y - h / 2 - mean) / sd);
      const double tol = (quad + renorm * (exact + quad)) * (1.0 + 1e-9) + 1e-15;
      CHECK(std::abs(d.chain.P(i, j) - exact) <= tol);
    }
  }
}

TEST_CASE("discretizer error paths") {
  DiscretizationSpec zero = euler_maruyama_ou(0.1, 5.0, 21);
  zero.G = [](const Vec&) -> Mat { return Mat::Zero(1, 1); };
  CHECK(kind_of([&] { discretize_multiplicative(zero); }) == ErrorKind::SingularDiffusion);
  DiscretizationSpec tight = euler_maruyama_ou(0.1, 0.3, 11);
  tight.overflow_cells = 0;
  CHECK(kind_of([&] { discretize_multiplicative(tight); }) == ErrorKind::ExcessiveTruncation);
  DiscretizationSpec coarse = euler_maruyama_ou(0.1, 5.0, 2);
  CHECK_THROWS_AS(discretize_multiplicative(coarse), Error);
}

TEST_CASE("grid construction does not depend on the worker count") {
  const DiscretizationSpec spec = cubic_drift(0.5, 0.3, 8.0, 61);
  const Mat a = discretize_multiplicative(spec, 1).chain.P;
  const Mat b = discretize_multiplicative(spec, 4).chain.P;
  CHECK(a == b);
}

TEST_CASE("two-dimensional grid with a non-square diffusion") {
  DiscretizationSpec spec;
  spec.dim = 2;
  spec.noise_dim = 2;
  spec.radius = 4.0;
  spec.points_per_axis = 25;
  spec.density = standard_normal_density;
  spec.L = [](const Vec& x) -> Vec { return 0.5 * x; };
  spec.F = [](const Vec& x) -> Vec { return Vec::Zero(x.size()); };
  spec.G = [](const Vec&) -> Mat { return Mat::Identity(2, 2); };
  const Discretization d = discretize_multiplicative(spec);
  const Vec pi = stationary_distribution(d.chain);
  // AR(1) with coefficient 1/2 and unit noise: per-axis variance 4/3.
  const double var = expectation(d.chain, pi, [](const Vec& x) { return x(0) * x(0); });
  CHECK(var == doctest::Approx(4.0 / 3.0).epsilon(0.05));
}

}  // TEST_SUITE
