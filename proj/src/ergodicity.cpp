#include "driftlab/ergodicity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>

#include "driftlab/errors.hpp"
#include "driftlab/parallel.hpp"

namespace driftlab {

namespace {

std::vector<int> bfs_levels(const Mat& P, bool transpose) {
  const auto n = static_cast<int>(P.rows());
  std::vector<int> level(static_cast<std::size_t>(n), -1);
  std::queue<int> queue;
  level[0] = 0;
  queue.push(0);
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop();
    for (int v = 0; v < n; ++v) {
      const double w = transpose ? P(v, u) : P(u, v);
      if (w > 0.0 && level[static_cast<std::size_t>(v)] < 0) {
        level[static_cast<std::size_t>(v)] = level[static_cast<std::size_t>(u)] + 1;
        queue.push(v);
      }
    }
  }
  return level;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_ergodic(const FiniteChain& chain) {
  validate_chain(chain);
  if (!is_irreducible(chain.P)) throw Error(ErrorKind::Reducible, "chain is not irreducible");
  const int period = chain_period(chain.P);
  if (period != 1) {
    throw Error(ErrorKind::Periodic, "chain has period " + std::to_string(period));
  }
}

std::vector<double> split_csv(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "malformed CSV number '" + cell + "'");
    }
  }
  return out;
}

}  // namespace

void validate_chain(const FiniteChain& chain) {
  const Eigen::Index n = chain.P.rows();
  if (n < 1 || chain.P.cols() != n) {
    throw Error(ErrorKind::DimensionMismatch, "transition matrix must be square and nonempty");
  }
  if (static_cast<Eigen::Index>(chain.states.size()) != n ||
      static_cast<Eigen::Index>(chain.V.size()) != n) {
    throw Error(ErrorKind::DimensionMismatch, "states, V and P disagree on the state count");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if ((chain.P.row(i).array() < 0.0).any() || !chain.P.row(i).allFinite()) {
      throw Error(ErrorKind::InvalidArgument, "negative or non-finite transition probability");
    }
    if (std::abs(chain.P.row(i).sum() - 1.0) > 1e-12) {
      throw Error(ErrorKind::InvalidArgument,
                  "row " + std::to_string(i) + " sums to " + fmt(chain.P.row(i).sum()));
    }
    if (!(chain.V[static_cast<std::size_t>(i)] >= 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "V must be nonnegative");
    }
  }
}

bool is_irreducible(const Mat& P) {
  if (P.rows() == 0) return false;
  for (bool transpose : {false, true}) {
    const auto level = bfs_levels(P, transpose);
    if (std::any_of(level.begin(), level.end(), [](int l) { return l < 0; })) return false;
  }
  return true;
}

int chain_period(const Mat& P) {
  const auto level = bfs_levels(P, false);
  const auto n = static_cast<int>(P.rows());
  int g = 0;
  for (int u = 0; u < n; ++u) {
    if (level[static_cast<std::size_t>(u)] < 0) continue;
    for (int v = 0; v < n; ++v) {
      if (P(u, v) > 0.0 && level[static_cast<std::size_t>(v)] >= 0) {
        g = std::gcd(g, std::abs(level[static_cast<std::size_t>(u)] + 1 -
                                 level[static_cast<std::size_t>(v)]));
      }
    }
  }
  return g;
}

Vec stationary_distribution(const FiniteChain& chain) {
  validate_chain(chain);
  if (!is_irreducible(chain.P)) throw Error(ErrorKind::Reducible, "chain is not irreducible");
  const Eigen::Index n = chain.P.rows();
  Mat system = chain.P.transpose() - Mat::Identity(n, n);
  system.row(n - 1).setOnes();
  Vec rhs = Vec::Zero(n);
  rhs(n - 1) = 1.0;
  const Eigen::PartialPivLU<Mat> lu(system);
  Vec pi = lu.solve(rhs);
  // One step of iterative refinement.
  pi += lu.solve(rhs - system * pi);
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
  return pi;
}

double g_norm(const SignedMeasure& nu, const std::vector<double>& g) {
  if (g.size() != nu.weights.size() || nu.support.size() != nu.weights.size()) {
    throw Error(ErrorKind::DimensionMismatch, "g, support and weights must align");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(g[i] >= 0.0)) throw Error(ErrorKind::InvalidArgument, "g must be nonnegative");
    total += g[i] * std::abs(nu.weights[i]);
  }
  return total;
}

double one_sided_g_norm(const SignedMeasure& nu, const std::vector<double>& g) {
  if (g.size() != nu.weights.size() || nu.support.size() != nu.weights.size()) {
    throw Error(ErrorKind::DimensionMismatch, "g, support and weights must align");
  }
  double pos = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(g[i] >= 0.0)) throw Error(ErrorKind::InvalidArgument, "g must be nonnegative");
    (nu.weights[i] > 0.0 ? pos : neg) += g[i] * std::abs(nu.weights[i]);
  }
  return std::max(pos, neg);
}

double tv_norm(const SignedMeasure& nu) {
  double total = 0.0;
  for (double w : nu.weights) total += std::abs(w);
  return total;
}

std::vector<ConvergenceRow> convergence_profile_from(const FiniteChain& chain,
                                                     const Vec& initial, double r,
                                                     std::vector<std::int64_t> n_grid) {
  require_ergodic(chain);
  if (initial.size() != chain.P.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "initial distribution has wrong length");
  }
  std::sort(n_grid.begin(), n_grid.end());
  if (!n_grid.empty() && n_grid.front() < 0) {
    throw Error(ErrorKind::InvalidArgument, "profile times must be >= 0");
  }
  const Vec pi = stationary_distribution(chain);
  const auto n_states = static_cast<std::size_t>(chain.P.rows());
  SignedMeasure diff;
  diff.support.resize(n_states);
  std::iota(diff.support.begin(), diff.support.end(), 0);
  diff.weights.resize(n_states);
  std::vector<double> g(n_states);
  for (std::size_t i = 0; i < n_states; ++i) g[i] = std::pow(chain.V[i], r) + 1.0;

  std::vector<ConvergenceRow> rows;
  Eigen::RowVectorXd mu = initial.transpose();
  std::int64_t at = 0;
  for (std::int64_t n : n_grid) {
    while (at < n) {
      mu = mu * chain.P;
      ++at;
    }
    for (std::size_t i = 0; i < n_states; ++i) {
      diff.weights[i] = mu(static_cast<Eigen::Index>(i)) - pi(static_cast<Eigen::Index>(i));
    }
    rows.push_back({n, tv_norm(diff), g_norm(diff, g)});
  }
  return rows;
}

std::vector<ConvergenceRow> convergence_profile(const FiniteChain& chain, int x0, double r,
                                                std::vector<std::int64_t> n_grid) {
  if (x0 < 0 || x0 >= chain.P.rows()) {
    throw Error(ErrorKind::InvalidArgument, "initial state index out of range");
  }
  Vec initial = Vec::Zero(chain.P.rows());
  initial(x0) = 1.0;
  return convergence_profile_from(chain, initial, r, std::move(n_grid));
}

void write_profile_csv(const std::vector<ConvergenceRow>& rows, std::ostream& out) {
  out << "n,tv,weighted\n";
  for (const auto& row : rows) out << row.n << ',' << fmt(row.tv) << ',' << fmt(row.weighted) << '\n';
}

void write_chain_csv(const FiniteChain& chain, std::ostream& states_out,
                     std::ostream& matrix_out) {
  validate_chain(chain);
  const Eigen::Index d = chain.states.front().size();
  states_out << "index,V";
  for (Eigen::Index k = 0; k < d; ++k) states_out << ",x" << k;
  states_out << '\n';
  for (std::size_t i = 0; i < chain.states.size(); ++i) {
    states_out << i << ',' << fmt(chain.V[i]);
    for (Eigen::Index k = 0; k < d; ++k) states_out << ',' << fmt(chain.states[i](k));
    states_out << '\n';
  }
  for (Eigen::Index i = 0; i < chain.P.rows(); ++i) {
    for (Eigen::Index j = 0; j < chain.P.cols(); ++j) {
      if (j > 0) matrix_out << ',';
      matrix_out << fmt(chain.P(i, j));
    }
    matrix_out << '\n';
  }
}

FiniteChain read_chain_csv(std::istream& states_in, std::istream& matrix_in) {
  FiniteChain chain;
  std::string line;
  if (!std::getline(states_in, line)) {
    throw Error(ErrorKind::InvalidArgument, "states file is empty");
  }
  while (std::getline(states_in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() < 3) throw Error(ErrorKind::InvalidArgument, "states row too short");
    chain.V.push_back(cells[1]);
    Vec x(static_cast<Eigen::Index>(cells.size() - 2));
    for (std::size_t k = 2; k < cells.size(); ++k) x(static_cast<Eigen::Index>(k - 2)) = cells[k];
    chain.states.push_back(std::move(x));
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(matrix_in, line)) {
    if (!line.empty()) rows.push_back(split_csv(line));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  chain.P.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n) {
      throw Error(ErrorKind::DimensionMismatch, "matrix file is not square");
    }
    for (Eigen::Index j = 0; j < n; ++j) chain.P(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  validate_chain(chain);
  return chain;
}

Discretization discretize_multiplicative(const DiscretizationSpec& spec, unsigned workers) {
  if (spec.points_per_axis < 3) {
    throw Error(ErrorKind::InvalidArgument, "need at least 3 grid points per axis");
  }
  if (!(spec.radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "radius must be positive");
  if (spec.dim < 1 || spec.noise_dim < spec.dim) {
    throw Error(ErrorKind::DimensionMismatch, "need 1 <= dim <= noise_dim");
  }
  const int d = spec.dim;
  const int g = spec.points_per_axis;
  const int extra = spec.overflow_cells < 0 ? g : spec.overflow_cells;
  const int ext = g + 2 * extra;
  const double h = 2.0 * spec.radius / g;
  const double cell_volume = std::pow(h, d);

  std::int64_t n_states = 1;
  std::int64_t n_ext = 1;
  for (int k = 0; k < d; ++k) {
    n_states *= g;
    n_ext *= ext;
  }

  auto center = [&](std::int64_t axis_index) { return -spec.radius + (static_cast<double>(axis_index) + 0.5) * h; };

  Discretization out;
  out.cell_width = h;
  FiniteChain& chain = out.chain;
  chain.P = Mat::Zero(n_states, n_states);
  chain.states.resize(static_cast<std::size_t>(n_states));
  chain.V.resize(static_cast<std::size_t>(n_states));
  for (std::int64_t i = 0; i < n_states; ++i) {
    Vec x(d);
    std::int64_t rest = i;
    for (int k = d - 1; k >= 0; --k) {
      x(k) = center(rest % g);
      rest /= g;
    }
    chain.V[static_cast<std::size_t>(i)] = spec.lyapunov ? spec.lyapunov(x) : x.norm();
    chain.states[static_cast<std::size_t>(i)] = std::move(x);
  }

  std::vector<double> factors(static_cast<std::size_t>(n_states));
  parallel_for(n_states, workers, [&](std::int64_t i) {
    const Vec& x = chain.states[static_cast<std::size_t>(i)];
    const Mat Gx = spec.G(x);
    if (Gx.rows() != d || Gx.cols() != spec.noise_dim) {
      throw Error(ErrorKind::DimensionMismatch, "G(x) has the wrong shape");
    }
    if (numerical_rank(Gx) < d) {
      throw Error(ErrorKind::SingularDiffusion, "G G^T is singular at grid state " + std::to_string(i));
    }
    const Mat Ginv = right_pseudoinverse(Gx);
    const double coef = 1.0 / std::sqrt((Gx * Gx.transpose()).determinant());
    const Vec mean = spec.L(x) + spec.F(x);
    Vec y(d);
    double mass = 0.0;
    for (std::int64_t c = 0; c < n_ext; ++c) {
      std::int64_t rest = c;
      std::int64_t target = 0;
      std::int64_t stride = 1;
      for (int k = d - 1; k >= 0; --k) {
        const std::int64_t axis = rest % ext - extra;
        rest /= ext;
        y(k) = center(axis);
        target += std::clamp<std::int64_t>(axis, 0, g - 1) * stride;
        stride *= g;
      }
      const double w = coef * spec.density(Ginv * (y - mean)) * cell_volume;
      chain.P(i, target) += w;
      mass += w;
    }
    if (!(mass > 0.0)) {
      throw Error(ErrorKind::ExcessiveTruncation, "row " + std::to_string(i) + " captured no mass");
    }
    chain.P.row(i) /= mass;
    factors[static_cast<std::size_t>(i)] = 1.0 / mass;
  });

  out.max_renormalization = *std::max_element(factors.begin(), factors.end());
  out.min_renormalization = *std::min_element(factors.begin(), factors.end());
  if (out.max_renormalization > 1.05) {
    throw Error(ErrorKind::ExcessiveTruncation,
                "renormalization factor " + fmt(out.max_renormalization) + " exceeds 1.05");
  }
  return out;
}

std::vector<double> window_density(const Discretization& disc, double window) {
  const FiniteChain& chain = disc.chain;
  const double volume = std::pow(disc.cell_width, static_cast<double>(chain.states.front().size()));
  std::vector<double> out(chain.states.size(), 0.0);
  for (Eigen::Index i = 0; i < chain.P.rows(); ++i) {
    for (Eigen::Index j = 0; j < chain.P.cols(); ++j) {
      if (chain.states[static_cast<std::size_t>(j)].norm() <= window) {
        out[static_cast<std::size_t>(i)] = std::max(out[static_cast<std::size_t>(i)], chain.P(i, j) / volume);
      }
    }
  }
  return out;
}

ProcessModel continuum_model(const DiscretizationSpec& spec, const NoiseSpec& noise) {
  if (noise_dim(noise) != spec.noise_dim) {
    throw Error(ErrorKind::DimensionMismatch, "noise dimension differs from the diffusion");
  }
  ProcessModel m;
  m.name = "continuum";
  m.dim = spec.dim;
  m.step = [spec, noise](std::int64_t, const Vec& x, RngStream& rng) -> Vec {
    Vec next = spec.L(x) + spec.F(x);
    next += spec.G(x) * sample_noise(noise, rng);
    return next;
  };
  m.lyapunov = [](const Vec& x) { return x.norm(); };
  const double radius = spec.radius;
  m.in_region = [radius](const Vec& x) { return x.lpNorm<Eigen::Infinity>() <= radius; };
  return m;
}

DiscretizationSpec euler_maruyama_ou(double delta, double radius, int points_per_axis) {
  if (!(delta > 0.0 && delta < 2.0)) {
    throw Error(ErrorKind::InvalidArgument, "step must lie in (0, 2)");
  }
  DiscretizationSpec spec;
  spec.radius = radius;
  spec.points_per_axis = points_per_axis;
  spec.density = standard_normal_density;
  spec.L = [](const Vec& x) { return x; };
  spec.F = [delta](const Vec& x) -> Vec { return -delta * x; };
  const double scale = std::sqrt(delta);
  spec.G = [scale](const Vec&) -> Mat { return Mat::Constant(1, 1, scale); };
  return spec;
}

DiscretizationSpec cubic_drift(double c, double g_exponent, double radius, int points_per_axis) {
  if (!(c > 0.0)) throw Error(ErrorKind::InvalidArgument, "c must be positive");
  DiscretizationSpec spec;
  spec.radius = radius;
  spec.points_per_axis = points_per_axis;
  spec.density = standard_normal_density;
  spec.L = [](const Vec& x) { return x; };
  spec.F = [c](const Vec& x) -> Vec {
    return x.unaryExpr([c](double v) { return -c * v * v * v / (1.0 + v * v); });
  };
  spec.G = [g_exponent](const Vec& x) -> Mat {
    return Mat::Constant(1, 1, std::pow(1.0 + x.norm(), g_exponent));
  };
  return spec;
}

double standard_normal_density(const Vec& z) {
  const double k = static_cast<double>(z.size());
  return std::exp(-0.5 * z.squaredNorm()) / std::pow(2.0 * std::numbers::pi, k / 2.0);
}

double expectation(const FiniteChain& chain, const Vec& pi,
                   const std::function<double(const Vec&)>& f) {
  double total = 0.0;
  for (std::size_t i = 0; i < chain.states.size(); ++i) {
    total += pi(static_cast<Eigen::Index>(i)) * f(chain.states[i]);
  }
  return total;
}

}  // namespace driftlab
