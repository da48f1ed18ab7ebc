#include "driftlab/control.hpp"

#include <cmath>
#include <string>

#include "driftlab/errors.hpp"

namespace driftlab {

Mat reachability_matrix(const Mat& A, const Mat& B, int k) {
  const Eigen::Index d = A.rows();
  const Eigen::Index m = B.cols();
  Mat R(d, m * k);
  Mat block = B;
  for (int j = 0; j < k; ++j) {
    R.middleCols(j * m, m) = block;
    block = A * block;
  }
  return R;
}

void validate_plant(const ControlPlant& plant) {
  const Eigen::Index d = plant.A.rows();
  if (d < 1 || plant.A.cols() != d) {
    throw Error(ErrorKind::DimensionMismatch, "A must be square and nonempty");
  }
  if (plant.B.rows() != d || plant.B.cols() < 1) {
    throw Error(ErrorKind::DimensionMismatch, "B must have as many rows as A");
  }
  if (plant.k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  if (!(plant.u_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "u_max must be positive");
  validate_noise(plant.noise);
  if (noise_dim(plant.noise) != d) {
    throw Error(ErrorKind::DimensionMismatch, "noise dimension differs from the state");
  }
  const double err = max_abs(plant.A.transpose() * plant.A - Mat::Identity(d, d));
  if (err > 1e-10) {
    throw Error(ErrorKind::NotOrthogonal, "||A^T A - I|| = " + std::to_string(err));
  }
  const int rank = numerical_rank(reachability_matrix(plant.A, plant.B, plant.k));
  if (rank < d) {
    throw Error(ErrorKind::NotReachable, "rank(R_" + std::to_string(plant.k) + ") = " +
                                             std::to_string(rank) + " < " + std::to_string(d));
  }
}

PolicyArtifacts build_policy(const ControlPlant& plant) {
  validate_plant(plant);
  PolicyArtifacts policy;
  policy.state_dim = static_cast<int>(plant.A.rows());
  policy.input_dim = static_cast<int>(plant.B.cols());
  policy.k = plant.k;
  policy.u_max = plant.u_max;
  policy.reachability = reachability_matrix(plant.A, plant.B, plant.k);
  policy.right_inverse = right_pseudoinverse(policy.reachability);
  Mat power = Mat::Identity(plant.A.rows(), plant.A.cols());
  for (int j = 0; j < plant.k; ++j) power = plant.A * power;
  policy.A_power_k = power;
  policy.gain = policy.right_inverse * power;
  policy.gain_norm = operator_norm(policy.gain);
  policy.saturation_radius = plant.u_max / policy.gain_norm;
  return policy;
}

Vec sat(const Vec& y, double cap) {
  const double norm = y.norm();
  if (norm <= cap) return y;
  return (cap / norm) * y;
}

Vec control_input(const PolicyArtifacts& policy, std::int64_t n, const Vec& anchor) {
  const int offset = static_cast<int>(n % policy.k);
  const Vec lifted = -(policy.gain * sat(anchor, policy.saturation_radius));
  Vec u = lifted.segment(policy.block_row(offset), policy.input_dim);
  // The block norm is bounded by the lifted norm, which is at most
  // ||gain|| * saturation_radius = u_max up to rounding.
  const double norm = u.norm();
  if (norm > policy.u_max) u *= policy.u_max / norm;
  return u;
}

Vec closed_loop_initial(const Vec& x0) {
  Vec s(2 * x0.size());
  s << x0, x0;
  return s;
}

ProcessModel closed_loop_model(const ControlPlant& plant, const PolicyArtifacts& policy,
                               bool open_loop) {
  ProcessModel m;
  m.name = open_loop ? "open-loop" : "closed-loop";
  const int d = policy.state_dim;
  m.dim = 2 * d;
  m.step = [plant, policy, d, open_loop](std::int64_t n, const Vec& s, RngStream& rng) -> Vec {
    const Vec x = s.head(d);
    const Vec anchor = (n % policy.k == 0) ? x : Vec(s.tail(d));
    Vec next(2 * d);
    Vec xn = plant.A * x;
    if (!open_loop) xn += plant.B * control_input(policy, n, anchor);
    xn += sample_noise(plant.noise, rng);
    next << xn, anchor;
    return next;
  };
  m.lyapunov = [d](const Vec& s) { return s.head(d).norm(); };
  const double radius = policy.saturation_radius;
  m.in_region = [d, radius](const Vec& s) { return s.head(d).norm() <= radius; };
  return m;
}

ProcessModel lifted_model(const ControlPlant& plant, const PolicyArtifacts& policy) {
  ProcessModel m;
  m.name = "lifted";
  m.dim = policy.state_dim;
  m.step = [plant, policy](std::int64_t block, const Vec& x, RngStream& rng) -> Vec {
    Vec state = x;
    for (int l = 0; l < policy.k; ++l) {
      const std::int64_t n = block * policy.k + l;
      state = plant.A * state + plant.B * control_input(policy, n, x) +
              sample_noise(plant.noise, rng);
    }
    return state;
  };
  m.lyapunov = [](const Vec& x) { return x.norm(); };
  const double radius = policy.saturation_radius;
  m.in_region = [radius](const Vec& x) { return x.norm() <= radius; };
  return m;
}

EnsembleMomentReport simulate_controlled(const ControlPlant& plant,
                                         const PolicyArtifacts& policy, const Vec& x0,
                                         std::int64_t horizon, std::int64_t trajectories,
                                         std::vector<double> r_values, std::uint64_t seed,
                                         unsigned workers, bool open_loop) {
  if (x0.size() != policy.state_dim) {
    throw Error(ErrorKind::DimensionMismatch, "initial state dimension differs from plant");
  }
  EnsembleOptions options;
  options.horizon = horizon;
  options.trajectories = trajectories;
  options.base_seed = seed;
  options.r_values = std::move(r_values);
  options.workers = workers;
  return simulate_ensemble(closed_loop_model(plant, policy, open_loop), closed_loop_initial(x0),
                           options);
}

std::vector<double> moment_bound_constants(const ControlPlant& plant,
                                           const PolicyArtifacts& policy, double r, double c0,
                                           double m_star_r) {
  if (!(c0 > 0.0)) throw Error(ErrorKind::InvalidArgument, "c0 must be positive");
  if (!(m_star_r >= 0.0)) throw Error(ErrorKind::InvalidArgument, "m_star_r must be >= 0");
  const double a_norm = std::pow(operator_norm(plant.A), r);
  const double control_term = std::pow(policy.gain_norm, r) * std::pow(plant.u_max, r);
  const double factor = std::pow(3.0, r - 1.0);
  std::vector<double> c{c0};
  for (int l = 1; l < policy.k; ++l) {
    c.push_back(factor * (a_norm * c.back() + control_term + m_star_r));
  }
  return c;
}

ControlPlant rotation_plant(double u_max, double noise_variance, int k) {
  ControlPlant plant;
  plant.A = Mat(2, 2);
  plant.A << 0.0, 1.0, -1.0, 0.0;
  plant.B = Mat(2, 1);
  plant.B << 1.0, 0.0;
  plant.k = k;
  plant.u_max = u_max;
  plant.noise = gaussian_noise(2, 0.0, noise_variance);
  return plant;
}

}  // namespace driftlab
