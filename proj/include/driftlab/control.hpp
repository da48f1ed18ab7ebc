#pragma once

#include <cstdint>
#include <vector>

#include "driftlab/linalg.hpp"
#include "driftlab/process.hpp"
#include "driftlab/rng.hpp"

namespace driftlab {

/// X_{n+1} = A X_n + B u_n + xi_{n+1} with ||u_n|| <= u_max, A orthogonal and
/// (A, B) reachable in k steps.
struct ControlPlant {
  Mat A;
  Mat B;
  int k = 1;
  double u_max = 1.0;
  NoiseSpec noise;
};

/// Everything the k-periodic saturated policy needs.
///
/// The lifted control vector stacks the k physical controls of one block in
/// reverse time order, (u_{(n+1)k-1}, ..., u_{nk+1}, u_{nk}), matching the
/// columns [B, AB, ..., A^{k-1}B] of the reachability matrix. Physical
/// offset l = n mod k therefore reads block k - l (1-based), i.e. rows
/// [(k-1-l) m, (k-l) m).
struct PolicyArtifacts {
  int state_dim = 0;
  int input_dim = 0;
  int k = 1;
  double u_max = 0.0;
  Mat reachability;  // R_k, d x km
  Mat right_inverse; // R_k^-, km x d
  Mat gain;          // R_k^- A^k
  Mat A_power_k;     // A^k
  double saturation_radius = 0.0;  // u_max / ||gain||
  double gain_norm = 0.0;

  /// First row of the lifted vector holding the control for offset l.
  int block_row(int offset) const { return (k - 1 - offset) * input_dim; }
};

/// Checks shapes, ||A^T A - I||_max <= 1e-10 (NotOrthogonal) and
/// rank(R_k) = d (NotReachable).
void validate_plant(const ControlPlant& plant);

/// R_k = [B, AB, ..., A^{k-1}B].
Mat reachability_matrix(const Mat& A, const Mat& B, int k);

PolicyArtifacts build_policy(const ControlPlant& plant);

/// Radial projection onto the closed ball of radius cap.
Vec sat(const Vec& y, double cap);

/// u_n from the anchor state X_{floor(n/k) k}: the offset-(n mod k) block of
/// -gain * sat(anchor, saturation_radius). ||u_n|| <= u_max.
Vec control_input(const PolicyArtifacts& policy, std::int64_t n, const Vec& anchor);

/// Closed loop as a ProcessModel on the augmented state (x, anchor) of
/// dimension 2d. The anchor is refreshed from x whenever n mod k == 0.
/// V = ||x||, D = {||x|| <= saturation_radius}. With `open_loop` set the
/// control is identically zero.
ProcessModel closed_loop_model(const ControlPlant& plant, const PolicyArtifacts& policy,
                               bool open_loop = false);

/// The k-step subsampled chain X_{nk} under the policy, on R^d.
ProcessModel lifted_model(const ControlPlant& plant, const PolicyArtifacts& policy);

/// Augmented initial state (x0, x0) for closed_loop_model.
Vec closed_loop_initial(const Vec& x0);

/// E||X_n||^r, n = 0..horizon, for each r in r_values.
EnsembleMomentReport simulate_controlled(const ControlPlant& plant,
                                         const PolicyArtifacts& policy, const Vec& x0,
                                         std::int64_t horizon, std::int64_t trajectories,
                                         std::vector<double> r_values, std::uint64_t seed,
                                         unsigned workers = 0, bool open_loop = false);

/// c_0 = c0 and c_l = 3^{r-1} (||A||^r c_{l-1} + ||gain||^r u_max^r + m_star_r),
/// l = 1..k-1, operator norms throughout. m_star_r is the r-th noise moment
/// m_*^r itself.
std::vector<double> moment_bound_constants(const ControlPlant& plant,
                                           const PolicyArtifacts& policy, double r, double c0,
                                           double m_star_r);

/// Orthogonal rotation plant in the plane with B = e1, reachable in 2 steps.
ControlPlant rotation_plant(double u_max, double noise_variance, int k = 2);

}  // namespace driftlab
