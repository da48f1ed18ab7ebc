#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "driftlab/linalg.hpp"
#include "driftlab/process.hpp"
#include "driftlab/rng.hpp"

namespace driftlab {

/// Markov chain on finitely many enumerated states. Row i of P is the law of
/// the next state from state i; V holds the target function per state.
struct FiniteChain {
  std::vector<Vec> states;
  Mat P;
  std::vector<double> V;

  int size() const { return static_cast<int>(P.rows()); }
};

/// Square P with nonnegative entries and rows summing to 1 within 1e-12,
/// one state and one nonnegative V value per row. Throws InvalidArgument or
/// DimensionMismatch.
void validate_chain(const FiniteChain& chain);

/// Strong connectivity of the graph of positive entries.
bool is_irreducible(const Mat& P);

/// Period of an irreducible chain: gcd of cycle lengths in the positive-entry
/// graph, computed from breadth-first levels.
int chain_period(const Mat& P);

/// Unique solution of pi P = pi, sum pi = 1. Throws Reducible when the chain
/// is not irreducible.
Vec stationary_distribution(const FiniteChain& chain);

/// Finitely supported signed measure; support indices must be distinct.
struct SignedMeasure {
  std::vector<int> support;
  std::vector<double> weights;
};

/// sup over |f| <= g of |nu(f)| = sum_i g_i |nu_i|. g is aligned with the
/// support. Throws DimensionMismatch, InvalidArgument for negative g.
double g_norm(const SignedMeasure& nu, const std::vector<double>& g);

/// sup over 0 <= f <= g of |nu(f)| = max(nu+(g), nu-(g)).
double one_sided_g_norm(const SignedMeasure& nu, const std::vector<double>& g);

/// |nu|(S) = sum |nu_i|.
double tv_norm(const SignedMeasure& nu);

struct ConvergenceRow {
  std::int64_t n = 0;
  double tv = 0.0;        // ||mu P^n - pi||_TV
  double weighted = 0.0;  // ||mu P^n - pi||_g with g = V^r + 1
};

/// Distances of P^n(x0, .) from pi at each n of the grid. Throws Reducible or
/// Periodic when the chain is not ergodic.
std::vector<ConvergenceRow> convergence_profile(const FiniteChain& chain, int x0, double r,
                                                std::vector<std::int64_t> n_grid);

/// Same profile from an arbitrary initial distribution.
std::vector<ConvergenceRow> convergence_profile_from(const FiniteChain& chain,
                                                     const Vec& initial, double r,
                                                     std::vector<std::int64_t> n_grid);

/// CSV with columns n, tv, weighted.
void write_profile_csv(const std::vector<ConvergenceRow>& rows, std::ostream& out);

/// Chain export: a states file (index, V, x0, x1, ...) and a dense matrix file
/// (one row of P per line).
void write_chain_csv(const FiniteChain& chain, std::ostream& states_out,
                     std::ostream& matrix_out);
FiniteChain read_chain_csv(std::istream& states_in, std::istream& matrix_in);

/// Grid surrogate of X_{n+1} = L(X_n) + F(X_n) + G(X_n) xi_{n+1} on the box
/// [-R, R]^d split into points_per_axis cells per axis.
///
/// Row i integrates the transition density
///   q(x, y) = det(G G^T)^{-1/2} rho(G^-(y - L(x) - F(x)))
/// over each cell by the midpoint rule, G^- the right pseudoinverse. The
/// density is also integrated over `overflow_cells` extra cells on each side
/// and that mass is assigned to the nearest boundary cell. Rows are then
/// renormalized; the factor must not exceed 1.05.
struct DiscretizationSpec {
  int dim = 1;
  int noise_dim = 1;
  double radius = 1.0;
  int points_per_axis = 3;
  int overflow_cells = -1;  // -1: same as points_per_axis
  std::function<double(const Vec& z)> density;
  std::function<Vec(const Vec& x)> L;
  std::function<Vec(const Vec& x)> F;
  std::function<Mat(const Vec& x)> G;
  /// V on grid states; Euclidean norm when empty.
  std::function<double(const Vec& x)> lyapunov;
};

struct Discretization {
  FiniteChain chain;
  double cell_width = 0.0;
  double max_renormalization = 1.0;
  double min_renormalization = 1.0;
};

/// Throws SingularDiffusion when G(x) G(x)^T is singular at a grid point and
/// ExcessiveTruncation when a row renormalization factor exceeds 1.05.
Discretization discretize_multiplicative(const DiscretizationSpec& spec, unsigned workers = 0);

/// Largest transition density P_ij / h^d over target cells with ||y_j|| <= window,
/// for each row i. Grid analogue of a local density bound.
std::vector<double> window_density(const Discretization& disc, double window);

/// The undiscretized chain x -> L(x) + F(x) + G(x) xi with xi drawn from
/// `noise`, V = ||x|| and D = the discretization box.
ProcessModel continuum_model(const DiscretizationSpec& spec, const NoiseSpec& noise);

/// Euler-Maruyama step of dX = -X dt + dW with step delta:
/// L(x) = x, F(x) = -delta x, G = sqrt(delta), standard Gaussian noise.
DiscretizationSpec euler_maruyama_ou(double delta, double radius, int points_per_axis);

/// L(x) = x, F(x) = -c x^3 / (1 + x^2), G(x) = (1 + |x|)^g_exponent,
/// standard Gaussian noise.
DiscretizationSpec cubic_drift(double c, double g_exponent, double radius, int points_per_axis);

/// Standard normal density on R^k.
double standard_normal_density(const Vec& z);

/// sum_i pi_i f(x_i).
double expectation(const FiniteChain& chain, const Vec& pi,
                   const std::function<double(const Vec&)>& f);

}  // namespace driftlab
