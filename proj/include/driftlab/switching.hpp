#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "driftlab/linalg.hpp"
#include "driftlab/process.hpp"
#include "driftlab/rng.hpp"

namespace driftlab {

using Mode = int;

/// Discrete-time switching (hybrid) system on R^d x {0, ..., modes-1}.
///
/// Given (X_n, Y_n) = (x, y), the next mode is drawn from kernel(n, x, y)
/// and then
///
///   X_{n+1} = L(n, x, Y_{n+1}) + F(n, x, Y_{n+1}) + G(n, x, Y_{n+1}, xi_{n+1})
///
/// with xi_{n+1} a fresh draw from `noise` independent of the mode draw.
/// The declared exponents and constants describe the growth bounds the user
/// claims for L, F and G; validate_exponents() checks their compatibility.
struct SwitchingSystemSpec {
  std::string name;
  int dim = 1;
  int modes = 1;
  std::function<std::vector<double>(std::int64_t n, const Vec& x, Mode y)> kernel;
  std::function<Vec(std::int64_t n, const Vec& x, Mode y)> L;
  std::function<Vec(std::int64_t n, const Vec& x, Mode y)> F;
  std::function<Vec(std::int64_t n, const Vec& x, Mode y, const Vec& z)> G;
  NoiseSpec noise;
  /// Size function for the noise; Euclidean norm when empty.
  std::function<double(const Vec& z)> psi;

  double gamma = 0.0;  // drift exponent
  double f0 = 0.0;     // growth of F
  double f1 = 0.0;     // growth of the mode-centered F
  double l1 = 0.0;     // growth of the mode-centered L
  double g0 = 0.0;     // growth of G
  double m0 = 0.0;     // drift constant
  double B = 0.0;      // drift radius
  bool centered_G = false;
};

/// Throws KernelNotStochastic unless p has `modes` nonnegative entries summing
/// to 1 within 1e-12.
void check_kernel_row(const std::vector<double>& p, int modes);

/// Compatibility of the declared exponents: l1 and f1 below 1/2, g0 below
/// 1/2 (centered G) or min(gamma, 1/2), and f0 < (1 + gamma)/2 or equality
/// with mbar_F2 <= 2 m0. Returns an empty string when valid, else the first
/// violated condition. mbar_F2 is only consulted in the equality case; pass
/// NaN when unknown (equality then fails).
std::string exponent_violation(const SwitchingSystemSpec& spec, double mbar_F2);

struct SwitchingState {
  Vec x;
  Mode mode = 0;
};

/// One transition. A single-mode system consumes no randomness for the mode.
SwitchingState step_switching(const SwitchingSystemSpec& spec, std::int64_t n,
                              const SwitchingState& state, RngStream& rng);

/// The switching system as a ProcessModel on the augmented state (x, mode),
/// the mode stored as the last coordinate. V(x, y) = ||x|| and D is the ball
/// ||x|| <= B.
ProcessModel as_process_model(const SwitchingSystemSpec& spec);

struct SwitchDriftProbe {
  Vec x;
  std::int64_t time = 0;
  Mode mode = 0;  // current mode y
  double kernel_average = 0.0;  // sum_y' P(y, y') <F(x,y'), L(x,y')>
  double bound = 0.0;           // -m0 ||x||^{1+gamma}
  bool pass = false;
};

struct SwitchDriftReport {
  std::vector<SwitchDriftProbe> probes;
  bool pass = false;
};

/// Exact kernel average of <F, L> at every (state, time, mode) probe compared
/// with -m0 ||x||^{1+gamma}. A relative slack of 1e-12 absorbs rounding.
/// Throws InvalidArgument for a probe with ||x|| <= B.
SwitchDriftReport check_switch_drift(const SwitchingSystemSpec& spec,
                                     const std::vector<Vec>& states,
                                     const std::vector<std::int64_t>& times,
                                     const std::vector<Mode>& modes);

/// Coefficient families of the growth conditions.
enum class GrowthFamily { F, FBar, G, L1, L2, LBar };
std::string_view to_string(GrowthFamily family);

struct GrowthProbeGrid {
  std::vector<Vec> states;
  std::vector<std::int64_t> times{0};
  /// Number of noise draws used to probe G (seeded, see `seed`).
  int noise_draws = 16;
  std::uint64_t seed = 0;
};

/// Grid estimates of the averaged growth constants
/// mbar_{chi,p} = sup_{n,x,z} sum_y m_chi(y)^p P_{n,x}(z, y).
///
/// The per-mode coefficient m_chi(y) is the largest ratio implied at any
/// probe; both maxima run over the finite grid only, so every value is a
/// lower bound for the true supremum.
struct GrowthConstantReport {
  std::map<GrowthFamily, std::vector<double>> per_mode;  // m_chi(y)
  std::map<std::pair<GrowthFamily, double>, double> averaged;  // (chi, p) -> mbar
  std::vector<double> p_values;
  std::string grid_description;
  bool grid_lower_bound = true;
  /// mbar_{(L,1),2} <= 1.
  bool l1_second_moment_ok = false;

  double at(GrowthFamily family, double p) const;
};

GrowthConstantReport estimate_growth_constants(const SwitchingSystemSpec& spec,
                                               std::vector<double> p_values,
                                               const GrowthProbeGrid& grid);

/// Inputs of the boundary case g0 = gamma < 1/2 with a non-centered G.
struct BoundaryCaseInputs {
  double g0 = 0.0;
  double gamma = 0.0;
  double f0 = 0.0;
  double mbar_G2 = 0.0;     // averaged second moment constant of G
  double m_star_sq = 0.0;   // sup_n E Psi(xi_n)^2
  double m0 = 0.0;
  double mbar_F2 = 0.0;     // only used when f0 = (1 + gamma)/2
};

struct BoundaryCaseVerdict {
  bool pass = false;
  double lhs = 0.0;  // (mbar_G2 m*^2)^{1/2} (+ mbar_F2 / 2 in the equality case)
  bool f0_on_boundary = false;
};

/// Throws NotBoundaryCase when g0 != gamma.
BoundaryCaseVerdict boundary_case_check(const BoundaryCaseInputs& in);

/// Monte Carlo estimate of E Psi(xi)^p.
double estimate_noise_moment(const SwitchingSystemSpec& spec, double p, std::int64_t samples,
                             RngStream& rng);

/// Stored path of (time, mode, state).
std::vector<SwitchingState> simulate_switching_path(const SwitchingSystemSpec& spec,
                                                    const SwitchingState& initial,
                                                    std::int64_t horizon, RngStream& rng);

/// CSV with columns time, mode, x0, x1, ...
void write_trajectory_csv(const std::vector<SwitchingState>& path, std::ostream& out);

/// Rotation of the plane by `angle`.
Mat rotation2(double angle);

/// Parameters of the shipped planar demo.
struct RotSwitchParams {
  double angle0 = 0.5235987755982988;   // pi/6
  double angle1 = -0.7853981633974483;  // -pi/4
  double m0 = 0.5;
  double gamma = 0.5;
  double g0 = 0.25;
  double noise_scale = 1.0;
};

/// Planar hybrid system: mode y rotates by U_y, the next mode is 0 when the
/// first coordinate is nonnegative and 1 otherwise (state-dependent switching),
/// L(x, y) = U_y x, F(x, y) = -m0 U_y x / max(1, ||x||^{1-gamma}) and
/// G(x, y, z) = (1 + ||x||)^{g0} z with centered Gaussian z.
SwitchingSystemSpec rot_switch_demo(const RotSwitchParams& params = {});

}  // namespace driftlab
