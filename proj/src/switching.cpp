#include "driftlab/switching.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "driftlab/errors.hpp"

namespace driftlab {

namespace {

double psi_of(const SwitchingSystemSpec& spec, const Vec& z) {
  return spec.psi ? spec.psi(z) : z.norm();
}

std::vector<double> kernel_row(const SwitchingSystemSpec& spec, std::int64_t n, const Vec& x,
                               Mode y) {
  std::vector<double> row = spec.kernel ? spec.kernel(n, x, y) : std::vector<double>{1.0};
  check_kernel_row(row, spec.modes);
  return row;
}

Vec transition_mean_free(const SwitchingSystemSpec& spec, std::int64_t n, const Vec& x, Mode y,
                         const Vec& z) {
  Vec next = spec.L(n, x, y);
  next += spec.F(n, x, y);
  next += spec.G(n, x, y, z);
  return next;
}

// Mode-centered family value at next mode yp given current mode z.
Vec centered(const std::function<Vec(std::int64_t, const Vec&, Mode)>& chi, std::int64_t n,
             const Vec& x, const std::vector<double>& row, Mode yp) {
  const Vec at = chi(n, x, yp);
  Vec out = Vec::Zero(at.size());
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (row[k] == 0.0) continue;
    out += row[k] * (at - chi(n, x, static_cast<Mode>(k)));
  }
  return out;
}

}  // namespace

void check_kernel_row(const std::vector<double>& p, int modes) {
  if (static_cast<int>(p.size()) != modes) {
    throw Error(ErrorKind::KernelNotStochastic, "kernel row has " + std::to_string(p.size()) +
                                                    " entries for " + std::to_string(modes) +
                                                    " modes");
  }
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw Error(ErrorKind::KernelNotStochastic, "negative kernel entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw Error(ErrorKind::KernelNotStochastic, "kernel row sums to " + std::to_string(sum));
  }
}

std::string exponent_violation(const SwitchingSystemSpec& spec, double mbar_F2) {
  if (spec.gamma < 0.0) return "gamma must be >= 0";
  if (!(std::max(spec.l1, spec.f1) < 0.5)) return "l1 and f1 must be < 1/2";
  const double g_cap = spec.centered_G ? 0.5 : std::min(spec.gamma, 0.5);
  if (!(spec.g0 < g_cap)) {
    return spec.centered_G ? "g0 must be < 1/2" : "g0 must be < min(gamma, 1/2)";
  }
  const double half = (1.0 + spec.gamma) / 2.0;
  if (spec.f0 < half) return {};
  if (std::abs(spec.f0 - half) <= 1e-12 && mbar_F2 <= 2.0 * spec.m0) return {};
  return "f0 must be < (1+gamma)/2, or equal with mbar_F2 <= 2 m0";
}

SwitchingState step_switching(const SwitchingSystemSpec& spec, std::int64_t n,
                              const SwitchingState& state, RngStream& rng) {
  if (state.mode < 0 || state.mode >= spec.modes) {
    throw Error(ErrorKind::InvalidArgument, "mode " + std::to_string(state.mode) +
                                                " outside mode space");
  }
  Mode next_mode = 0;
  if (spec.modes > 1) {
    const std::vector<double> row = kernel_row(spec, n, state.x, state.mode);
    const double u = rng.uniform();
    double cumulative = 0.0;
    next_mode = spec.modes - 1;
    for (int k = 0; k < spec.modes; ++k) {
      cumulative += row[static_cast<std::size_t>(k)];
      if (u < cumulative) {
        next_mode = k;
        break;
      }
    }
    // A zero-probability tail mode must never be chosen through rounding.
    while (row[static_cast<std::size_t>(next_mode)] == 0.0 && next_mode > 0) --next_mode;
  }
  const Vec z = sample_noise(spec.noise, rng);
  return {transition_mean_free(spec, n, state.x, next_mode, z), next_mode};
}

ProcessModel as_process_model(const SwitchingSystemSpec& spec) {
  ProcessModel m;
  m.name = spec.name;
  m.dim = spec.dim + 1;
  const int d = spec.dim;
  m.step = [spec, d](std::int64_t n, const Vec& s, RngStream& rng) -> Vec {
    const SwitchingState next =
        step_switching(spec, n, {s.head(d), static_cast<Mode>(s(d))}, rng);
    Vec out(d + 1);
    out.head(d) = next.x;
    out(d) = next.mode;
    return out;
  };
  m.lyapunov = [d](const Vec& s) { return s.head(d).norm(); };
  const double radius = spec.B;
  m.in_region = [d, radius](const Vec& s) { return s.head(d).norm() <= radius; };
  return m;
}

SwitchDriftReport check_switch_drift(const SwitchingSystemSpec& spec,
                                     const std::vector<Vec>& states,
                                     const std::vector<std::int64_t>& times,
                                     const std::vector<Mode>& modes) {
  SwitchDriftReport report;
  report.pass = true;
  for (const Vec& x : states) {
    const double norm = x.norm();
    if (!(norm > spec.B)) {
      throw Error(ErrorKind::InvalidArgument, "drift probe inside the ball of radius B");
    }
    for (std::int64_t n : times) {
      for (Mode y : modes) {
        const std::vector<double> row = kernel_row(spec, n, x, y);
        double avg = 0.0;
        for (int k = 0; k < spec.modes; ++k) {
          const double w = row[static_cast<std::size_t>(k)];
          if (w == 0.0) continue;
          avg += w * spec.F(n, x, k).dot(spec.L(n, x, k));
        }
        SwitchDriftProbe probe;
        probe.x = x;
        probe.time = n;
        probe.mode = y;
        probe.kernel_average = avg;
        probe.bound = -spec.m0 * std::pow(norm, 1.0 + spec.gamma);
        probe.pass = avg <= probe.bound + 1e-12 * std::abs(probe.bound);
        report.pass = report.pass && probe.pass;
        report.probes.push_back(std::move(probe));
      }
    }
  }
  return report;
}

std::string_view to_string(GrowthFamily family) {
  switch (family) {
    case GrowthFamily::F: return "F";
    case GrowthFamily::FBar: return "F_bar";
    case GrowthFamily::G: return "G";
    case GrowthFamily::L1: return "L_1";
    case GrowthFamily::L2: return "L_2";
    case GrowthFamily::LBar: return "L_bar";
  }
  return "?";
}

double GrowthConstantReport::at(GrowthFamily family, double p) const {
  const auto it = averaged.find({family, p});
  if (it == averaged.end()) {
    throw Error(ErrorKind::InvalidArgument, "no growth constant for requested (family, p)");
  }
  return it->second;
}

GrowthConstantReport estimate_growth_constants(const SwitchingSystemSpec& spec,
                                               std::vector<double> p_values,
                                               const GrowthProbeGrid& grid) {
  if (grid.states.empty() || grid.times.empty()) {
    throw Error(ErrorKind::InvalidArgument, "growth probe grid is empty");
  }
  std::sort(p_values.begin(), p_values.end());
  const auto modes = static_cast<std::size_t>(spec.modes);

  std::vector<Vec> noise_probes;
  RngStream rng(grid.seed, 0x67726f77ULL);
  for (int i = 0; i < grid.noise_draws; ++i) {
    Vec z = sample_noise(spec.noise, rng);
    if (psi_of(spec, z) > 0.0) noise_probes.push_back(std::move(z));
  }

  GrowthConstantReport report;
  report.p_values = p_values;
  for (auto family : {GrowthFamily::F, GrowthFamily::G, GrowthFamily::L1, GrowthFamily::L2,
                      GrowthFamily::FBar, GrowthFamily::LBar}) {
    report.per_mode[family] = std::vector<double>(modes, 0.0);
  }

  // Per-mode coefficients of the uncentered families.
  for (std::int64_t n : grid.times) {
    for (std::size_t y = 0; y < modes; ++y) {
      const Mode mode = static_cast<Mode>(y);
      const double l2 = spec.L(n, Vec::Zero(spec.dim), mode).norm();
      auto& ml2 = report.per_mode[GrowthFamily::L2][y];
      ml2 = std::max(ml2, l2);
    }
  }
  for (std::int64_t n : grid.times) {
    for (const Vec& x : grid.states) {
      const double nx = x.norm();
      for (std::size_t y = 0; y < modes; ++y) {
        const Mode mode = static_cast<Mode>(y);
        auto& mf = report.per_mode[GrowthFamily::F][y];
        mf = std::max(mf, spec.F(n, x, mode).norm() / std::pow(1.0 + nx, spec.f0));
        auto& mg = report.per_mode[GrowthFamily::G][y];
        for (const Vec& z : noise_probes) {
          mg = std::max(mg, spec.G(n, x, mode, z).norm() /
                                (std::pow(1.0 + nx, spec.g0) * psi_of(spec, z)));
        }
        if (nx > 0.0) {
          auto& ml1 = report.per_mode[GrowthFamily::L1][y];
          const double excess = spec.L(n, x, mode).norm() - report.per_mode[GrowthFamily::L2][y];
          ml1 = std::max(ml1, std::max(0.0, excess) / nx);
        }
      }
    }
  }

  for (double p : p_values) {
    for (auto family : {GrowthFamily::F, GrowthFamily::G, GrowthFamily::L1, GrowthFamily::L2,
                        GrowthFamily::FBar, GrowthFamily::LBar}) {
      report.averaged[{family, p}] = 0.0;
    }
  }

  // Kernel averages; centered families are averaged pointwise in x.
  for (std::int64_t n : grid.times) {
    for (const Vec& x : grid.states) {
      const double nx = x.norm();
      for (std::size_t z = 0; z < modes; ++z) {
        const std::vector<double> row = kernel_row(spec, n, x, static_cast<Mode>(z));
        std::vector<double> fbar(modes, 0.0), lbar(modes, 0.0);
        for (std::size_t yp = 0; yp < modes; ++yp) {
          if (row[yp] == 0.0) continue;
          fbar[yp] = centered(spec.F, n, x, row, static_cast<Mode>(yp)).norm() /
                     std::pow(1.0 + nx, spec.f1);
          lbar[yp] = centered(spec.L, n, x, row, static_cast<Mode>(yp)).norm() /
                     std::pow(1.0 + nx, spec.l1);
          auto& pf = report.per_mode[GrowthFamily::FBar][yp];
          pf = std::max(pf, fbar[yp]);
          auto& pl = report.per_mode[GrowthFamily::LBar][yp];
          pl = std::max(pl, lbar[yp]);
        }
        for (double p : p_values) {
          auto average = [&](const std::vector<double>& coeff) {
            double acc = 0.0;
            for (std::size_t yp = 0; yp < modes; ++yp) {
              if (row[yp] != 0.0) acc += row[yp] * std::pow(coeff[yp], p);
            }
            return acc;
          };
          for (auto family :
               {GrowthFamily::F, GrowthFamily::G, GrowthFamily::L1, GrowthFamily::L2}) {
            auto& slot = report.averaged[{family, p}];
            slot = std::max(slot, average(report.per_mode[family]));
          }
          auto& sf = report.averaged[{GrowthFamily::FBar, p}];
          sf = std::max(sf, average(fbar));
          auto& sl = report.averaged[{GrowthFamily::LBar, p}];
          sl = std::max(sl, average(lbar));
        }
      }
    }
  }

  const auto l12 = report.averaged.find({GrowthFamily::L1, 2.0});
  if (l12 != report.averaged.end()) {
    report.l1_second_moment_ok = l12->second <= 1.0 + 1e-12;
  } else {
    double acc = 0.0;
    for (double c : report.per_mode[GrowthFamily::L1]) acc = std::max(acc, c * c);
    report.l1_second_moment_ok = acc <= 1.0 + 1e-12;
  }

  std::ostringstream desc;
  desc << grid.states.size() << " states x " << grid.times.size() << " times x "
       << noise_probes.size() << " noise draws (grid maximum, lower bound for the supremum)";
  report.grid_description = desc.str();
  return report;
}

BoundaryCaseVerdict boundary_case_check(const BoundaryCaseInputs& in) {
  if (in.g0 != in.gamma) {
    throw Error(ErrorKind::NotBoundaryCase, "boundary case needs g0 == gamma");
  }
  BoundaryCaseVerdict v;
  v.lhs = std::sqrt(in.mbar_G2 * in.m_star_sq);
  v.f0_on_boundary = std::abs(in.f0 - (1.0 + in.gamma) / 2.0) <= 1e-12;
  if (v.f0_on_boundary) v.lhs += in.mbar_F2 / 2.0;
  v.pass = v.lhs < in.m0;
  return v;
}

double estimate_noise_moment(const SwitchingSystemSpec& spec, double p, std::int64_t samples,
                             RngStream& rng) {
  if (samples < 1) throw Error(ErrorKind::InvalidArgument, "need at least one noise sample");
  long double acc = 0.0L;
  for (std::int64_t i = 0; i < samples; ++i) {
    acc += std::pow(psi_of(spec, sample_noise(spec.noise, rng)), p);
  }
  return static_cast<double>(acc / static_cast<long double>(samples));
}

std::vector<SwitchingState> simulate_switching_path(const SwitchingSystemSpec& spec,
                                                    const SwitchingState& initial,
                                                    std::int64_t horizon, RngStream& rng) {
  std::vector<SwitchingState> path;
  path.reserve(static_cast<std::size_t>(horizon + 1));
  path.push_back(initial);
  for (std::int64_t n = 0; n < horizon; ++n) {
    path.push_back(step_switching(spec, n, path.back(), rng));
    if (!path.back().x.allFinite()) {
      throw NonFiniteStateError(n + 1, 0, "non-finite switching state at time " +
                                              std::to_string(n + 1));
    }
  }
  return path;
}

void write_trajectory_csv(const std::vector<SwitchingState>& path, std::ostream& out) {
  const Eigen::Index d = path.empty() ? 0 : path.front().x.size();
  out << "time,mode";
  for (Eigen::Index k = 0; k < d; ++k) out << ",x" << k;
  out << '\n';
  char buf[32];
  for (std::size_t n = 0; n < path.size(); ++n) {
    out << n << ',' << path[n].mode;
    for (Eigen::Index k = 0; k < d; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", path[n].x(k));
      out << ',' << buf;
    }
    out << '\n';
  }
}

Mat rotation2(double angle) {
  Mat u(2, 2);
  u << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return u;
}

SwitchingSystemSpec rot_switch_demo(const RotSwitchParams& params) {
  SwitchingSystemSpec spec;
  spec.name = "rot-switch";
  spec.dim = 2;
  spec.modes = 2;
  const std::vector<Mat> rotations{rotation2(params.angle0), rotation2(params.angle1)};
  spec.kernel = [](std::int64_t, const Vec& x, Mode) -> std::vector<double> {
    return x(0) >= 0.0 ? std::vector<double>{1.0, 0.0} : std::vector<double>{0.0, 1.0};
  };
  spec.L = [rotations](std::int64_t, const Vec& x, Mode y) -> Vec {
    return rotations[static_cast<std::size_t>(y)] * x;
  };
  const double m0 = params.m0;
  const double gamma = params.gamma;
  spec.F = [rotations, m0, gamma](std::int64_t, const Vec& x, Mode y) -> Vec {
    const double scale = std::max(1.0, std::pow(x.norm(), 1.0 - gamma));
    return (-m0 / scale) * (rotations[static_cast<std::size_t>(y)] * x);
  };
  const double g0 = params.g0;
  spec.G = [g0](std::int64_t, const Vec& x, Mode, const Vec& z) -> Vec {
    return std::pow(1.0 + x.norm(), g0) * z;
  };
  spec.noise = gaussian_noise(2, 0.0, params.noise_scale);
  spec.gamma = gamma;
  spec.f0 = gamma;
  spec.f1 = 0.0;
  spec.l1 = 0.0;
  spec.g0 = g0;
  spec.m0 = m0;
  spec.B = 1.0;
  spec.centered_G = true;
  return spec;
}

}  // namespace driftlab
