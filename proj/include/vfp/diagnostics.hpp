#pragma once

// Functionals evaluated on states and trajectories: energy and dissipation,
// conservation integrals, moment-system residuals, the higher-order Lyapunov
// monitor and the energy-inequality monitor.

#include "vfp/dynamics.hpp"
#include "vfp/fit.hpp"
#include "vfp/hermite.hpp"
#include "vfp/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace vfp {

struct EnergyReport {
  double t = 0.0;
  double energy = 0.0;       // ||(rho, u)||_{H^s}^2 + ||f||_{H^s_{x,v}}^2
  double dissipation = 0.0;  // sum of the four dissipation components
  double b_minus_u = 0.0;    // ||b - u||_{H^s}^2
  double grad_macro = 0.0;   // ||grad (rho, a, b)||_{H^{s-1}}^2
  double micro_nu_x = 0.0;   // sum_{|alpha| <= s} ||{I-P} d^alpha f||_nu^2
  double micro_nu_xv = 0.0;  // sum_{1 <= |beta|, |alpha| + |beta| <= s} ||d^alpha_beta {I-P} f||_nu^2
  double mass_fluid = 0.0;       // int rho_pert
  double mass_particles = 0.0;   // int a
  std::array<double, 3> momentum_total{};  // int b + (1 + rho_pert) u
  double micro_l2 = 0.0;         // ||{I-P} f||_{L^2}
  double bu_gap_l2 = 0.0;        // ||b - u||_{L^2}

  static const std::vector<std::string>& columns() {
    static const std::vector<std::string> c{"t",          "energy",        "dissipation",    "b_minus_u",
                                            "grad_macro", "micro_nu_x",    "micro_nu_xv",    "mass_fluid",
                                            "mass_particles", "momentum_x", "momentum_y",    "momentum_z",
                                            "micro_l2",   "bu_gap_l2"};
    return c;
  }
  std::vector<double> values() const {
    return {t,          energy,         dissipation,       b_minus_u,         grad_macro,
            micro_nu_x, micro_nu_xv,    mass_fluid,        mass_particles,    momentum_total[0],
            momentum_total[1], momentum_total[2], micro_l2, bu_gap_l2};
  }
};

namespace detail {

inline double sobolev_diff_weight(const Fourier& F, std::size_t m, int lo, int hi) {
  const int d = F.grid().dim;
  return sobolev_weight(F.wavevector(m), d, hi) - (lo > 0 ? sobolev_weight(F.wavevector(m), d, lo - 1) : 0.0);
}

}  // namespace detail

inline EnergyReport energy_report(const Fourier& F, const PerturbationState& s, int order, double t = 0.0) {
  check_sobolev_order(order);
  if (!(s.grid() == F.grid())) throw InvalidArgument("state does not match the transform grid");
  const auto& spec = s.spec();
  const int d = s.grid().dim;
  const auto& g = s.grid();
  EnergyReport r;
  r.t = t;

  const auto rho_hat = F.forward(s.rho.values);
  std::vector<std::vector<Complex>> u_hat;
  for (const auto& c : s.u.components) u_hat.push_back(F.forward(c));
  const auto f_hat = forward_kinetic(F, s.f);

  auto hs = [&](std::span<const Complex> x, int lo, int hi) {
    return weighted_spectral_sum(F, x, [&](std::size_t m) { return detail::sobolev_diff_weight(F, m, lo, hi); });
  };

  r.energy = hs(rho_hat, 0, order);
  for (const auto& c : u_hat) r.energy += hs(c, 0, order);
  r.energy += sobolev_norm_sq(F, s.f, order);

  r.grad_macro = order >= 1 ? hs(rho_hat, 1, order) + hs(f_hat[0], 1, order) : 0.0;
  for (int a = 0; a < d; ++a) {
    const auto& b = f_hat[std::size_t(spec.unit_index(a))];
    std::vector<Complex> gap(b.size());
    for (std::size_t m = 0; m < gap.size(); ++m) gap[m] = b[m] - u_hat[a][m];
    r.b_minus_u += hs(gap, 0, order);
    r.bu_gap_l2 += hs(gap, 0, 0);
    if (order >= 1) r.grad_macro += hs(b, 1, order);
  }
  r.bu_gap_l2 = std::sqrt(r.bu_gap_l2);

  const auto betas = velocity_multi_indices(spec.velocity_dim, order);
  double micro_l2 = 0.0;
  for (std::size_t m = 0; m < F.spectral_size(); ++m) {
    const auto micro = project_macro(gather_mode(spec, f_hat, m)).micro;
    const double mult = F.multiplicity(m);
    micro_l2 += mult * l2_norm_sq(micro);
    r.micro_nu_x += mult * sobolev_weight(F.wavevector(m), d, order) * nu_norm_sq(micro);
    for (const auto& beta : betas) {
      const int nb = beta[0] + beta[1] + beta[2];
      if (nb == 0) continue;
      r.micro_nu_xv += mult * sobolev_weight(F.wavevector(m), d, order - nb) * nu_norm_sq(velocity_derivative(micro, beta));
    }
  }
  const double pf = parseval_factor(F);
  r.micro_nu_x *= pf;
  r.micro_nu_xv *= pf;
  r.micro_l2 = std::sqrt(micro_l2 * pf);
  r.dissipation = r.b_minus_u + r.grad_macro + r.micro_nu_x + r.micro_nu_xv;

  r.mass_fluid = grid_integral(g, s.rho.values);
  r.mass_particles = grid_integral(g, s.f.coefficient(0));
  for (int a = 0; a < d; ++a) {
    const auto b = s.f.coefficient(spec.unit_index(a));
    std::vector<double> mom(g.size());
    for (std::size_t p = 0; p < mom.size(); ++p) mom[p] = b[p] + (1.0 + s.rho.values[p]) * s.u.components[a][p];
    r.momentum_total[a] = grid_integral(g, mom);
  }
  return r;
}

inline EnergyReport energy_report(const PerturbationState& s, int order, double t = 0.0) {
  const Fourier F(s.grid());
  return energy_report(F, s, order, t);
}

// ---------------------------------------------------------------------------
// Trajectories

struct Trajectory {
  std::vector<double> t;
  std::vector<PerturbationState> states;  // empty when snapshots were not kept
  std::vector<EnergyReport> reports;
  double cfl_limit = 0.0;  // smallest over the samples
  bool cfl_warning = false;
};

struct SimulateOptions {
  int energy_order = 3;
  bool keep_states = true;
};

/// Advances t_end / dt IMEX steps, sampling every sample_every steps (and at 0).
inline Trajectory simulate(const PerturbationState& initial, const SystemParams& params, double t_end, double dt,
                           int sample_every, const SimulateOptions& opt = {}) {
  if (!(dt > 0.0) || !(t_end >= 0.0)) throw InvalidArgument("simulate needs dt > 0 and t_end >= 0");
  if (sample_every < 1) throw InvalidArgument("sample_every must be positive");
  const double steps_real = t_end / dt;
  const auto steps = static_cast<long>(std::llround(steps_real));
  if (std::abs(steps_real - double(steps)) > 1e-9 * std::max(1.0, steps_real))
    throw InvalidArgument("t_end must be an integer multiple of dt");

  const SystemModel model(initial.grid(), initial.spec(), params);
  Trajectory traj;
  traj.cfl_limit = std::numeric_limits<double>::infinity();
  auto sample = [&](const PerturbationState& s, double t) {
    traj.t.push_back(t);
    traj.reports.push_back(energy_report(model.fourier(), s, opt.energy_order, t));
    if (opt.keep_states) traj.states.push_back(s);
    const double lim = model.cfl_limit(s);
    traj.cfl_limit = std::min(traj.cfl_limit, lim);
    if (dt > lim) traj.cfl_warning = true;
  };

  auto state = initial;
  sample(state, 0.0);
  for (long n = 1; n <= steps; ++n) {
    state = model.imex_step(state, dt);
    if (n % sample_every == 0 || n == steps) sample(state, double(n) * dt);
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Moment-system residuals

struct MomentResidualReport {
  double res_a = 0.0;
  double res_b = 0.0;
  double res_gamma = 0.0;
};

namespace detail {

// Residual fields of the three moment equations given the state and its time
// derivative. Spatial L^2 norms of the dealiased fields.
inline MomentResidualReport moment_residual_norms(const Fourier& F, const PerturbationState& s,
                                                  const PerturbationState& dt) {
  const auto& spec = s.spec();
  const auto& g = s.grid();
  const int d = g.dim;
  const std::size_t np = g.size();
  const int nb = spec.basis_size();

  auto deriv = [&](std::span<const double> x, int axis) { return spectral_derivative(F, x, axis, 1); };
  auto l2 = [&](const std::vector<double>& x) { return sobolev_norm_sq(F, dealias(F, x), 0); };

  // micro part g = {I-P} f and its time derivative
  KineticField micro = s.f, dmicro = dt.f;
  auto zero_macro = [&](KineticField& k) {
    for (double& x : k.coefficient(0)) x = 0.0;
    for (int a = 0; a < d; ++a)
      for (double& x : k.coefficient(spec.unit_index(a))) x = 0.0;
  };
  zero_macro(micro);
  zero_macro(dmicro);

  // spatial derivatives of every micro coefficient
  std::vector<std::vector<std::vector<double>>> dmic{std::size_t(d)};
  for (int a = 0; a < d; ++a)
    for (int k = 0; k < nb; ++k) dmic[a].push_back(deriv(micro.coefficient(k), a));

  const auto a_field = s.f.coefficient(0);
  std::vector<std::vector<double>> b{std::size_t(d)};
  for (int i = 0; i < d; ++i) {
    const auto c = s.f.coefficient(spec.unit_index(i));
    b[i].assign(c.begin(), c.end());
  }

  MomentResidualReport r;
  // (1) d_t a + div b = 0
  {
    std::vector<double> res(dt.f.coefficient(0).begin(), dt.f.coefficient(0).end());
    for (int i = 0; i < d; ++i) {
      const auto db = deriv(b[i], i);
      for (std::size_t p = 0; p < np; ++p) res[p] += db[p];
    }
    r.res_a = std::sqrt(l2(res));
  }

  auto gamma_field = [&](const KineticField& k, int i, int j) {
    std::vector<double> out(np);
    for (std::size_t p = 0; p < np; ++p) out[p] = gamma_moment(k.at(p), i, j);
    return out;
  };

  // (2) d_t b_i + d_i a + sum_j d_j Gamma_ij(g) = (1 + rho)(u_i - b_i) + (1 + rho) u_i a
  {
    double total = 0.0;
    const auto a_vec = std::vector<double>(a_field.begin(), a_field.end());
    for (int i = 0; i < d; ++i) {
      const auto dbt = dt.f.coefficient(spec.unit_index(i));
      std::vector<double> res(dbt.begin(), dbt.end());
      const auto da = deriv(a_vec, i);
      for (std::size_t p = 0; p < np; ++p) res[p] += da[p];
      for (int j = 0; j < d; ++j) {
        const auto dg = deriv(gamma_field(micro, i, j), j);
        for (std::size_t p = 0; p < np; ++p) res[p] += dg[p];
      }
      for (std::size_t p = 0; p < np; ++p) {
        const double rho = 1.0 + s.rho.values[p];
        const double ui = s.u.components[i][p];
        res[p] -= rho * (ui - b[i][p]) + rho * ui * a_vec[p];
      }
      total += l2(res);
    }
    r.res_b = std::sqrt(total);
  }

  // (3) d_i b_j + d_j b_i - (1 + rho)(u_i b_j + u_j b_i) = -d_t Gamma_ij(g) + Gamma_ij(l + r + s),
  //     l + r + s = (1 + rho)(L g + A^dagger(u) g) - v . grad_x g
  {
    KineticField lrs(g, spec);
    for (std::size_t p = 0; p < np; ++p) {
      const auto gp = micro.at(p);
      std::array<double, 3> w{0.0, 0.0, 0.0};
      for (int a = 0; a < d; ++a) w[a] = s.u.components[a][p];
      VelocityCoeffs<double> val(spec);
      val.coeffs = (1.0 + s.rho.values[p]) * (apply_fokker_planck(gp).coeffs + apply_raising(gp, w).coeffs);
      for (int a = 0; a < d; ++a) {
        VelocityCoeffs<double> grad(spec);
        for (int k = 0; k < nb; ++k) grad.coeffs[k] = dmic[a][k][p];
        val.coeffs -= apply_v_multiply(grad, a).coeffs;
      }
      lrs.set(p, val);
    }
    double total = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const auto dbj = deriv(b[j], i), dbi = deriv(b[i], j);
        const auto gt = gamma_field(dmicro, i, j), gl = gamma_field(lrs, i, j);
        std::vector<double> res(np);
        for (std::size_t p = 0; p < np; ++p) {
          const double rho = 1.0 + s.rho.values[p];
          const double ui = s.u.components[i][p], uj = s.u.components[j][p];
          res[p] = dbj[p] + dbi[p] - rho * (ui * b[j][p] + uj * b[i][p]) + gt[p] - gl[p];
        }
        total += l2(res);
      }
    r.res_gamma = std::sqrt(total);
  }
  return r;
}

}  // namespace detail

/// Residuals with the exact semidiscrete time derivative (two-path check).
inline MomentResidualReport moment_residuals_instant(const SystemModel& model, const PerturbationState& s) {
  return detail::moment_residual_norms(model.fourier(), s, model.rhs(s));
}

/// Residuals with centered time differences over equally spaced snapshots;
/// the maximum over interior samples of the spatial L^2 norms.
inline MomentResidualReport moment_residuals(const Fourier& F, std::span<const PerturbationState> states,
                                             std::span<const double> times) {
  if (states.size() < 3 || times.size() != states.size())
    throw InvalidArgument("moment residuals need at least 3 snapshots");
  MomentResidualReport worst;
  for (std::size_t i = 1; i + 1 < states.size(); ++i) {
    const double h = times[i + 1] - times[i - 1];
    if (!(h > 0.0)) throw InvalidArgument("snapshot times must increase");
    PerturbationState dt(states[i].grid(), states[i].spec());
    dt.axpy(1.0 / h, states[i + 1]).axpy(-1.0 / h, states[i - 1]);
    const auto r = detail::moment_residual_norms(F, states[i], dt);
    worst.res_a = std::max(worst.res_a, r.res_a);
    worst.res_b = std::max(worst.res_b, r.res_b);
    worst.res_gamma = std::max(worst.res_gamma, r.res_gamma);
  }
  return worst;
}

inline MomentResidualReport moment_residuals(const Fourier& F, const Trajectory& traj) {
  return moment_residuals(F, traj.states, traj.t);
}

// ---------------------------------------------------------------------------
// Higher-order Lyapunov monitor

struct LyapunovResult {
  std::vector<double> t;    // interior sample times
  std::vector<double> lhs;  // dN/dt + lambda N
  std::vector<double> rhs;  // C R
  std::vector<double> norm;      // N = ||grad^k (rho, u)||^2 + ||grad^k f||^2
  std::vector<double> low_norm;  // R = ||grad^k (rho^L, a^L, b^L)||^2
  double lambda = 0.0;
  double constant = 0.0;  // C
  int violations = 0;     // samples with dN/dt > 0 and R = 0
};

struct LyapunovNorms {
  double high = 0.0;  // N
  double low = 0.0;   // R
};

inline LyapunovNorms lyapunov_norms(const Fourier& F, const PerturbationState& s, int k, double r0) {
  const auto& spec = s.spec();
  auto grad_k = [&](std::span<const double> x, bool low) {
    const auto h = F.forward(x);
    return weighted_spectral_sum(F, h, [&](std::size_t m) {
      double w = detail::sobolev_diff_weight(F, m, k, k);
      if (low) {
        const double phi = low_frequency_profile(F.wavenumber_norm(m) / r0);
        w *= phi * phi;
      }
      return w;
    });
  };
  LyapunovNorms n;
  n.high = grad_k(s.rho.values, false);
  for (const auto& c : s.u.components) n.high += grad_k(c, false);
  for (int c = 0; c < spec.basis_size(); ++c) n.high += grad_k(s.f.coefficient(c), false);
  n.low = grad_k(s.rho.values, true) + grad_k(s.f.coefficient(0), true);
  for (int a = 0; a < s.grid().dim; ++a) n.low += grad_k(s.f.coefficient(spec.unit_index(a)), true);
  return n;
}

/// Fits d/dt N + lambda N <= C R samplewise. C is twice the smallest constant
/// for which lambda = 0 is admissible (zero when N never grows), and lambda is
/// the largest value compatible with that C.
inline LyapunovResult lyapunov_monitor(const Fourier& F, std::span<const PerturbationState> states,
                                       std::span<const double> times, int k, double r0 = 1.0) {
  if (k != 2 && k != 3) throw InvalidArgument("Lyapunov order must be 2 or 3");
  if (states.size() < 3 || times.size() != states.size())
    throw InvalidArgument("Lyapunov monitor needs at least 3 snapshots");
  std::vector<LyapunovNorms> norms;
  for (const auto& s : states) norms.push_back(lyapunov_norms(F, s, k, r0));

  LyapunovResult out;
  std::vector<double> ndot;
  const double tiny = 1e-300;
  double c_min = 0.0;
  for (std::size_t i = 1; i + 1 < states.size(); ++i) {
    const double h = times[i + 1] - times[i - 1];
    const double nd = (norms[i + 1].high - norms[i - 1].high) / h;
    out.t.push_back(times[i]);
    out.norm.push_back(norms[i].high);
    out.low_norm.push_back(norms[i].low);
    ndot.push_back(nd);
    if (nd > 0.0) {
      if (norms[i].low > tiny)
        c_min = std::max(c_min, nd / norms[i].low);
      else
        ++out.violations;
    }
  }
  out.constant = 2.0 * c_min;
  out.lambda = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ndot.size(); ++i) {
    if (out.norm[i] <= tiny) continue;
    out.lambda = std::min(out.lambda, (out.constant * out.low_norm[i] - ndot[i]) / out.norm[i]);
  }
  if (!std::isfinite(out.lambda)) out.lambda = 0.0;
  for (std::size_t i = 0; i < ndot.size(); ++i) {
    out.lhs.push_back(ndot[i] + out.lambda * out.norm[i]);
    out.rhs.push_back(out.constant * out.low_norm[i]);
  }
  return out;
}

inline LyapunovResult lyapunov_monitor(const Fourier& F, const Trajectory& traj, int k, double r0 = 1.0) {
  return lyapunov_monitor(F, traj.states, traj.t, k, r0);
}

// ---------------------------------------------------------------------------
// Energy-inequality monitor: E(t + w) - E(t) + lambda int_t^{t+w} D <= 0

struct EnergyInequalityResult {
  double lambda = 0.0;  // largest admissible lambda over all windows
  int windows = 0;
  int growth = 0;  // windows over which E grew
};

/// window = 0 compares consecutive samples; otherwise each sample is paired
/// with the first sample at least `window` later. Integrals by the trapezoid rule.
inline EnergyInequalityResult energy_inequality(std::span<const EnergyReport> reports, double window = 0.0) {
  if (reports.size() < 3) throw InvalidArgument("energy inequality needs at least 3 samples");
  std::vector<double> cum(reports.size(), 0.0);
  for (std::size_t i = 1; i < reports.size(); ++i)
    cum[i] = cum[i - 1] + 0.5 * (reports[i].t - reports[i - 1].t) * (reports[i].dissipation + reports[i - 1].dissipation);
  EnergyInequalityResult r;
  r.lambda = std::numeric_limits<double>::infinity();
  std::size_t j = 1;
  for (std::size_t i = 0; i + 1 < reports.size(); ++i) {
    j = std::max(j, i + 1);
    while (j < reports.size() && reports[j].t - reports[i].t < window) ++j;
    if (j == reports.size()) break;
    ++r.windows;
    const double drop = reports[i].energy - reports[j].energy;
    const double integral = cum[j] - cum[i];
    if (drop < 0.0) ++r.growth;
    if (integral > 0.0)
      r.lambda = std::min(r.lambda, drop / integral);
    else if (drop < 0.0)
      r.lambda = -std::numeric_limits<double>::infinity();
  }
  if (r.windows == 0) throw InvalidArgument("energy-inequality window exceeds the run");
  if (!std::isfinite(r.lambda) && r.lambda > 0.0) r.lambda = 0.0;
  return r;
}

}  // namespace vfp
