#pragma once

// Paired viscous/inviscid runs from identical data and the fitted order of the
// vanishing-viscosity error.

#include "vfp/diagnostics.hpp"
#include "vfp/fit.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <vector>

namespace vfp {

struct DifferenceReport {
  double mu = 0.0;
  double sup_h1_sq = 0.0;  // sup_t ||(rho, u)~||_{H^1}^2 + ||f~||_{H^1_{x,v}}^2
  double peak_time = 0.0;
  double int_grad_macro = 0.0;  // int ||grad (rho, a, b)~||^2 dt
  double int_bu_gap_h1 = 0.0;   // int ||b~ - u~||_{H^1}^2 dt
  double int_micro_nu = 0.0;    // int sum_{|alpha| <= 1} ||{I-P} d^alpha f~||_nu^2 dt
  double int_micro_v_nu = 0.0;  // int ||grad_v {I-P} f~||_nu^2 dt
  std::vector<double> t;        // sampled difference series
  std::vector<double> h1_sq;
};

/// Report of the pointwise-in-time difference of two equally sampled
/// trajectories; symmetric in its arguments.
inline DifferenceReport difference_report(double mu, const Trajectory& a, const Trajectory& b) {
  if (a.states.size() != b.states.size() || a.states.empty())
    throw InvalidArgument("trajectories must hold the same number of snapshots");
  const Fourier F(a.states.front().grid());
  DifferenceReport r;
  r.mu = mu;
  std::vector<EnergyReport> rep;
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    if (a.t[i] != b.t[i]) throw InvalidArgument("trajectories are sampled at different times");
    auto diff = a.states[i];
    diff.axpy(-1.0, b.states[i]);
    rep.push_back(energy_report(F, diff, 1, a.t[i]));
    r.t.push_back(a.t[i]);
    r.h1_sq.push_back(rep.back().energy);
    if (rep.back().energy > r.sup_h1_sq) {
      r.sup_h1_sq = rep.back().energy;
      r.peak_time = a.t[i];
    }
  }
  for (std::size_t i = 1; i < rep.size(); ++i) {
    const double h = 0.5 * (rep[i].t - rep[i - 1].t);
    r.int_grad_macro += h * (rep[i].grad_macro + rep[i - 1].grad_macro);
    r.int_bu_gap_h1 += h * (rep[i].b_minus_u + rep[i - 1].b_minus_u);
    r.int_micro_nu += h * (rep[i].micro_nu_x + rep[i - 1].micro_nu_x);
    r.int_micro_v_nu += h * (rep[i].micro_nu_xv + rep[i - 1].micro_nu_xv);
  }
  return r;
}

/// Runs mu = 0 once and every listed mu once from the same data; branches run
/// concurrently on up to `threads` workers.
inline std::vector<DifferenceReport> paired_run(const PerturbationState& initial, const SystemParams& base,
                                                const std::vector<double>& mu_list, double t_end, double dt,
                                                int sample_every = 1, int threads = 1) {
  for (double mu : mu_list)
    if (!(mu >= 0.0)) throw InvalidArgument("mu must be nonnegative");
  SimulateOptions opt;
  opt.energy_order = 1;
  auto run = [&](double mu) {
    auto p = base;
    p.mu = mu;
    return simulate(initial, p, t_end, dt, sample_every, opt);
  };
  const auto reference = run(0.0);

  std::vector<DifferenceReport> out(mu_list.size());
  const std::size_t workers = std::size_t(std::max(1, threads));
  for (std::size_t start = 0; start < mu_list.size(); start += workers) {
    std::vector<std::future<DifferenceReport>> batch;
    for (std::size_t i = start; i < std::min(mu_list.size(), start + workers); ++i) {
      const double mu = mu_list[i];
      batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred,
                                 [&, mu] { return difference_report(mu, run(mu), reference); }));
    }
    for (std::size_t j = 0; j < batch.size(); ++j) out[start + j] = batch[j].get();
  }
  return out;
}

struct OrderFit {
  double order = 0.0;
  double r_squared = 0.0;
};

/// Log-log slope of sqrt(sup_h1_sq) against mu.
inline OrderFit order_fit(const std::vector<DifferenceReport>& reports) {
  std::vector<double> x, y;
  for (const auto& r : reports) {
    if (!(r.mu > 0.0)) throw InvalidArgument("order fit needs mu > 0");
    if (!(r.sup_h1_sq > 0.0)) throw InvalidArgument("order fit on a degenerate (zero) report");
    x.push_back(std::log(r.mu));
    y.push_back(0.5 * std::log(r.sup_h1_sq));
  }
  auto distinct = x;
  std::sort(distinct.begin(), distinct.end());
  if (std::unique(distinct.begin(), distinct.end()) - distinct.begin() < 3)
    throw InvalidArgument("order fit needs at least 3 distinct mu values");
  const auto line = fit_line(x, y);
  return {line.slope, line.r_squared};
}

}  // namespace vfp
