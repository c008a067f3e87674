// Acceptance run: one PASS/FAIL line per criterion.
// Usage: acceptance [--expect-fail N]... [--only N]...
// Exit status is nonzero when a criterion fails that was not listed as expected.

#include "vfp/coercivity.hpp"
#include "vfp/experiments.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

using namespace vfp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

RunConfig load(const std::string& name) {
  std::ifstream in(fs::path(VFP_CONFIG_DIR) / name);
  if (!in) throw std::runtime_error("missing config " + name);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

fs::path out_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / "vfp_acceptance" / name;
  fs::remove_all(p);
  return p;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto checks = run_oracle_suite();
  const double secs = seconds_since(t0);
  double worst = 0.0;
  std::string failed;
  for (const auto& c : checks) {
    worst = std::max(worst, c.error);
    if (!c.passed()) failed += " " + c.name;
  }
  return {failed.empty() && secs < 10.0,
          fmt("%zu checks, max error %.2e, %.2f s", checks.size(), worst, secs) + (failed.empty() ? "" : ";" + failed)};
}

Outcome coercivity() {
  bool ok = true;
  std::string detail;
  for (const int vdim : {1, 3})
    for (const auto form : {CoercivityForm::weak, CoercivityForm::strong}) {
      double lo = 1e300, hi = 0.0, sampled = 1e300;
      int violations = 0;
      for (const int cap : {4, 8, 16}) {
        const auto s = sample_coercivity(HermiteSpec{cap, vdim, vdim == 3 ? 1 : 0}, form, 200, 11u + cap);
        lo = std::min(lo, s.sharp);
        hi = std::max(hi, s.sharp);
        sampled = std::min(sampled, s.lambda0);
        violations += s.violations;
      }
      const double spread = (hi - lo) / lo;
      ok = ok && lo > 0.0 && violations == 0 && spread < 0.2;
      detail += fmt("%s d=%d lambda0 %.4f..%.4f (spread %.1f%%, sampled min %.4f, violations %d); ",
                    form == CoercivityForm::weak ? "weak" : "strong", vdim, lo, hi, 100 * spread, sampled,
                    violations);
    }
  return {ok, detail};
}

Outcome conservation() {
  const auto t0 = std::chrono::steady_clock::now();
  const SpatialGrid g{1, 128, 2 * std::numbers::pi};
  const HermiteSpec spec{16, 1, 0};
  const SystemParams params{0.0, 0.5, 2.0};

  const PerturbationState eq(g, spec);
  const auto stepped = imex_step(eq, params, 1e-3);
  double eq_err = 0.0;
  for (const auto* v : {&stepped.rho.values, &stepped.f.values, &stepped.u.components[0]})
    for (double x : *v) eq_err = std::max(eq_err, std::abs(x));

  const double amp = 1e-2;
  const auto s0 = make_initial_data(InitialKind::random_band, g, spec, amp, 5);
  const auto tr = simulate(s0, params, 10.0, 1e-3, 1000, {0, false});
  const double scale = amp * g.volume();
  const auto& a = tr.reports.front();
  double drift = 0.0;
  for (const auto& r : tr.reports) {
    drift = std::max({drift, std::abs(r.mass_fluid - a.mass_fluid), std::abs(r.mass_particles - a.mass_particles),
                      std::abs(r.momentum_total[0] - a.momentum_total[0])});
  }
  const double secs = seconds_since(t0);
  return {eq_err == 0.0 && drift / scale < 1e-6 && secs < 120.0,
          fmt("equilibrium step max |state| %.1e; max drift %.2e (relative %.2e to amplitude*volume); %.1f s", eq_err,
              drift, drift / scale, secs)};
}

Outcome mode_decay() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_experiment(load("mode_sweep.ini"), out_dir("mode_sweep"));
  const double secs = seconds_since(t0);
  return {r.passed && secs < 60.0,
          fmt("c = %.4f, heat-regime spread %.1f%%, plateau spread %.1f%%, %.2f s", r.summary["c"].get<double>(),
              100 * r.summary["heat_ratio_spread"].get<double>(), 100 * r.summary["plateau_spread"].get<double>(),
              secs)};
}

Outcome semigroup_rates() {
  const auto t0 = std::chrono::steady_clock::now();
  struct Case {
    const char* config;
    double expected, tol;
  };
  bool ok = true;
  std::string detail;
  for (const auto& c : {Case{"semigroup_q1.ini", -0.75, 0.05}, Case{"semigroup_q1_grad.ini", -1.25, 0.05},
                        Case{"semigroup_q1.19.ini", -0.5, 0.1}}) {
    const auto r = run_experiment(load(c.config), out_dir(c.config));
    const double slope = r.summary["slope"].get<double>();
    ok = ok && std::abs(slope - c.expected) <= c.tol;
    detail += fmt("%s slope %.4f (target %.2f +- %.2f); ", c.config, slope, c.expected, c.tol);
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 300.0, detail + fmt("%.1f s", secs)};
}

Outcome half_order() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_experiment(load("micro_gap.ini"), out_dir("micro_gap"));
  const double secs = seconds_since(t0);
  return {r.passed && secs < 300.0, fmt("micro excess %.4f, gap excess %.4f (target 0.5 +- 0.1), %.1f s",
                                        r.summary["micro_excess"].get<double>(),
                                        r.summary["gap_excess"].get<double>(), secs)};
}

ExperimentResult torus_run() {
  static const auto r = run_experiment(load("torus_decay.ini"), out_dir("torus_decay"));
  return r;
}

Outcome torus_decay() {
  const auto r = torus_run();
  const double kappa = r.summary["kappa"].get<double>(), r2 = r.summary["r_squared"].get<double>();
  const double lin = r.summary["linear_mode_rate"].get<double>(), mis = r.summary["relative_mismatch"].get<double>();
  return {kappa > 0.0 && r2 > 0.99 && mis < 0.15,
          fmt("kappa %.4f, R^2 %.4f, linear torus-mode rate %.4f, mismatch %.1f%%", kappa, r2, lin, 100 * mis)};
}

Outcome lyapunov() {
  const auto r = torus_run();
  bool ok = true;
  std::string detail;
  for (const char* k : {"lyapunov_k2", "lyapunov_k3"}) {
    const auto& l = r.summary[k];
    ok = ok && l["lambda"].get<double>() > 0.0 && l["violations"].get<int>() == 0;
    detail += fmt("%s lambda %.4f C %.3g violations %d; ", k, l["lambda"].get<double>(), l["constant"].get<double>(),
                  l["violations"].get<int>());
  }
  return {ok, detail};
}

Outcome inviscid() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_experiment(load("inviscid_order.ini"), out_dir("inviscid_order"));
  const double secs = seconds_since(t0);
  const double order = r.summary["order"].get<double>(), half = r.summary["order_half_dt"].get<double>();
  return {r.passed && secs < 600.0, fmt("order %.4f, R^2 %.5f, order at dt/2 %.4f, %.1f s", order,
                                        r.summary["r_squared"].get<double>(), half, secs)};
}

MomentResidualReport residual_run(double dt, int cap) {
  const SpatialGrid g{1, 32, 2 * std::numbers::pi};
  const HermiteSpec spec{cap, 1, 0};
  const auto tr = simulate(make_initial_data(InitialKind::prepared_smooth, g, spec, 1e-4), SystemParams{0.0, 0.5, 2.0},
                           0.5, dt, 5, {1, true});
  return moment_residuals(Fourier(g), tr);
}

Outcome moment_residual_scaling() {
  const auto coarse = residual_run(0.004, 8), fine = residual_run(0.002, 8);
  const std::array<double, 3> ratio{coarse.res_a / fine.res_a, coarse.res_b / fine.res_b,
                                    coarse.res_gamma / fine.res_gamma};
  bool halving_ok = true;
  for (double q : ratio) halving_ok = halving_ok && std::abs(q - 4.0) <= 0.8;
  const auto r8 = fine, r12 = residual_run(0.002, 12), r16 = residual_run(0.002, 16);
  auto decreasing = [](double x, double y, double z) { return y < x && z < y; };
  const bool cap_ok = decreasing(r8.res_a, r12.res_a, r16.res_a) && decreasing(r8.res_b, r12.res_b, r16.res_b) &&
                      decreasing(r8.res_gamma, r12.res_gamma, r16.res_gamma);
  return {halving_ok && cap_ok,
          fmt("dt-halving ratios a %.3f b %.3f gamma %.3f; gamma residual at caps 8/12/16: %.10e %.10e %.10e "
              "(cap-monotone: %s)",
              ratio[0], ratio[1], ratio[2], r8.res_gamma, r12.res_gamma, r16.res_gamma, cap_ok ? "yes" : "no")};
}

// Largest deviation over modes 1 and 2 between the nonlinear torus solution
// (Richardson-extrapolated in dt) and the exact linear propagator.
double mode_discrepancy(double amp) {
  const SpatialGrid g{1, 32, 2 * std::numbers::pi};
  const HermiteSpec spec{8, 1, 0};
  const SystemParams params{0.0, 0.5, 2.0};
  const double T = 1.0;
  const auto s0 = make_initial_data(InitialKind::prepared_smooth, g, spec, amp);
  const Fourier F(g);
  auto final_state = [&](double dt) {
    return simulate(s0, params, T, dt, int(std::lround(T / dt)), {0, true}).states.back();
  };
  const auto u1 = final_state(4e-3), u2 = final_state(2e-3), u3 = final_state(1e-3);
  double worst = 0.0;
  for (std::size_t m : {1, 2}) {
    const auto z1 = project_mode(F, u1, m).to_vector(), z2 = project_mode(F, u2, m).to_vector(),
               z3 = project_mode(F, u3, m).to_vector();
    const ModeVector r1 = (4.0 * z2 - z1) / 3.0, r2 = (4.0 * z3 - z2) / 3.0;
    const ModeVector extrapolated = (8.0 * r2 - r1) / 7.0;
    const auto exact = evolve_mode(project_mode(F, s0, m), params, T).to_vector();
    worst = std::max(worst, (extrapolated - exact).cwiseAbs().maxCoeff());
  }
  return worst;
}

Outcome linear_consistency() {
  const double d4 = mode_discrepancy(1e-4), d5 = mode_discrepancy(1e-5);
  const double ratio = d4 / d5;
  return {ratio >= 50.0 && ratio <= 200.0,
          fmt("discrepancy %.4e at 1e-4, %.4e at 1e-5, ratio %.2f (amplitude^2 predicts 100)", d4, d5, ratio)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expected_fail, only;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    const int n = std::stoi(argv[i + 1]);
    if (flag == "--expect-fail")
      expected_fail.insert(n);
    else if (flag == "--only")
      only.insert(n);
    else {
      std::fprintf(stderr, "unknown flag %s\n", flag.c_str());
      return 2;
    }
  }
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"operator oracles", oracles},
      {"coercivity", coercivity},
      {"equilibrium and conservation", conservation},
      {"per-mode decay", mode_decay},
      {"semigroup rates", semigroup_rates},
      {"extra half-order decay", half_order},
      {"torus exponential decay", torus_decay},
      {"Lyapunov monitor", lyapunov},
      {"inviscid order", inviscid},
      {"moment-system residuals", moment_residual_scaling},
      {"linear/nonlinear consistency", linear_consistency},
  };
  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = int(i) + 1;
    if (!only.empty() && !only.count(n)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const bool xfail = expected_fail.count(n) > 0;
    if (!o.pass && !xfail) ++unexpected;
    std::printf("%s %2d %s: %s%s\n", o.pass ? "PASS" : "FAIL", n, criteria[i].first, o.detail.c_str(),
                !o.pass && xfail ? " [expected failure]" : "");
    std::fflush(stdout);
  }
  return unexpected == 0 ? 0 : 1;
}
