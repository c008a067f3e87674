#include "vfp/diagnostics.hpp"
#include "vfp/initial_data.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace vfp;

namespace {

constexpr double pi = std::numbers::pi;

PerturbationState random_state(const SpatialGrid& g, const HermiteSpec& s, double amp, unsigned seed) {
  return make_initial_data(InitialKind::random_band, g, s, amp, seed);
}

Trajectory short_run(double dt, int cap = 8, double amp = 1e-4) {
  const SpatialGrid g{1, 32, 2 * pi};
  const HermiteSpec spec{cap, 1, 1};
  return simulate(make_initial_data(InitialKind::prepared_smooth, g, spec, amp), SystemParams{0.0, 0.5, 2.0}, 0.5, dt, 5,
                  {1, true});
}

}  // namespace

TEST(EnergyReport, EquilibriumIsZero) {
  for (int s = 0; s <= 3; ++s) {
    const auto r = energy_report(PerturbationState(SpatialGrid{1, 16, 2 * pi}, HermiteSpec{4, 1, 1}), s);
    for (double v : r.values()) EXPECT_EQ(v, 0.0);
  }
  EXPECT_EQ(EnergyReport::columns().size(), EnergyReport{}.values().size());
}

TEST(EnergyReport, ConstantSecondHermiteMode) {
  const SpatialGrid g{1, 16, 2 * pi};
  const HermiteSpec spec{6, 1, 1};
  PerturbationState st(g, spec);
  for (double& x : st.f.coefficient(2)) x = 1.0;
  const auto e2 = VelocityCoeffs<double>::unit(spec, 2);
  for (int s = 0; s <= 3; ++s) {
    const auto r = energy_report(st, s);
    EXPECT_NEAR(r.micro_nu_x, g.volume() * nu_norm_sq(e2), 1e-12);
    EXPECT_EQ(r.b_minus_u, 0.0);
    EXPECT_EQ(r.grad_macro, 0.0);
    EXPECT_NEAR(r.micro_l2, std::sqrt(g.volume()), 1e-12);
  }
  // d_v e2 = sqrt(2) e1 (up to the widened layout); s = 1 picks up |beta| = 1 only
  EXPECT_NEAR(energy_report(st, 1).micro_nu_xv, g.volume() * nu_norm_sq(velocity_derivative(e2, {1, 0, 0})), 1e-12);
}

TEST(EnergyReport, PureMacroSine) {
  const SpatialGrid g{1, 32, 2 * pi};
  const HermiteSpec spec{4, 1, 1};
  PerturbationState st(g, spec);
  auto a = st.f.coefficient(0);
  for (std::size_t p = 0; p < g.size(); ++p) a[p] = std::sin(g.coordinate(p, 0));
  for (int s = 0; s <= 3; ++s) {
    const auto r = energy_report(st, s);
    EXPECT_EQ(r.micro_nu_x, 0.0);
    EXPECT_EQ(r.micro_nu_xv, 0.0);
    EXPECT_NEAR(r.grad_macro, s * pi, 1e-12);
    EXPECT_NEAR(r.mass_particles, 0.0, 1e-13);
  }
}

TEST(EnergyReport, ComponentsNonnegativeAndEnergyPositive) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto st = random_state(SpatialGrid{1, 16, 2 * pi}, HermiteSpec{6, 1, 1}, 0.05, seed);
    for (int s = 0; s <= 3; ++s) {
      const auto r = energy_report(st, s);
      EXPECT_GT(r.energy, 0.0);
      for (double v : {r.dissipation, r.b_minus_u, r.grad_macro, r.micro_nu_x, r.micro_nu_xv, r.micro_l2, r.bu_gap_l2})
        EXPECT_GE(v, 0.0);
    }
  }
  const auto st3 = random_state(SpatialGrid{3, 8, 2 * pi}, HermiteSpec{4, 3, 1}, 0.05, 1);
  EXPECT_GT(energy_report(st3, 2).dissipation, 0.0);
  EXPECT_THROW(energy_report(st3, 4), InvalidArgument);
}

TEST(MomentResiduals, ExactTendencySatisfiesTheMomentSystem) {
  const SpatialGrid g{1, 32, 2 * pi};
  const HermiteSpec spec{8, 1, 1};
  const SystemModel model(g, spec, SystemParams{0.0, 1.0, 2.0});
  const auto st = random_state(g, spec, 0.05, 4);
  const auto r = moment_residuals_instant(model, st);
  const double scale = std::sqrt(energy_report(st, 1).energy);
  EXPECT_LT(r.res_a, 1e-13 * scale);
  EXPECT_LT(r.res_b, 1e-13 * scale);
  EXPECT_LT(r.res_gamma, 1e-13 * scale);
}

TEST(MomentResiduals, TransverseTruncationOnlyClosesTheMassEquation) {
  // transverse_cap = 1 cannot hold Gamma_11, Gamma_22
  const SpatialGrid g{3, 8, 2 * pi};
  const HermiteSpec spec{4, 3, 1};
  const SystemModel model(g, spec, SystemParams{0.0, 1.0, 2.0});
  const auto st = random_state(g, spec, 0.05, 4);
  const auto r = moment_residuals_instant(model, st);
  EXPECT_LT(r.res_a, 1e-13 * std::sqrt(energy_report(st, 1).energy));
  EXPECT_GT(r.res_gamma, 1e-3);
}

TEST(MomentResiduals, ManufacturedSecondModeTwoPaths) {
  // f = e2 only, u = 0: left side of the Gamma equation is zero, so the
  // exact d_t Gamma must equal Gamma(l + r + s)
  const SpatialGrid g{1, 32, 2 * pi};
  const HermiteSpec spec{6, 1, 1};
  PerturbationState st(g, spec);
  auto c = st.f.coefficient(2);
  for (std::size_t p = 0; p < g.size(); ++p) c[p] = 1e-3 * std::cos(g.coordinate(p, 0));
  const SystemModel model(g, spec, SystemParams{});
  EXPECT_LT(moment_residuals_instant(model, st).res_gamma, 1e-17);
  auto wrong = model.rhs(st);
  for (double& x : wrong.f.coefficient(2)) x *= 1.01;
  EXPECT_GT(detail::moment_residual_norms(model.fourier(), st, wrong).res_gamma, 1e-6);
}

TEST(MomentResiduals, EquilibriumAndArgumentChecks) {
  const SpatialGrid g{1, 16, 2 * pi};
  const HermiteSpec spec{4, 1, 1};
  const auto tr = simulate(PerturbationState(g, spec), SystemParams{}, 0.1, 0.01, 1);
  const Fourier F(g);
  const auto r = moment_residuals(F, tr);
  EXPECT_EQ(r.res_a, 0.0);
  EXPECT_EQ(r.res_b, 0.0);
  EXPECT_EQ(r.res_gamma, 0.0);
  EXPECT_THROW(moment_residuals(F, std::span(tr.states).first(2), std::span(tr.t).first(2)), InvalidArgument);
}

TEST(MomentResiduals, ShrinkFourfoldUnderStepHalving) {
  const Fourier F(SpatialGrid{1, 32, 2 * pi});
  const auto coarse = moment_residuals(F, short_run(0.004));
  const auto fine = moment_residuals(F, short_run(0.002));
  EXPECT_NEAR(coarse.res_a / fine.res_a, 4.0, 0.8);
  EXPECT_NEAR(coarse.res_b / fine.res_b, 4.0, 0.8);
  EXPECT_NEAR(coarse.res_gamma / fine.res_gamma, 4.0, 0.8);
}

TEST(Lyapunov, EquilibriumHoldsTrivially) {
  const SpatialGrid g{1, 16, 2 * pi};
  const auto tr = simulate(PerturbationState(g, HermiteSpec{4, 1, 1}), SystemParams{}, 0.1, 0.01, 1);
  const Fourier F(g);
  for (int k : {2, 3}) {
    const auto r = lyapunov_monitor(F, tr, k);
    EXPECT_EQ(r.violations, 0);
    for (std::size_t i = 0; i < r.lhs.size(); ++i) EXPECT_LE(r.lhs[i], r.rhs[i]);
  }
  EXPECT_THROW(lyapunov_monitor(F, tr, 1), InvalidArgument);
}

TEST(Lyapunov, DecayingRunHasPositiveRate) {
  const SpatialGrid g{1, 32, 2 * pi};
  const HermiteSpec spec{8, 1, 1};
  const auto tr = simulate(make_initial_data(InitialKind::prepared_smooth, g, spec, 1e-2), SystemParams{0.0, 0.5, 2.0},
                           10.0, 0.01, 5, {1, true});
  const Fourier F(g);
  for (int k : {2, 3}) {
    const auto r = lyapunov_monitor(F, tr, k);
    EXPECT_GT(r.lambda, 0.0);
    EXPECT_EQ(r.violations, 0);
    for (std::size_t i = 0; i < r.lhs.size(); ++i) EXPECT_LE(r.lhs[i], r.rhs[i] + 1e-15 * r.norm[i]);
  }
  // a larger cutoff radius keeps the lowest mode in the low part
  const auto wide = lyapunov_monitor(F, tr, 2, 4.0);
  EXPECT_GT(wide.low_norm.front(), 0.0);
  EXPECT_EQ(wide.violations, 0);
}

TEST(EnergyInequality, WindowedRatePositiveOnDecayingRun) {
  const SpatialGrid g{1, 32, 2 * pi};
  const HermiteSpec spec{8, 1, 1};
  const auto tr = simulate(make_initial_data(InitialKind::prepared_smooth, g, spec, 1e-2), SystemParams{0.0, 0.5, 2.0},
                           20.0, 0.01, 10, {2, false});
  const auto r = energy_inequality(tr.reports, 2 * pi);
  EXPECT_GT(r.lambda, 0.0);
  EXPECT_EQ(r.growth, 0);
  EXPECT_THROW(energy_inequality(tr.reports, 100.0), InvalidArgument);
}
