#pragma once

// Perturbative Navier-Stokes / Euler - Vlasov - Fokker-Planck system on a
// periodic grid, with rho = 1 + rho_pert:
//
//   d_t rho_pert = -rho div u - grad rho_pert . u
//   d_t u        = -u . grad u - P'(rho)/rho grad rho_pert + mu Lap u / rho + b - u - a u
//   d_t f        = -v . grad_x f + rho [L f + A^dagger(u) f + u . v sqrt(M)]
//
// and a two-stage IMEX Runge-Kutta integrator. The implicit operator is the
// constant-coefficient part (L f, the friction pair u <-> b and mu Lap u),
// which is solved in closed form per Fourier mode; everything else, including
// the rho_pert-weighted corrections, is explicit.

#include "vfp/hermite.hpp"
#include "vfp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace vfp {

class VacuumBreach : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonFiniteState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SystemParams {
  double mu = 0.0;
  double c0 = 1.0;
  double gamma = 2.0;

  void validate() const {
    if (!(gamma > 1.0)) throw InvalidArgument("gamma must exceed 1");
    if (!(c0 > 0.0)) throw InvalidArgument("c0 must be positive");
    if (!(mu >= 0.0)) throw InvalidArgument("mu must be nonnegative");
    if (!std::isfinite(mu) || !std::isfinite(c0) || !std::isfinite(gamma))
      throw InvalidArgument("system parameters must be finite");
  }

  double pressure(double rho) const { return c0 * std::pow(rho, gamma); }
  /// P'(1) = c0 gamma.
  double sound_speed_sq() const { return c0 * gamma; }
  bool inviscid() const { return mu == 0.0; }
};

struct PressureCoeffs {
  double pp_over_rho;    // P'(1 + rho_pert) / (1 + rho_pert)
  double visc_over_rho;  // 1 / (1 + rho_pert)
};

inline PressureCoeffs pressure_coeffs(double rho_pert, const SystemParams& p) {
  const double rho = 1.0 + rho_pert;
  if (!(rho > 0.0)) throw VacuumBreach("vacuum: 1 + rho_pert = " + std::to_string(rho));
  return {p.c0 * p.gamma * std::pow(rho, p.gamma - 2.0), 1.0 / rho};
}

struct PerturbationState {
  ScalarField rho;
  VectorField u;
  KineticField f;

  PerturbationState() = default;
  PerturbationState(const SpatialGrid& g, const HermiteSpec& s) : rho(g), u(g), f(g, s) {
    g.validate();
    s.validate();
    if (g.dim != s.velocity_dim) throw InvalidArgument("space_dim must equal velocity_dim");
  }

  const SpatialGrid& grid() const { return rho.grid; }
  const HermiteSpec& spec() const { return f.spec; }

  bool all_finite() const {
    auto ok = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    if (!ok(rho.values) || !ok(f.values)) return false;
    return std::all_of(u.components.begin(), u.components.end(), ok);
  }

  double min_density() const {
    double m = 1.0 + rho.values.front();
    for (double r : rho.values) m = std::min(m, 1.0 + r);
    return m;
  }

  PerturbationState& axpy(double alpha, const PerturbationState& x) {
    auto add = [alpha](std::vector<double>& y, const std::vector<double>& z) {
      for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * z[i];
    };
    add(rho.values, x.rho.values);
    for (std::size_t a = 0; a < u.components.size(); ++a) add(u.components[a], x.u.components[a]);
    add(f.values, x.f.values);
    return *this;
  }
};

using Tendency = PerturbationState;

namespace detail {

/// Fourier-space image of a PerturbationState (r2c half spectrum per field).
struct SpectralState {
  std::vector<Complex> rho;
  std::vector<std::vector<Complex>> u;
  std::vector<std::vector<Complex>> f;

  SpectralState() = default;
  SpectralState(std::size_t nspec, int dim, int nbasis)
      : rho(nspec), u(std::size_t(dim), std::vector<Complex>(nspec)),
        f(std::size_t(nbasis), std::vector<Complex>(nspec)) {}

  template <typename Fn>
  void for_each_field(const SpectralState& other, Fn&& fn) {
    fn(rho, other.rho);
    for (std::size_t a = 0; a < u.size(); ++a) fn(u[a], other.u[a]);
    for (std::size_t k = 0; k < f.size(); ++k) fn(f[k], other.f[k]);
  }

  SpectralState& axpy(Complex alpha, const SpectralState& x) {
    for_each_field(x, [alpha](std::vector<Complex>& y, const std::vector<Complex>& z) {
      for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * z[i];
    });
    return *this;
  }
};

}  // namespace detail

/// Discretized system on one grid/layout. Holds the transform plans; shareable
/// read-only across threads.
class SystemModel {
 public:
  SystemModel(const SpatialGrid& grid, const HermiteSpec& spec, const SystemParams& params)
      : grid_(grid), spec_(spec), params_(params), fft_(std::make_shared<Fourier>(grid)) {
    spec.validate();
    params.validate();
    if (grid.dim != spec.velocity_dim) throw InvalidArgument("space_dim must equal velocity_dim");
  }

  const SpatialGrid& grid() const { return grid_; }
  const HermiteSpec& spec() const { return spec_; }
  const SystemParams& params() const { return params_; }
  const Fourier& fourier() const { return *fft_; }

  /// Largest admissible step: 0.4 dx / (v_max + max |u|), v_max = sqrt(2 N + 1) per axis.
  double cfl_limit(const PerturbationState& s) const {
    double umax = 0.0;
    for (const auto& c : s.u.components)
      for (double x : c) umax = std::max(umax, std::abs(x));
    double vmax = 0.0;
    for (int a = 0; a < spec_.velocity_dim; ++a) vmax += std::sqrt(2.0 * spec_.axis_cap(a) + 1.0);
    return 0.4 * grid_.spacing() / (vmax + umax);
  }

  /// Full time derivative; viscous when mu > 0, inviscid otherwise.
  Tendency rhs(const PerturbationState& s) const {
    check_state(s);
    const auto y = to_spectral(s);
    auto total = explicit_part(y);
    total.axpy(1.0, implicit_part(y));
    return to_physical(total);
  }

  /// One IMEX-SSP2(2,2,2) step.
  PerturbationState imex_step(const PerturbationState& s, double dt) const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
    check_state(s);
    const auto y0 = to_spectral(s);
    const double g = 1.0 - 1.0 / std::sqrt(2.0);

    auto y1 = y0;
    implicit_solve(y1, g * dt);
    const auto e1 = explicit_part(y1);
    const auto i1 = implicit_part(y1);

    auto y2 = y0;
    y2.axpy(dt, e1).axpy((1.0 - 2.0 * g) * dt, i1);
    implicit_solve(y2, g * dt);
    check_density(y2);
    const auto e2 = explicit_part(y2);
    const auto i2 = implicit_part(y2);

    auto next = y0;
    next.axpy(0.5 * dt, e1).axpy(0.5 * dt, e2).axpy(0.5 * dt, i1).axpy(0.5 * dt, i2);
    auto out = to_physical(next);
    if (!out.all_finite()) throw NonFiniteState("non-finite values after step");
    if (out.min_density() < kVacuumGuard)
      throw VacuumBreach("vacuum guard: min(1 + rho_pert) = " + std::to_string(out.min_density()));
    return out;
  }

  /// Projects every field onto the retained (2/3-rule) band.
  PerturbationState band_limit(const PerturbationState& s) const { return to_physical(to_spectral(s)); }

  static constexpr double kVacuumGuard = 0.1;

 private:
  void check_state(const PerturbationState& s) const {
    if (!(s.grid() == grid_) || !(s.spec() == spec_)) throw InvalidArgument("state does not match the model");
    if (s.u.components.size() != std::size_t(grid_.dim)) throw InvalidArgument("velocity field has wrong rank");
    if (s.min_density() < kVacuumGuard)
      throw VacuumBreach("vacuum guard: min(1 + rho_pert) = " + std::to_string(s.min_density()));
  }

  void check_density(const detail::SpectralState& y) const {
    const auto r = fft_->inverse(y.rho);
    for (double x : r)
      if (1.0 + x < kVacuumGuard) throw VacuumBreach("vacuum guard breached inside a stage");
  }

  void truncate(std::vector<Complex>& v) const {
    for (std::size_t m = 0; m < v.size(); ++m)
      if (!fft_->retained(m)) v[m] = 0.0;
  }

  detail::SpectralState to_spectral(const PerturbationState& s) const {
    const auto& F = *fft_;
    detail::SpectralState y(F.spectral_size(), grid_.dim, spec_.basis_size());
    F.forward(s.rho.values, y.rho);
    truncate(y.rho);
    for (int a = 0; a < grid_.dim; ++a) {
      F.forward(s.u.components[a], y.u[a]);
      truncate(y.u[a]);
    }
    for (int k = 0; k < spec_.basis_size(); ++k) {
      F.forward(s.f.coefficient(k), y.f[k]);
      truncate(y.f[k]);
    }
    return y;
  }

  PerturbationState to_physical(const detail::SpectralState& y) const {
    const auto& F = *fft_;
    PerturbationState s(grid_, spec_);
    F.inverse(y.rho, s.rho.values);
    for (int a = 0; a < grid_.dim; ++a) F.inverse(y.u[a], s.u.components[a]);
    for (int k = 0; k < spec_.basis_size(); ++k) F.inverse(y.f[k], s.f.coefficient(k));
    return s;
  }

  std::vector<double> derivative(const std::vector<Complex>& yhat, int axis) const {
    std::vector<Complex> d(yhat.size());
    for (std::size_t m = 0; m < d.size(); ++m) d[m] = derivative_symbol(*fft_, m, axis, 1) * yhat[m];
    return fft_->inverse(d);
  }

  std::vector<double> dealiased(const std::vector<double>& v) const {
    auto h = fft_->forward(v);
    truncate(h);
    return fft_->inverse(h);
  }

  // Implicit operator: f_k -> -|k| f_k, and per axis the friction pair
  // u_a -> -(1 + mu xi^2) u_a + b_a, b_a -> u_a - b_a.
  detail::SpectralState implicit_part(const detail::SpectralState& y) const {
    const auto& F = *fft_;
    detail::SpectralState r(F.spectral_size(), grid_.dim, spec_.basis_size());
    for (int k = 0; k < spec_.basis_size(); ++k) {
      const double deg = HermiteSpec::total_degree(spec_.multi_index(k));
      if (deg == 0.0) continue;
      for (std::size_t m = 0; m < F.spectral_size(); ++m) r.f[k][m] = -deg * y.f[k][m];
    }
    for (int a = 0; a < grid_.dim; ++a) {
      const int kb = spec_.unit_index(a);
      for (std::size_t m = 0; m < F.spectral_size(); ++m) {
        const double xi2 = square_norm(F.wavevector(m));
        r.u[a][m] = -(1.0 + params_.mu * xi2) * y.u[a][m] + y.f[kb][m];
        r.f[kb][m] += y.u[a][m];
      }
    }
    return r;
  }

  // Solves (1 - h I) y_new = y in place.
  void implicit_solve(detail::SpectralState& y, double h) const {
    const auto& F = *fft_;
    for (int k = 0; k < spec_.basis_size(); ++k) {
      const MultiIndex mi = spec_.multi_index(k);
      const int deg = HermiteSpec::total_degree(mi);
      if (deg == 0 || is_unit(mi)) continue;
      const double s = 1.0 / (1.0 + h * deg);
      for (auto& c : y.f[k]) c *= s;
    }
    for (int a = 0; a < grid_.dim; ++a) {
      const int kb = spec_.unit_index(a);
      for (std::size_t m = 0; m < F.spectral_size(); ++m) {
        const double xi2 = square_norm(F.wavevector(m));
        const double m11 = 1.0 + h * (1.0 + params_.mu * xi2), m22 = 1.0 + h, off = -h;
        const double det = m11 * m22 - off * off;
        const Complex ru = y.u[a][m], rb = y.f[kb][m];
        y.u[a][m] = (m22 * ru - off * rb) / det;
        y.f[kb][m] = (m11 * rb - off * ru) / det;
      }
    }
  }

  detail::SpectralState explicit_part(const detail::SpectralState& y) const {
    const auto& F = *fft_;
    const int d = grid_.dim;
    const int nb = spec_.basis_size();
    const std::size_t np = F.real_size();
    const std::size_t ns = F.spectral_size();
    const double pp1 = params_.sound_speed_sq();

    detail::SpectralState out(ns, d, nb);

    // Linear explicit parts in Fourier space: -div u, -P'(1) grad rho, -v . grad_x f.
    for (std::size_t m = 0; m < ns; ++m) {
      for (int a = 0; a < d; ++a) {
        const Complex ik = derivative_symbol(F, m, a, 1);
        out.rho[m] -= ik * y.u[a][m];
        out.u[a][m] -= pp1 * ik * y.rho[m];
      }
    }
    for (int a = 0; a < d; ++a) {
      detail::for_each_raise(spec_, a, [&](int lo, int hi, double sq) {
        for (std::size_t m = 0; m < ns; ++m) {
          const Complex ik = derivative_symbol(F, m, a, 1);
          out.f[hi][m] -= sq * ik * y.f[lo][m];
          out.f[lo][m] -= sq * ik * y.f[hi][m];
        }
      });
    }

    // Physical-space nonlinear terms.
    const auto rho = F.inverse(y.rho);
    std::vector<std::vector<double>> u{std::size_t(d)}, f{std::size_t(nb)};
    for (int a = 0; a < d; ++a) u[a] = F.inverse(y.u[a]);
    for (int k = 0; k < nb; ++k) f[k] = F.inverse(y.f[k]);
    const auto& a0 = f[0];

    std::vector<double> pressure_excess(np), inv_rho_excess(np);
    for (std::size_t p = 0; p < np; ++p) {
      const auto pc = pressure_coeffs(rho[p], params_);
      pressure_excess[p] = pc.pp_over_rho - pp1;
      inv_rho_excess[p] = pc.visc_over_rho - 1.0;
    }
    pressure_excess = dealiased(pressure_excess);
    const bool viscous = params_.mu > 0.0;
    if (viscous) inv_rho_excess = dealiased(inv_rho_excess);

    std::vector<std::vector<double>> du{std::size_t(d * d)};  // du[a*d+b] = d_b u_a
    std::vector<std::vector<double>> drho{std::size_t(d)};
    for (int a = 0; a < d; ++a) {
      drho[a] = derivative(y.rho, a);
      for (int b = 0; b < d; ++b) du[a * d + b] = derivative(y.u[a], b);
    }

    std::vector<double> nrho(np, 0.0);
    for (std::size_t p = 0; p < np; ++p) {
      double div = 0.0, adv = 0.0;
      for (int a = 0; a < d; ++a) {
        div += du[a * d + a][p];
        adv += drho[a][p] * u[a][p];
      }
      nrho[p] = -rho[p] * div - adv;
    }
    accumulate(nrho, out.rho);

    for (int a = 0; a < d; ++a) {
      std::vector<double> nu(np, 0.0);
      std::vector<double> lap;
      if (viscous) {
        std::vector<Complex> l(ns);
        for (std::size_t m = 0; m < ns; ++m) l[m] = -square_norm(F.wavevector(m)) * y.u[a][m];
        lap = F.inverse(l);
      }
      for (std::size_t p = 0; p < np; ++p) {
        double adv = 0.0;
        for (int b = 0; b < d; ++b) adv += u[b][p] * du[a * d + b][p];
        double v = -adv - pressure_excess[p] * drho[a][p] - a0[p] * u[a][p];
        if (viscous) v += params_.mu * inv_rho_excess[p] * lap[p];
        nu[p] = v;
      }
      accumulate(nu, out.u[a]);
    }

    // f: A^dagger(u) f + rho_pert [L f + A^dagger(u) f + u . v sqrt(M)].
    std::vector<std::vector<double>> raised(std::size_t(nb), std::vector<double>(np, 0.0));
    for (int a = 0; a < d; ++a) {
      detail::for_each_raise(spec_, a, [&](int lo, int hi, double sq) {
        auto& dst = raised[hi];
        const auto& src = f[lo];
        for (std::size_t p = 0; p < np; ++p) dst[p] += sq * u[a][p] * src[p];
      });
    }
    std::vector<double> nf(np);
    for (int k = 0; k < nb; ++k) {
      const MultiIndex mi = spec_.multi_index(k);
      const double deg = HermiteSpec::total_degree(mi);
      const int axis = unit_axis(mi);
      const auto r = dealiased(raised[k]);
      for (std::size_t p = 0; p < np; ++p) {
        double inner = -deg * f[k][p] + r[p];
        if (axis >= 0) inner += u[axis][p];
        nf[p] = raised[k][p] + rho[p] * inner;
      }
      accumulate(nf, out.f[k]);
    }
    return out;
  }

  void accumulate(const std::vector<double>& phys, std::vector<Complex>& dst) const {
    auto h = fft_->forward(phys);
    for (std::size_t m = 0; m < h.size(); ++m)
      if (fft_->retained(m)) dst[m] += h[m];
  }

  bool is_unit(const MultiIndex& k) const { return unit_axis(k) >= 0; }
  int unit_axis(const MultiIndex& k) const {
    if (HermiteSpec::total_degree(k) != 1) return -1;
    for (int a = 0; a < 3; ++a)
      if (k[a] == 1) return a;
    return -1;
  }
  static double square_norm(const std::array<double, 3>& w) { return w[0] * w[0] + w[1] * w[1] + w[2] * w[2]; }

  SpatialGrid grid_;
  HermiteSpec spec_;
  SystemParams params_;
  std::shared_ptr<const Fourier> fft_;
};

inline Tendency rhs(const PerturbationState& s, const SystemParams& params) {
  return SystemModel(s.grid(), s.spec(), params).rhs(s);
}

inline PerturbationState imex_step(const PerturbationState& s, const SystemParams& params, double dt) {
  return SystemModel(s.grid(), s.spec(), params).imex_step(s, dt);
}

}  // namespace vfp
