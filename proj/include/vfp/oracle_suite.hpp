#pragma once

// Reproducible table of every operator/transform oracle comparison.

#include "vfp/hermite.hpp"
#include "vfp/oracle.hpp"
#include "vfp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace vfp {

struct OracleCheck {
  std::string name;
  double error = 0.0;
  double tolerance = 0.0;
  bool passed() const { return error <= tolerance; }
};

namespace detail {

inline double max_abs_diff(const VelocityCoeffs<double>& a, const VelocityCoeffs<double>& b) {
  return (a.coeffs - b.coeffs).cwiseAbs().maxCoeff();
}

inline std::string spec_label(const HermiteSpec& s) {
  return "dv" + std::to_string(s.velocity_dim) + "_cap" + std::to_string(s.degree_cap);
}

inline void hermite_checks(const HermiteSpec& s, std::vector<OracleCheck>& out, double tol) {
  double fp = 0.0, vm = 0.0, gv = 0.0, nu = 0.0, ga = 0.0;
  std::mt19937_64 rng(std::uint64_t(s.basis_size()));
  std::normal_distribution<double> normal;
  std::vector<VelocityCoeffs<double>> probes;
  for (int i = 0; i < s.basis_size(); ++i) probes.push_back(VelocityCoeffs<double>::unit(s, s.multi_index(i)));
  for (int r = 0; r < 4; ++r) {
    VelocityCoeffs<double> c(s);
    for (auto& x : c.coeffs) x = normal(rng);
    probes.push_back(c);
  }
  for (const auto& c : probes) {
    fp = std::max(fp, max_abs_diff(apply_fokker_planck(c), quadrature_oracle(c, OracleOp::fokker_planck)));
    for (int a = 0; a < s.velocity_dim; ++a) {
      vm = std::max(vm, max_abs_diff(apply_v_multiply(c, a), quadrature_oracle(c, OracleOp::v_multiply, a)));
      gv = std::max(gv, max_abs_diff(apply_grad_v(c, a), quadrature_oracle(c, OracleOp::grad_v, a)));
      for (int b = 0; b < s.velocity_dim; ++b)
        ga = std::max(ga, std::abs(gamma_moment(c, a, b) - quadrature_functional(c, OracleOp::gamma, a, b)));
    }
    const double n = nu_norm_sq(c);
    nu = std::max(nu, std::abs(n - quadrature_functional(c, OracleOp::nu_form)) / n);
  }
  const auto label = spec_label(s);
  out.push_back({"fokker_planck_" + label, fp, tol});
  out.push_back({"v_multiply_" + label, vm, tol});
  out.push_back({"grad_v_" + label, gv, tol});
  out.push_back({"gamma_moment_" + label, ga, tol});
  out.push_back({"nu_norm_rel_" + label, nu, tol});
}

}  // namespace detail

inline std::vector<OracleCheck> run_oracle_suite(double tol = 1e-10) {
  std::vector<OracleCheck> out;
  for (int cap : {2, 4, 8, 12, 16}) detail::hermite_checks(HermiteSpec{cap, 1, 1}, out, tol);
  for (int cap : {4, 8}) detail::hermite_checks(HermiteSpec{cap, 3, 1}, out, tol);

  // spectral derivative of a band-limited field and Parseval
  const SpatialGrid g{1, 64, 2 * std::numbers::pi};
  const Fourier F(g);
  std::vector<double> f(g.size()), df(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) {
    const double x = g.coordinate(p, 0);
    f[p] = std::sin(3 * x) + 0.5 * std::cos(7 * x);
    df[p] = 3 * std::cos(3 * x) - 3.5 * std::sin(7 * x);
  }
  const auto d1 = spectral_derivative(F, f, 0, 1);
  double derr = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) derr = std::max(derr, std::abs(d1[p] - df[p]));
  out.push_back({"spectral_derivative_1d", derr, 1e-12});
  out.push_back({"parseval_1d", std::abs(sobolev_norm_sq(F, f, 0) - grid_l2_sq(g, f)) / grid_l2_sq(g, f), 1e-13});
  out.push_back({"sobolev_h1_sine", std::abs(sobolev_norm_sq(F, f, 1) - std::numbers::pi * (1 + 9 + 0.25 * (1 + 49))),
                 1e-11});
  const auto split = freq_split(F, f, 4.0);
  double serr = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) serr = std::max(serr, std::abs(split.low[p] + split.high[p] - f[p]));
  out.push_back({"freq_split_reconstruction", serr, 1e-14});
  return out;
}

}  // namespace vfp
