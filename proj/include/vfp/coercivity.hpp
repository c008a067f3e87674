#pragma once

// Coercivity of -L against the nu-norm on the truncated Hermite space.
//   weak:   -<L c, c> >= lambda0 |c - P0 c|_nu^2
//   strong: -<L c, c> >= lambda0 |{I-P} c|_nu^2 + |b|^2

#include "vfp/hermite.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace vfp {

enum class CoercivityForm { weak, strong };

namespace detail {

// Indices spanning the subspace on which the nu-norm is measured.
inline std::vector<int> coercive_support(const HermiteSpec& spec, CoercivityForm form) {
  std::vector<int> idx;
  for (int k = 1; k < spec.basis_size(); ++k) {
    if (form == CoercivityForm::strong && HermiteSpec::total_degree(spec.multi_index(k)) == 1) continue;
    idx.push_back(k);
  }
  return idx;
}

inline Eigen::MatrixXd nu_gram(const HermiteSpec& spec, const std::vector<int>& idx) {
  const auto n = Eigen::Index(idx.size());
  Eigen::MatrixXd G(n, n);
  auto unit = [&](int k) { return VelocityCoeffs<double>::unit(spec, spec.multi_index(k)); };
  for (Eigen::Index i = 0; i < n; ++i) G(i, i) = nu_norm_sq(unit(idx[i]));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      auto c = unit(idx[i]);
      c.coeffs[idx[j]] = 1.0;
      G(i, j) = G(j, i) = 0.5 * (nu_norm_sq(c) - G(i, i) - G(j, j));
    }
  return G;
}

}  // namespace detail

/// Sharp constant: smallest generalized eigenvalue of (-L, nu) on the support.
inline double coercivity_constant(const HermiteSpec& spec, CoercivityForm form) {
  spec.validate();
  const auto idx = detail::coercive_support(spec, form);
  const auto n = Eigen::Index(idx.size());
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) D(i, i) = HermiteSpec::total_degree(spec.multi_index(idx[i]));
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(D, detail::nu_gram(spec, idx));
  if (es.info() != Eigen::Success) throw std::runtime_error("coercivity eigenproblem failed");
  return es.eigenvalues().minCoeff();
}

struct CoercivitySample {
  double lambda0 = 0.0;     // smallest observed ratio
  double sharp = 0.0;       // coercivity_constant
  int samples = 0;
  int violations = 0;       // samples below the sharp constant (beyond rounding)
};

/// Ratio (-<L c, c> - [strong] |b|^2) / |micro(c)|_nu^2 over random c with
/// i.i.d. standard normal coefficients.
inline CoercivitySample sample_coercivity(const HermiteSpec& spec, CoercivityForm form, int samples,
                                          std::uint64_t seed) {
  spec.validate();
  if (samples < 1) throw InvalidArgument("samples must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  CoercivitySample out;
  out.sharp = coercivity_constant(spec, form);
  out.samples = samples;
  out.lambda0 = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    VelocityCoeffs<double> c(spec);
    for (auto& x : c.coeffs) x = normal(rng);
    double lhs = -apply_fokker_planck(c).coeffs.dot(c.coeffs);
    VelocityCoeffs<double> part(spec);
    if (form == CoercivityForm::weak) {
      part = remove_density(c);
    } else {
      const auto mm = project_macro(c);
      part = mm.micro;
      for (int a = 0; a < spec.velocity_dim; ++a) lhs -= mm.moments.b[a] * mm.moments.b[a];
    }
    const double ratio = lhs / nu_norm_sq(part);
    out.lambda0 = std::min(out.lambda0, ratio);
    if (ratio < out.sharp * (1.0 - 1e-12)) ++out.violations;
  }
  return out;
}

}  // namespace vfp
