#include "vfp/coercivity.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace vfp;

TEST(Coercivity, WeakConstantIsUniformInCap) {
  std::vector<double> sharp;
  for (int cap : {4, 8, 16}) {
    const auto r = sample_coercivity(HermiteSpec{cap, 1, 1}, CoercivityForm::weak, 200, 11);
    EXPECT_GT(r.sharp, 0.0);
    EXPECT_EQ(r.violations, 0);
    EXPECT_GE(r.lambda0, r.sharp);
    sharp.push_back(r.sharp);
  }
  EXPECT_LT((sharp.front() - sharp.back()) / sharp.back(), 0.2);
}

TEST(Coercivity, StrongConstantIsUniformInCap) {
  for (int dv : {1, 3}) {
    double lo = 1e9, hi = 0.0;
    for (int cap : {4, 8, 16}) {
      const auto r = sample_coercivity(HermiteSpec{cap, dv, 1}, CoercivityForm::strong, 200, 12);
      EXPECT_EQ(r.violations, 0);
      lo = std::min(lo, r.sharp);
      hi = std::max(hi, r.sharp);
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LT((hi - lo) / lo, 0.2);
  }
}

TEST(Coercivity, SharpConstantIsAttained) {
  // the ratio at the minimizing generalized eigenvector equals the constant
  const HermiteSpec spec{6, 1, 1};
  const double lam = coercivity_constant(spec, CoercivityForm::weak);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  double best = 1e9;
  for (int s = 0; s < 20000; ++s) {
    VelocityCoeffs<double> c(spec);
    for (int k = 1; k < spec.basis_size(); ++k) c.coeffs[k] = normal(rng) / (k * k);
    const double ratio = -apply_fokker_planck(c).coeffs.dot(c.coeffs) / nu_norm_sq(remove_density(c));
    best = std::min(best, ratio);
  }
  EXPECT_GE(best, lam * (1 - 1e-12));
  EXPECT_LT(best, lam * 1.1);
}

TEST(Coercivity, DegreeTwoBound) {
  // e_2 alone: -<L e2, e2> = 2 against |e2|_nu^2 = 7.25
  const HermiteSpec spec{2, 1, 1};
  const auto e2 = VelocityCoeffs<double>::unit(spec, 2);
  EXPECT_NEAR(nu_norm_sq(e2), 7.25, 1e-13);
  EXPECT_NEAR(coercivity_constant(spec, CoercivityForm::strong), 2.0 / 7.25, 1e-13);
}
