#pragma once

// Gauss-Hermite rule for the weight M(v) = exp(-v^2/2)/sqrt(2 pi).

#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

namespace vfp {

struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // sum to 1
};

/// Normalized probabilists' Hermite polynomials psi_k = He_k / sqrt(k!) at x,
/// for k = 0..n (inclusive).
inline std::vector<double> normalized_hermite(int n, double x) {
  std::vector<double> psi(n + 1);
  psi[0] = 1.0;
  if (n >= 1) psi[1] = x;
  for (int k = 1; k < n; ++k)
    psi[k + 1] = (x * psi[k] - std::sqrt(double(k)) * psi[k - 1]) / std::sqrt(double(k + 1));
  return psi;
}

/// Golub-Welsch start, Newton polish on psi_n, weights 1 / (n psi_{n-1}(x)^2).
inline GaussHermiteRule gauss_hermite(int n) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(double(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi, Eigen::EigenvaluesOnly);

  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int j = 0; j < n; ++j) {
    double x = eig.eigenvalues()[j];
    for (int it = 0; it < 4; ++it) {
      const auto psi = normalized_hermite(n, x);
      // psi_n' = sqrt(n) psi_{n-1}
      const double dpsi = std::sqrt(double(n)) * psi[n - 1];
      x -= psi[n] / dpsi;
    }
    const auto psi = normalized_hermite(n, x);
    rule.nodes[j] = x;
    rule.weights[j] = 1.0 / (double(n) * psi[n - 1] * psi[n - 1]);
  }
  return rule;
}

}  // namespace vfp
