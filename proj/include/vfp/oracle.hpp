#pragma once

// Brute-force Gauss-Hermite oracle for the velocity operators. Independent of
// the ladder-operator implementation in hermite.hpp: it samples the closed-form
// basis functions on a tensor node set, applies each operator by exact
// differentiation of He_k and re-projects. Used by the test suites and the
// `oracles` CLI command only.

#include "vfp/gauss_hermite.hpp"
#include "vfp/hermite.hpp"

#include <vector>

namespace vfp {

enum class OracleOp { fokker_planck, v_multiply, grad_v, nu_form, gamma };

namespace detail {

class OracleGrid {
 public:
  explicit OracleGrid(const HermiteSpec& spec) : spec_(spec) {
    spec.validate();
    if (spec.degree_cap > 16) throw InvalidArgument("quadrature oracle supports degree_cap <= 16");
    for (int a = 0; a < spec.velocity_dim; ++a) {
      const int cap = spec.axis_cap(a);
      rules_[a] = gauss_hermite(4 * cap + 8);
      auto& table = psi_[a];
      for (double x : rules_[a].nodes) table.push_back(normalized_hermite(cap + 2, x));
    }
    for (int a = spec.velocity_dim; a < 3; ++a) {
      rules_[a] = GaussHermiteRule{{0.0}, {1.0}};
      psi_[a] = {std::vector<double>(3, 0.0)};
      psi_[a][0][0] = 1.0;
    }
  }

  struct Sample {
    double weight;
    std::array<double, 3> x;
    double p;                     // polynomial part of the field, f / sqrt(M)
    std::array<double, 3> dp;     // d/dx_a p
    std::array<double, 3> d2p;    // d^2/dx_a^2 p
  };

  /// Calls fn(sample, node_id) on every tensor node.
  template <typename F>
  void for_each_node(const VelocityCoeffs<double>& c, F&& fn) const {
    const int n0 = int(rules_[0].nodes.size());
    const int n1 = int(rules_[1].nodes.size());
    const int n2 = int(rules_[2].nodes.size());
    const int nb = spec_.basis_size();
    for (int i2 = 0; i2 < n2; ++i2)
      for (int i1 = 0; i1 < n1; ++i1)
        for (int i0 = 0; i0 < n0; ++i0) {
          const std::array<int, 3> node{i0, i1, i2};
          Sample s{};
          s.weight = 1.0;
          for (int a = 0; a < 3; ++a) {
            s.weight *= rules_[a].weights[node[a]];
            s.x[a] = rules_[a].nodes[node[a]];
          }
          for (int b = 0; b < nb; ++b) {
            const double cb = c.coeffs[b];
            if (cb == 0.0) continue;
            const MultiIndex k = spec_.multi_index(b);
            std::array<double, 3> val{}, d1{}, d2{};
            for (int a = 0; a < 3; ++a) {
              const auto& psi = psi_[a][node[a]];
              const int ka = k[a];
              val[a] = psi[ka];
              d1[a] = ka >= 1 ? std::sqrt(double(ka)) * psi[ka - 1] : 0.0;
              d2[a] = ka >= 2 ? std::sqrt(double(ka) * (ka - 1)) * psi[ka - 2] : 0.0;
            }
            s.p += cb * val[0] * val[1] * val[2];
            s.dp[0] += cb * d1[0] * val[1] * val[2];
            s.dp[1] += cb * val[0] * d1[1] * val[2];
            s.dp[2] += cb * val[0] * val[1] * d1[2];
            s.d2p[0] += cb * d2[0] * val[1] * val[2];
            s.d2p[1] += cb * val[0] * d2[1] * val[2];
            s.d2p[2] += cb * val[0] * val[1] * d2[2];
          }
          fn(s, node);
        }
  }

  double basis_value(int b, const std::array<int, 3>& node) const {
    const MultiIndex k = spec_.multi_index(b);
    return psi_[0][node[0]][k[0]] * psi_[1][node[1]][k[1]] * psi_[2][node[2]][k[2]];
  }

  const HermiteSpec& spec() const { return spec_; }

 private:
  HermiteSpec spec_;
  std::array<GaussHermiteRule, 3> rules_;
  std::array<std::vector<std::vector<double>>, 3> psi_;
};

}  // namespace detail

/// Operator action by quadrature, re-projected onto the layout of `c`.
/// `op` must be fokker_planck, v_multiply or grad_v.
inline VelocityCoeffs<double> quadrature_oracle(const VelocityCoeffs<double>& c, OracleOp op,
                                                int axis = 0) {
  if (op == OracleOp::nu_form || op == OracleOp::gamma)
    throw InvalidArgument("functional oracle ops return scalars; use quadrature_functional");
  if (op != OracleOp::fokker_planck) detail::check_axis(c.spec, axis);
  const detail::OracleGrid grid(c.spec);
  VelocityCoeffs<double> out(c.spec);
  const int d = c.spec.velocity_dim;
  grid.for_each_node(c, [&](const detail::OracleGrid::Sample& s, const std::array<int, 3>& node) {
    double q = 0.0;  // polynomial part of the result
    switch (op) {
      case OracleOp::fokker_planck:
        // (1/sqrt M) div(M grad(f/sqrt M)) = sqrt(M) (p'' - v p')
        for (int a = 0; a < d; ++a) q += s.d2p[a] - s.x[a] * s.dp[a];
        break;
      case OracleOp::v_multiply:
        q = s.x[axis] * s.p;
        break;
      case OracleOp::grad_v:
        q = s.dp[axis] - 0.5 * s.x[axis] * s.p;
        break;
      default:
        break;
    }
    if (q == 0.0) return;
    for (int b = 0; b < c.spec.basis_size(); ++b) out.coeffs[b] += s.weight * grid.basis_value(b, node) * q;
  });
  return out;
}

/// Scalar functionals by quadrature: nu_form gives |c|_nu^2, gamma gives Gamma_ij(c).
inline double quadrature_functional(const VelocityCoeffs<double>& c, OracleOp op, int i = 0, int j = 0) {
  const detail::OracleGrid grid(c.spec);
  const int d = c.spec.velocity_dim;
  if (op == OracleOp::gamma) {
    detail::check_axis(c.spec, i);
    detail::check_axis(c.spec, j);
  } else if (op != OracleOp::nu_form) {
    throw InvalidArgument("operator oracle ops return coefficients; use quadrature_oracle");
  }
  double total = 0.0;
  grid.for_each_node(c, [&](const detail::OracleGrid::Sample& s, const std::array<int, 3>&) {
    if (op == OracleOp::nu_form) {
      double v2 = 0.0, g2 = 0.0;
      for (int a = 0; a < d; ++a) {
        v2 += s.x[a] * s.x[a];
        const double g = s.dp[a] - 0.5 * s.x[a] * s.p;
        g2 += g * g;
      }
      total += s.weight * (g2 + (1.0 + v2) * s.p * s.p);
    } else {
      total += s.weight * (s.x[i] * s.x[j] - (i == j ? 1.0 : 0.0)) * s.p;
    }
  });
  return total;
}

}  // namespace vfp
