#pragma once

// Maxwellian-weighted Hermite representation of velocity profiles.
//
// Basis: phi_k(v) = He_k(v) sqrt(M(v)) / sqrt(k!) per axis (probabilists'
// Hermite), tensorized across axes. The basis is orthonormal in L^2(dv), so
// phi_0 = sqrt(M), phi_1 = v sqrt(M) and the density/momentum moments a, b
// are raw coefficients.

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace vfp {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using MultiIndex = std::array<int, 3>;

struct HermiteSpec {
  int degree_cap = 8;      // max degree on axis 0 (and on every axis when d_v = 1)
  int velocity_dim = 1;    // 1 or 3
  int transverse_cap = 1;  // max degree on axes 1, 2 when d_v = 3

  void validate() const {
    if (velocity_dim != 1 && velocity_dim != 3)
      throw InvalidArgument("velocity_dim must be 1 or 3");
    if (degree_cap < 2) throw InvalidArgument("degree_cap must be at least 2");
    if (velocity_dim == 3 && (transverse_cap < 0 || transverse_cap > 1))
      throw InvalidArgument("transverse_cap must be 0 or 1");
  }

  int axis_cap(int axis) const {
    if (axis == 0) return degree_cap;
    return velocity_dim == 3 ? transverse_cap : 0;
  }

  int stride(int axis) const {
    int s = 1;
    for (int a = 0; a < axis; ++a) s *= axis_cap(a) + 1;
    return s;
  }

  int basis_size() const {
    int s = 1;
    for (int a = 0; a < velocity_dim; ++a) s *= axis_cap(a) + 1;
    return s;
  }

  bool contains(const MultiIndex& k) const {
    for (int a = 0; a < 3; ++a) {
      const int cap = a < velocity_dim ? axis_cap(a) : 0;
      if (k[a] < 0 || k[a] > cap) return false;
    }
    return true;
  }

  int index(const MultiIndex& k) const {
    int idx = 0;
    for (int a = 0; a < velocity_dim; ++a) idx += k[a] * stride(a);
    return idx;
  }

  MultiIndex multi_index(int idx) const {
    MultiIndex k{0, 0, 0};
    for (int a = 0; a < velocity_dim; ++a) {
      const int n = axis_cap(a) + 1;
      k[a] = idx % n;
      idx /= n;
    }
    return k;
  }

  /// Index of the unit multi-index e_axis (the b_axis moment).
  int unit_index(int axis) const { return stride(axis); }

  static int total_degree(const MultiIndex& k) { return k[0] + k[1] + k[2]; }

  /// Same layout family with every axis cap raised by `extra`. Used internally
  /// to evaluate quadratic forms without truncation loss.
  HermiteSpec widened(int extra) const {
    HermiteSpec w = *this;
    w.degree_cap += extra;
    if (velocity_dim == 3) w.transverse_cap += extra;
    return w;
  }

  friend bool operator==(const HermiteSpec&, const HermiteSpec&) = default;
};

template <typename Scalar>
using CoeffVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar = double>
struct VelocityCoeffs {
  HermiteSpec spec;
  CoeffVector<Scalar> coeffs;

  VelocityCoeffs() = default;
  explicit VelocityCoeffs(const HermiteSpec& s)
      : spec(s), coeffs(CoeffVector<Scalar>::Zero(s.basis_size())) {}
  VelocityCoeffs(const HermiteSpec& s, CoeffVector<Scalar> c) : spec(s), coeffs(std::move(c)) {
    if (coeffs.size() != spec.basis_size())
      throw InvalidArgument("coefficient vector does not match basis size");
  }

  static VelocityCoeffs unit(const HermiteSpec& s, const MultiIndex& k) {
    VelocityCoeffs c(s);
    c.coeffs[s.index(k)] = Scalar(1);
    return c;
  }
  static VelocityCoeffs unit(const HermiteSpec& s, int k0) { return unit(s, MultiIndex{k0, 0, 0}); }

  Scalar& operator[](const MultiIndex& k) { return coeffs[spec.index(k)]; }
  const Scalar& operator[](const MultiIndex& k) const { return coeffs[spec.index(k)]; }

  bool all_finite() const {
    for (Eigen::Index i = 0; i < coeffs.size(); ++i)
      if (!std::isfinite(std::abs(coeffs[i]))) return false;
    return true;
  }
};

template <typename Scalar>
struct MomentPair {
  Scalar a{};
  std::array<Scalar, 3> b{};
};

template <typename Scalar>
struct MacroMicro {
  VelocityCoeffs<Scalar> macro;
  VelocityCoeffs<Scalar> micro;
  MomentPair<Scalar> moments;
};

namespace detail {

inline double abs2(double x) { return x * x; }
inline double abs2(const std::complex<double>& z) { return std::norm(z); }

inline void check_axis(const HermiteSpec& s, int axis) {
  if (axis < 0 || axis >= s.velocity_dim) throw InvalidArgument("velocity axis out of range");
}

// Visits every (source index, target index, sqrt factor) pair of the
// raising ladder along `axis`: target = source + e_axis, factor sqrt(k+1).
template <typename F>
void for_each_raise(const HermiteSpec& s, int axis, F&& fn) {
  const int st = s.stride(axis);
  const int cap = s.axis_cap(axis);
  const int n = s.basis_size();
  for (int idx = 0; idx < n; ++idx) {
    const int k = (idx / st) % (cap + 1);
    if (k + 1 <= cap) fn(idx, idx + st, std::sqrt(double(k + 1)));
  }
}

}  // namespace detail

/// Copies `c` into the (larger or smaller) layout `target`; coefficients that do
/// not fit are dropped.
template <typename Scalar>
VelocityCoeffs<Scalar> reshape(const VelocityCoeffs<Scalar>& c, const HermiteSpec& target) {
  if (c.spec.velocity_dim != target.velocity_dim)
    throw InvalidArgument("cannot reshape across velocity dimensions");
  VelocityCoeffs<Scalar> out(target);
  for (int i = 0; i < c.spec.basis_size(); ++i) {
    const MultiIndex k = c.spec.multi_index(i);
    if (target.contains(k)) out.coeffs[target.index(k)] = c.coeffs[i];
  }
  return out;
}

/// Linearized Fokker-Planck operator; diagonal with eigenvalue -|k|_1.
template <typename Scalar>
VelocityCoeffs<Scalar> apply_fokker_planck(const VelocityCoeffs<Scalar>& c) {
  VelocityCoeffs<Scalar> out(c.spec);
  for (int i = 0; i < c.spec.basis_size(); ++i)
    out.coeffs[i] = -double(HermiteSpec::total_degree(c.spec.multi_index(i))) * c.coeffs[i];
  return out;
}

/// v_axis * c. Tridiagonal: (v phi_k) = sqrt(k+1) phi_{k+1} + sqrt(k) phi_{k-1}.
template <typename Scalar>
VelocityCoeffs<Scalar> apply_v_multiply(const VelocityCoeffs<Scalar>& c, int axis) {
  detail::check_axis(c.spec, axis);
  VelocityCoeffs<Scalar> out(c.spec);
  detail::for_each_raise(c.spec, axis, [&](int lo, int hi, double f) {
    out.coeffs[hi] += f * c.coeffs[lo];
    out.coeffs[lo] += f * c.coeffs[hi];
  });
  return out;
}

/// d/dv_axis c. d/dv phi_k = (sqrt(k)/2) phi_{k-1} - (sqrt(k+1)/2) phi_{k+1}.
template <typename Scalar>
VelocityCoeffs<Scalar> apply_grad_v(const VelocityCoeffs<Scalar>& c, int axis) {
  detail::check_axis(c.spec, axis);
  VelocityCoeffs<Scalar> out(c.spec);
  detail::for_each_raise(c.spec, axis, [&](int lo, int hi, double f) {
    const double h = 0.5 * f;
    out.coeffs[hi] += -h * c.coeffs[lo];
    out.coeffs[lo] += h * c.coeffs[hi];
  });
  return out;
}

/// sum_axis w_axis A^dagger_axis c, i.e. (-w . grad_v + w . v / 2) c.
template <typename Scalar, typename WeightScalar>
VelocityCoeffs<Scalar> apply_raising(const VelocityCoeffs<Scalar>& c,
                                     const std::array<WeightScalar, 3>& w) {
  VelocityCoeffs<Scalar> out(c.spec);
  for (int axis = 0; axis < c.spec.velocity_dim; ++axis) {
    if (w[axis] == WeightScalar(0)) continue;
    detail::for_each_raise(c.spec, axis, [&](int lo, int hi, double f) {
      out.coeffs[hi] += w[axis] * (f * c.coeffs[lo]);
    });
  }
  return out;
}

template <typename Scalar>
MomentPair<Scalar> moments(const VelocityCoeffs<Scalar>& c) {
  MomentPair<Scalar> m;
  m.a = c.coeffs[0];
  for (int axis = 0; axis < c.spec.velocity_dim; ++axis) m.b[axis] = c.coeffs[c.spec.unit_index(axis)];
  return m;
}

/// Macro-micro split f = P f + (I - P) f with P onto span{sqrt(M), v sqrt(M)}.
template <typename Scalar>
MacroMicro<Scalar> project_macro(const VelocityCoeffs<Scalar>& c) {
  MacroMicro<Scalar> r{VelocityCoeffs<Scalar>(c.spec), c, moments(c)};
  r.macro.coeffs[0] = r.moments.a;
  r.micro.coeffs[0] = Scalar(0);
  for (int axis = 0; axis < c.spec.velocity_dim; ++axis) {
    const int i = c.spec.unit_index(axis);
    r.macro.coeffs[i] = r.moments.b[axis];
    r.micro.coeffs[i] = Scalar(0);
  }
  return r;
}

/// (I - P_0) c: removes only the density component.
template <typename Scalar>
VelocityCoeffs<Scalar> remove_density(VelocityCoeffs<Scalar> c) {
  c.coeffs[0] = Scalar(0);
  return c;
}

template <typename Scalar>
double l2_norm_sq(const VelocityCoeffs<Scalar>& c) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < c.coeffs.size(); ++i) s += detail::abs2(c.coeffs[i]);
  return s;
}

/// |c|_nu^2 = int |grad_v c|^2 + (1 + |v|^2) |c|^2 dv, exact for the truncated
/// field (operators act with one degree of headroom).
template <typename Scalar>
double nu_norm_sq(const VelocityCoeffs<Scalar>& c) {
  const auto wide = reshape(c, c.spec.widened(1));
  double total = l2_norm_sq(c);
  for (int axis = 0; axis < c.spec.velocity_dim; ++axis) {
    total += l2_norm_sq(apply_grad_v(wide, axis));
    total += l2_norm_sq(apply_v_multiply(wide, axis));
  }
  return total;
}

/// Gamma_ij(c) = < (v_i v_j - delta_ij) sqrt(M), c >.
template <typename Scalar>
Scalar gamma_moment(const VelocityCoeffs<Scalar>& c, int i, int j) {
  detail::check_axis(c.spec, i);
  detail::check_axis(c.spec, j);
  MultiIndex k{0, 0, 0};
  double factor = 1.0;
  if (i == j) {
    k[i] = 2;
    factor = std::sqrt(2.0);
  } else {
    k[i] = 1;
    k[j] = 1;
  }
  if (!c.spec.contains(k)) return Scalar(0);
  return factor * c[k];
}

}  // namespace vfp
