#pragma once

// Periodic Fourier pseudospectral machinery on [0, L)^d, d in {1, 3}.
//
// Transforms are real-to-complex FFTW plans. Forward transforms are
// unnormalized, inverse transforms carry the 1/n^d factor. The halved axis of
// the r2c layout is axis 0 (x), which is also the fastest-varying axis of the
// physical point index p = i0 + n (i1 + n i2).

#include "vfp/hermite.hpp"

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

namespace vfp {

using Complex = std::complex<double>;

struct SpatialGrid {
  int dim = 1;
  int points = 64;  // per axis, power of two
  double length = 2.0 * std::numbers::pi;

  void validate() const {
    if (dim != 1 && dim != 3) throw InvalidArgument("space_dim must be 1 or 3");
    if (points < 8) throw InvalidArgument("points_per_axis must be at least 8");
    if ((points & (points - 1)) != 0) throw InvalidArgument("points_per_axis must be a power of two");
    if (!(length > 0.0) || !std::isfinite(length)) throw InvalidArgument("domain_length must be positive");
  }

  std::size_t size() const {
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= std::size_t(points);
    return s;
  }
  double spacing() const { return length / points; }
  double volume() const { return std::pow(length, dim); }
  double cell_volume() const { return volume() / double(size()); }

  double coordinate(std::size_t p, int axis) const {
    for (int a = 0; a < axis; ++a) p /= std::size_t(points);
    return spacing() * double(p % std::size_t(points));
  }

  friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;
};

struct ScalarField {
  SpatialGrid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const SpatialGrid& g) : grid(g), values(g.size(), 0.0) {}
};

struct VectorField {
  SpatialGrid grid;
  std::vector<std::vector<double>> components;  // grid.dim components

  VectorField() = default;
  explicit VectorField(const SpatialGrid& g)
      : grid(g), components(std::size_t(g.dim), std::vector<double>(g.size(), 0.0)) {}
};

/// f(x, v) stored coefficient-major: values[k * npoints + p].
struct KineticField {
  SpatialGrid grid;
  HermiteSpec spec;
  std::vector<double> values;

  KineticField() = default;
  KineticField(const SpatialGrid& g, const HermiteSpec& s)
      : grid(g), spec(s), values(g.size() * std::size_t(s.basis_size()), 0.0) {}

  std::size_t npoints() const { return grid.size(); }
  std::span<double> coefficient(int k) { return {values.data() + std::size_t(k) * npoints(), npoints()}; }
  std::span<const double> coefficient(int k) const {
    return {values.data() + std::size_t(k) * npoints(), npoints()};
  }

  VelocityCoeffs<double> at(std::size_t p) const {
    VelocityCoeffs<double> c(spec);
    for (int k = 0; k < spec.basis_size(); ++k) c.coeffs[k] = values[std::size_t(k) * npoints() + p];
    return c;
  }
  void set(std::size_t p, const VelocityCoeffs<double>& c) {
    for (int k = 0; k < spec.basis_size(); ++k) values[std::size_t(k) * npoints() + p] = c.coeffs[k];
  }
};

namespace detail {
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    if (p) fftw_destroy_plan(p);
  }
};
using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;
}  // namespace detail

/// Immutable transform context for one grid. Execution is thread-safe.
class Fourier {
 public:
  explicit Fourier(const SpatialGrid& g) : grid_(g) {
    g.validate();
    const int n = g.points;
    half_ = n / 2 + 1;
    nreal_ = g.size();
    nspec_ = nreal_ / std::size_t(n) * std::size_t(half_);

    std::vector<double> rbuf(nreal_);
    std::vector<Complex> cbuf(nspec_);
    auto* cptr = reinterpret_cast<fftw_complex*>(cbuf.data());
    std::array<int, 3> dims{n, n, n};
    {
      std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
      const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
      fwd_.reset(fftw_plan_dft_r2c(g.dim, dims.data(), rbuf.data(), cptr, flags));
      inv_.reset(fftw_plan_dft_c2r(g.dim, dims.data(), cptr, rbuf.data(), flags));
    }

    const double k0 = 2.0 * std::numbers::pi / g.length;
    modes_.resize(nspec_);
    wave_.resize(nspec_);
    mult_.resize(nspec_);
    for (std::size_t m = 0; m < nspec_; ++m) {
      std::array<int, 3> j{0, 0, 0};
      std::size_t r = m;
      j[0] = int(r % std::size_t(half_));
      r /= std::size_t(half_);
      for (int a = 1; a < g.dim; ++a) {
        j[a] = int(r % std::size_t(n));
        r /= std::size_t(n);
      }
      std::array<int, 3> k{0, 0, 0};
      k[0] = j[0];
      for (int a = 1; a < g.dim; ++a) k[a] = j[a] <= n / 2 ? j[a] : j[a] - n;
      modes_[m] = k;
      for (int a = 0; a < 3; ++a) wave_[m][a] = k0 * k[a];
      mult_[m] = (j[0] == 0 || j[0] == n / 2) ? 1.0 : 2.0;
    }
  }

  const SpatialGrid& grid() const { return grid_; }
  std::size_t real_size() const { return nreal_; }
  std::size_t spectral_size() const { return nspec_; }

  /// Integer wavenumbers (axis 0 non-negative) of spectral slot m.
  const std::array<int, 3>& mode(std::size_t m) const { return modes_[m]; }
  /// Physical wavevector 2 pi k / L of slot m.
  const std::array<double, 3>& wavevector(std::size_t m) const { return wave_[m]; }
  double wavenumber_norm(std::size_t m) const {
    const auto& w = wave_[m];
    return std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
  }
  /// 2 for slots standing in for a conjugate pair, 1 otherwise.
  double multiplicity(std::size_t m) const { return mult_[m]; }

  bool is_nyquist(std::size_t m, int axis) const { return std::abs(modes_[m][axis]) * 2 == grid_.points; }

  /// 2/3 rule: retained iff 3 |k_a| < n on every axis.
  bool retained(std::size_t m) const {
    for (int a = 0; a < grid_.dim; ++a)
      if (3 * std::abs(modes_[m][a]) >= grid_.points) return false;
    return true;
  }

  void forward(std::span<const double> in, std::span<Complex> out) const {
    check(in.size() == nreal_ && out.size() == nspec_);
    fftw_execute_dft_r2c(fwd_.get(), const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
  }
  std::vector<Complex> forward(std::span<const double> in) const {
    std::vector<Complex> out(nspec_);
    forward(in, out);
    return out;
  }

  /// Normalized inverse; the input spectrum is left untouched.
  void inverse(std::span<const Complex> in, std::span<double> out) const {
    check(in.size() == nspec_ && out.size() == nreal_);
    std::vector<Complex> scratch(in.begin(), in.end());
    fftw_execute_dft_c2r(inv_.get(), reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
    const double scale = 1.0 / double(nreal_);
    for (double& x : out) x *= scale;
  }
  std::vector<double> inverse(std::span<const Complex> in) const {
    std::vector<double> out(nreal_);
    inverse(in, out);
    return out;
  }

 private:
  static void check(bool ok) {
    if (!ok) throw InvalidArgument("array size does not match the transform");
  }

  SpatialGrid grid_;
  int half_ = 0;
  std::size_t nreal_ = 0, nspec_ = 0;
  detail::PlanHandle fwd_, inv_;
  std::vector<std::array<int, 3>> modes_;
  std::vector<std::array<double, 3>> wave_;
  std::vector<double> mult_;
};

// ---------------------------------------------------------------------------
// Spectral multipliers

/// Multiplier of d^order/dx_axis^order at slot m (odd derivatives drop the
/// Nyquist mode, whose derivative vanishes on the grid).
inline Complex derivative_symbol(const Fourier& F, std::size_t m, int axis, int order) {
  const double k = F.wavevector(m)[axis];
  if (order % 2 == 1 && F.is_nyquist(m, axis)) return 0.0;
  Complex s = 1.0;
  for (int i = 0; i < order; ++i) s *= Complex(0.0, k);
  return s;
}

inline std::vector<double> spectral_derivative(const Fourier& F, std::span<const double> field, int axis,
                                               int order) {
  if (order != 1 && order != 2) throw InvalidArgument("derivative order must be 1 or 2");
  if (axis < 0 || axis >= F.grid().dim) throw InvalidArgument("spatial axis out of range");
  auto spec = F.forward(field);
  for (std::size_t m = 0; m < spec.size(); ++m) spec[m] *= derivative_symbol(F, m, axis, order);
  return F.inverse(spec);
}

inline ScalarField spectral_derivative(const Fourier& F, const ScalarField& f, int axis, int order) {
  ScalarField out(f.grid);
  out.values = spectral_derivative(F, f.values, axis, order);
  return out;
}

inline std::vector<double> dealias(const Fourier& F, std::span<const double> field) {
  auto spec = F.forward(field);
  for (std::size_t m = 0; m < spec.size(); ++m)
    if (!F.retained(m)) spec[m] = 0.0;
  return F.inverse(spec);
}

/// Smooth radial cutoff: 1 for rho <= 1/2, 0 for rho >= 1,
/// exp(1 - 1/(1 - (2 rho - 1)^2)) in between.
inline double low_frequency_profile(double rho) {
  if (rho <= 0.5) return 1.0;
  if (rho >= 1.0) return 0.0;
  const double s = 2.0 * rho - 1.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

struct FrequencySplit {
  std::vector<double> low;
  std::vector<double> high;
};

inline FrequencySplit freq_split(const Fourier& F, std::span<const double> field, double r0) {
  if (!(r0 > 0.0)) throw InvalidArgument("r0 must be positive");
  auto spec = F.forward(field);
  for (std::size_t m = 0; m < spec.size(); ++m) spec[m] *= low_frequency_profile(F.wavenumber_norm(m) / r0);
  FrequencySplit out;
  out.low = F.inverse(spec);
  out.high.resize(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    out.high[i] = field[i] - out.low[i];
    double lo = field[i] - out.high[i];
    // nudge by ulps so that low + high reproduces the field exactly
    for (int it = 0; it < 8 && lo + out.high[i] != field[i]; ++it)
      lo = std::nextafter(lo, lo + out.high[i] < field[i] ? HUGE_VAL : -HUGE_VAL);
    out.low[i] = lo;
  }
  return out;
}

/// Constants realized by the cutoff on this grid:
///   |g^H| <= (high_over_grad / r0) |grad g|,  |grad^2 g^L| <= low_curvature * r0 |grad g^L|.
struct CutoffConstants {
  double high_over_grad = 0.0;
  double low_curvature = 0.0;
};

inline CutoffConstants cutoff_constants(const Fourier& F, double r0) {
  CutoffConstants c;
  for (std::size_t m = 0; m < F.spectral_size(); ++m) {
    const double xi = F.wavenumber_norm(m);
    if (xi == 0.0) continue;
    const double lo = low_frequency_profile(xi / r0);
    c.high_over_grad = std::max(c.high_over_grad, (1.0 - lo) * r0 / xi);
    if (lo > 0.0) c.low_curvature = std::max(c.low_curvature, xi / r0);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Sobolev norms

/// sum_{|alpha| <= s} prod_a xi_a^(2 alpha_a): the symbol of sum_alpha |d^alpha g|^2.
inline double sobolev_weight(const std::array<double, 3>& xi, int dim, int s) {
  if (s < 0) return 0.0;
  std::array<double, 3> x2{xi[0] * xi[0], xi[1] * xi[1], xi[2] * xi[2]};
  double total = 0.0;
  if (dim == 1) {
    double p = 1.0;
    for (int i = 0; i <= s; ++i, p *= x2[0]) total += p;
    return total;
  }
  double p0 = 1.0;
  for (int a0 = 0; a0 <= s; ++a0, p0 *= x2[0]) {
    double p1 = 1.0;
    for (int a1 = 0; a0 + a1 <= s; ++a1, p1 *= x2[1]) {
      double p2 = 1.0;
      for (int a2 = 0; a0 + a1 + a2 <= s; ++a2, p2 *= x2[2]) total += p0 * p1 * p2;
    }
  }
  return total;
}

/// Parseval factor turning sum_m mult |g_hat|^2 into int |g|^2 dx.
inline double parseval_factor(const Fourier& F) {
  const double n = double(F.real_size());
  return F.grid().volume() / (n * n);
}

/// int over the torus of sum_m weight(m) |g_hat_m|^2, with the conjugate-pair
/// multiplicity folded in.
template <typename Weight>
double weighted_spectral_sum(const Fourier& F, std::span<const Complex> ghat, Weight&& weight) {
  double total = 0.0;
  for (std::size_t m = 0; m < ghat.size(); ++m) {
    const double w = weight(m);
    if (w != 0.0) total += F.multiplicity(m) * w * std::norm(ghat[m]);
  }
  return total * parseval_factor(F);
}

inline void check_sobolev_order(int s) {
  if (s < 0 || s > 3) throw InvalidArgument("Sobolev order must lie in [0, 3]");
}

/// ||g||_{H^s}^2 = sum_{|alpha| <= s} ||d^alpha g||_{L^2}^2.
inline double sobolev_norm_sq(const Fourier& F, std::span<const double> field, int s) {
  check_sobolev_order(s);
  const auto ghat = F.forward(field);
  const int d = F.grid().dim;
  return weighted_spectral_sum(F, ghat, [&](std::size_t m) { return sobolev_weight(F.wavevector(m), d, s); });
}

inline double sobolev_norm_sq(const Fourier& F, const ScalarField& f, int s) { return sobolev_norm_sq(F, f.values, s); }

inline double sobolev_norm_sq(const Fourier& F, const VectorField& u, int s) {
  double total = 0.0;
  for (const auto& c : u.components) total += sobolev_norm_sq(F, c, s);
  return total;
}

/// Velocity multi-indices beta with |beta| <= order (only axes < d_v).
inline std::vector<MultiIndex> velocity_multi_indices(int velocity_dim, int order) {
  std::vector<MultiIndex> out;
  const int c1 = velocity_dim == 3 ? order : 0;
  for (int b0 = 0; b0 <= order; ++b0)
    for (int b1 = 0; b1 <= c1 && b0 + b1 <= order; ++b1)
      for (int b2 = 0; b2 <= c1 && b0 + b1 + b2 <= order; ++b2) out.push_back({b0, b1, b2});
  return out;
}

/// d_v^beta c, evaluated on a layout wide enough to hold the exact result.
template <typename Scalar>
VelocityCoeffs<Scalar> velocity_derivative(const VelocityCoeffs<Scalar>& c, const MultiIndex& beta) {
  auto out = reshape(c, c.spec.widened(beta[0] + beta[1] + beta[2]));
  for (int a = 0; a < c.spec.velocity_dim; ++a)
    for (int r = 0; r < beta[a]; ++r) out = apply_grad_v(out, a);
  return out;
}

/// Transforms every Hermite coefficient of f; result[k][m].
inline std::vector<std::vector<Complex>> forward_kinetic(const Fourier& F, const KineticField& f) {
  std::vector<std::vector<Complex>> out(std::size_t(f.spec.basis_size()));
  for (int k = 0; k < f.spec.basis_size(); ++k) out[std::size_t(k)] = F.forward(f.coefficient(k));
  return out;
}

inline VelocityCoeffs<Complex> gather_mode(const HermiteSpec& spec, const std::vector<std::vector<Complex>>& fhat,
                                           std::size_t m) {
  VelocityCoeffs<Complex> c(spec);
  for (int k = 0; k < spec.basis_size(); ++k) c.coeffs[k] = fhat[std::size_t(k)][m];
  return c;
}

/// Mixed norm ||f||_{H^s_{x,v}}^2 = sum_{|alpha| + |beta| <= s} ||d_x^alpha d_v^beta f||^2.
inline double sobolev_norm_sq(const Fourier& F, const KineticField& f, int s) {
  check_sobolev_order(s);
  const auto fhat = forward_kinetic(F, f);
  const auto betas = velocity_multi_indices(f.spec.velocity_dim, s);
  const int d = F.grid().dim;
  double total = 0.0;
  for (std::size_t m = 0; m < F.spectral_size(); ++m) {
    const auto c = gather_mode(f.spec, fhat, m);
    if (c.coeffs.squaredNorm() == 0.0) continue;
    double acc = 0.0;
    for (const auto& beta : betas) {
      const int order = beta[0] + beta[1] + beta[2];
      acc += sobolev_weight(F.wavevector(m), d, s - order) * l2_norm_sq(velocity_derivative(c, beta));
    }
    total += F.multiplicity(m) * acc;
  }
  return total * parseval_factor(F);
}

/// Physical-space quadrature of int g^2 dx (Parseval cross-check).
inline double grid_l2_sq(const SpatialGrid& g, std::span<const double> field) {
  double s = 0.0;
  for (double x : field) s += x * x;
  return s * g.cell_volume();
}

inline double grid_integral(const SpatialGrid& g, std::span<const double> field) {
  double s = 0.0;
  for (double x : field) s += x;
  return s * g.cell_volume();
}

}  // namespace vfp
