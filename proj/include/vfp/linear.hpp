#pragma once

// Per-wavenumber analysis of the linearized system. With xi = |xi| e_1 the
// Fourier-transformed unknowns z = (rho, u_1..u_d, f_k) obey dz/dt = G(xi) z:
//
//   d_t rho = -i xi u_1
//   d_t u_j = -i xi_j P'(1) rho + b_j - u_j - mu xi^2 u_j
//   d_t f   = -i xi v_1 f + u . v sqrt(M) + L f
//
// For d_v = 3 the layout keeps transverse Hermite degrees <= 1, which is an
// invariant subspace of G for xi parallel to e_1.

#include "vfp/dynamics.hpp"
#include "vfp/fit.hpp"
#include "vfp/hermite.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace vfp {

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ModeVector = Eigen::VectorXcd;
using ModeMatrix = Eigen::MatrixXcd;

struct ModeState {
  double xi = 0.0;  // |xi|, direction e_1
  HermiteSpec spec;
  Complex rho{};
  std::array<Complex, 3> u{};
  VelocityCoeffs<Complex> f;

  ModeState() = default;
  ModeState(const HermiteSpec& s, double xi_) : xi(xi_), spec(s), f(s) { s.validate(); }

  static int size(const HermiteSpec& s) { return 1 + s.velocity_dim + s.basis_size(); }
  static int rho_index() { return 0; }
  static int u_index(int axis) { return 1 + axis; }
  static int f_index(const HermiteSpec& s, int k) { return 1 + s.velocity_dim + k; }

  ModeVector to_vector() const {
    ModeVector z(size(spec));
    z[0] = rho;
    for (int a = 0; a < spec.velocity_dim; ++a) z[u_index(a)] = u[a];
    z.tail(spec.basis_size()) = f.coeffs;
    return z;
  }

  static ModeState from_vector(const HermiteSpec& s, double xi, const ModeVector& z) {
    if (z.size() != size(s)) throw InvalidArgument("mode vector does not match the layout");
    ModeState m(s, xi);
    m.rho = z[0];
    for (int a = 0; a < s.velocity_dim; ++a) m.u[a] = z[u_index(a)];
    m.f.coeffs = z.tail(s.basis_size());
    return m;
  }

  bool all_finite() const { return to_vector().allFinite(); }
};

inline ModeMatrix mode_generator(const HermiteSpec& spec, const SystemParams& params, double xi) {
  spec.validate();
  const int n = ModeState::size(spec);
  const Complex ixi(0.0, xi);
  const double visc = params.mu * xi * xi;
  ModeMatrix G = ModeMatrix::Zero(n, n);
  G(0, ModeState::u_index(0)) = -ixi;
  G(ModeState::u_index(0), 0) = -ixi * params.sound_speed_sq();
  for (int a = 0; a < spec.velocity_dim; ++a) {
    const int iu = ModeState::u_index(a), ib = ModeState::f_index(spec, spec.unit_index(a));
    G(iu, iu) = -1.0 - visc;
    G(iu, ib) = 1.0;
    G(ib, iu) = 1.0;
  }
  for (int k = 0; k < spec.basis_size(); ++k) {
    const int i = ModeState::f_index(spec, k);
    G(i, i) = -double(HermiteSpec::total_degree(spec.multi_index(k)));
  }
  detail::for_each_raise(spec, 0, [&](int lo, int hi, double sq) {
    G(ModeState::f_index(spec, hi), ModeState::f_index(spec, lo)) += -ixi * sq;
    G(ModeState::f_index(spec, lo), ModeState::f_index(spec, hi)) += -ixi * sq;
  });
  return G;
}

/// Tendency of the linearized mode system, evaluated with the Hermite operators.
inline ModeState mode_rhs(const ModeState& m, const SystemParams& params) {
  ModeState out(m.spec, m.xi);
  const Complex ixi(0.0, m.xi);
  const double pp = params.sound_speed_sq();
  out.rho = -ixi * m.u[0];
  const auto mom = moments(m.f);
  for (int a = 0; a < m.spec.velocity_dim; ++a) {
    out.u[a] = mom.b[a] - m.u[a] - params.mu * m.xi * m.xi * m.u[a];
    if (a == 0) out.u[a] -= ixi * pp * m.rho;
  }
  out.f.coeffs = -ixi * apply_v_multiply(m.f, 0).coeffs + apply_fokker_planck(m.f).coeffs;
  for (int a = 0; a < m.spec.velocity_dim; ++a) out.f.coeffs[m.spec.unit_index(a)] += m.u[a];
  return out;
}

/// |u - b|^2 + sum_{|k| >= 2} |k| |f_k|^2 + mu xi^2 |u|^2: minus the time
/// derivative of half the plain energy P'(1)|rho|^2 + |u|^2 + |f|^2.
inline double mode_dissipation(const ModeState& m, const SystemParams& params) {
  double d = 0.0;
  const auto mom = moments(m.f);
  for (int a = 0; a < m.spec.velocity_dim; ++a) {
    d += std::norm(m.u[a] - mom.b[a]);
    d += params.mu * m.xi * m.xi * std::norm(m.u[a]);
  }
  for (int k = 0; k < m.spec.basis_size(); ++k) {
    const int deg = HermiteSpec::total_degree(m.spec.multi_index(k));
    if (deg >= 2) d += deg * std::norm(m.f.coeffs[k]);
  }
  return d;
}

inline double mode_plain_energy(const ModeState& m, const SystemParams& params) {
  double e = params.sound_speed_sq() * std::norm(m.rho);
  for (int a = 0; a < m.spec.velocity_dim; ++a) e += std::norm(m.u[a]);
  return e + l2_norm_sq(m.f);
}

enum class EvolveMethod { expm, rk };

inline ModeState evolve_mode(const ModeState& m0, const SystemParams& params, double t,
                             EvolveMethod method = EvolveMethod::expm) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("evolution time must be nonnegative");
  if (t == 0.0) return m0;
  const ModeMatrix G = mode_generator(m0.spec, params, m0.xi);
  const ModeVector z0 = m0.to_vector();
  if (method == EvolveMethod::expm) {
    const ModeMatrix P = (G * t).exp();
    return ModeState::from_vector(m0.spec, m0.xi, P * z0);
  }
  // Adaptive Dormand-Prince on the real/imaginary split.
  using Real = std::vector<double>;
  const int n = int(z0.size());
  Real y(2 * std::size_t(n));
  for (int i = 0; i < n; ++i) {
    y[i] = z0[i].real();
    y[n + i] = z0[i].imag();
  }
  auto system = [&](const Real& x, Real& dx, double) {
    ModeVector z(n);
    for (int i = 0; i < n; ++i) z[i] = Complex(x[i], x[n + i]);
    const ModeVector dz = G * z;
    for (int i = 0; i < n; ++i) {
      dx[i] = dz[i].real();
      dx[n + i] = dz[i].imag();
    }
  };
  namespace odeint = boost::numeric::odeint;
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<Real>>(1e-13, 1e-13);
  odeint::integrate_adaptive(stepper, system, y, 0.0, t, std::min(1e-3, t));
  ModeVector z(n);
  for (int i = 0; i < n; ++i) z[i] = Complex(y[i], y[n + i]);
  return ModeState::from_vector(m0.spec, m0.xi, z);
}

// ---------------------------------------------------------------------------
// Hypocoercive functional E_F

/// Hermitian matrix H with E_F(z) = z^* H z:
///   P'(1)|rho|^2 + |u|^2 + |f|^2 + tau4 Re E_1(f) + tau5 Re (u | i xi rho) / (1 + xi^2),
///   E_1 = [sum_ij ({i xi_i b_j + i xi_j b_i} | Gamma_ij(f)) - (a | i xi . b)] / (1 + xi^2),
/// with (x | y) = x conj(y).
inline ModeMatrix energy_form(const HermiteSpec& spec, const SystemParams& params, double xi, double tau4,
                              double tau5) {
  const int n = ModeState::size(spec);
  const int d = spec.velocity_dim;
  const Complex ixi(0.0, xi);
  const double scale = 1.0 / (1.0 + xi * xi);
  ModeMatrix B = ModeMatrix::Zero(n, n);  // E_F = plain + Re(z^* B z)
  // Re(x conj(y)) contributes B(y, x).
  auto add = [&](int x_idx, int y_idx, Complex coeff) { B(y_idx, x_idx) += coeff; };

  add(ModeState::u_index(0), 0, tau5 * scale * std::conj(ixi));
  const int ia = ModeState::f_index(spec, 0);
  add(ia, ModeState::f_index(spec, spec.unit_index(0)), -tau4 * scale * std::conj(ixi));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      MultiIndex k{0, 0, 0};
      double c = 1.0;
      if (i == j) {
        k[i] = 2;
        c = std::sqrt(2.0);
      } else {
        k[i] = 1;
        k[j] = 1;
      }
      if (!spec.contains(k)) continue;
      const int ig = ModeState::f_index(spec, spec.index(k));
      // (i xi_i b_j | c f_k) + (i xi_j b_i | c f_k), xi_i = xi delta_i0
      if (i == 0) add(ModeState::f_index(spec, spec.unit_index(j)), ig, tau4 * scale * c * ixi);
      if (j == 0) add(ModeState::f_index(spec, spec.unit_index(i)), ig, tau4 * scale * c * ixi);
    }
  ModeMatrix H = 0.5 * (B + B.adjoint());
  H(0, 0) += params.sound_speed_sq();
  for (int i = 1; i < n; ++i) H(i, i) += 1.0;
  return H;
}

inline ModeMatrix plain_form(const HermiteSpec& spec, const SystemParams& params) {
  const int n = ModeState::size(spec);
  ModeMatrix H = ModeMatrix::Identity(n, n);
  H(0, 0) = params.sound_speed_sq();
  return H;
}

struct EquivalenceBounds {
  double lower = 0.0;  // E_F >= lower * plain
  double upper = 0.0;  // E_F <= upper * plain
};

/// Exact extreme ratios E_F / plain at one wavenumber (generalized eigenvalues).
inline EquivalenceBounds equivalence_at(const HermiteSpec& spec, const SystemParams& params, double xi, double tau4,
                                        double tau5) {
  const ModeMatrix H = energy_form(spec, params, xi, tau4, tau5);
  const auto P = plain_form(spec, params);
  // plain is diagonal positive: similarity by its inverse square root
  Eigen::VectorXd s = P.diagonal().real().cwiseSqrt().cwiseInverse();
  const ModeMatrix S = s.asDiagonal() * H * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<ModeMatrix> eig(S, Eigen::EigenvaluesOnly);
  return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
}

/// Certifies E_F ~ plain over `samples` random wavenumbers in [0, xi_max]
/// (plus the endpoints); each wavenumber is checked exactly over all states.
inline EquivalenceBounds certify_energy_equivalence(const HermiteSpec& spec, const SystemParams& params, double tau4,
                                                    double tau5, int samples = 1000, double xi_max = 20.0,
                                                    unsigned long long seed = 1) {
  if (tau4 < 0.0 || tau5 < 0.0) throw InvalidArgument("tau4 and tau5 must be nonnegative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, xi_max);
  EquivalenceBounds b{std::numeric_limits<double>::infinity(), 0.0};
  auto visit = [&](double xi) {
    const auto e = equivalence_at(spec, params, xi, tau4, tau5);
    b.lower = std::min(b.lower, e.lower);
    b.upper = std::max(b.upper, e.upper);
  };
  visit(0.0);
  visit(xi_max);
  visit(1.0);
  for (int i = 0; i < samples; ++i) visit(U(rng));
  if (!(b.lower > 0.0)) throw InvalidArgument("tau configuration breaks equivalence of E_F with the plain energy");
  return b;
}

inline double mode_energy_F(const ModeState& m, const SystemParams& params, double tau4 = 0.1, double tau5 = 0.01) {
  const auto e = equivalence_at(m.spec, params, m.xi, tau4, tau5);
  if (!(e.lower > 0.0)) throw InvalidArgument("tau configuration breaks equivalence of E_F with the plain energy");
  const ModeVector z = m.to_vector();
  return (z.adjoint() * energy_form(m.spec, params, m.xi, tau4, tau5) * z)(0, 0).real();
}

// ---------------------------------------------------------------------------
// Fast propagation for sweeps

namespace detail {

inline std::vector<std::vector<int>> connected_blocks(const ModeMatrix& G) {
  const int n = int(G.rows());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && G(i, j) != Complex(0.0)) parent[find(i)] = find(j);
  std::vector<std::vector<int>> blocks;
  std::vector<int> slot(n, -1);
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (slot[r] < 0) {
      slot[r] = int(blocks.size());
      blocks.emplace_back();
    }
    blocks[slot[r]].push_back(i);
  }
  return blocks;
}

}  // namespace detail

/// exp(G t) z for many t, block by block: eigendecomposition when it
/// reconstructs G to 1e-10, chained matrix exponentials otherwise.
class ModePropagator {
 public:
  explicit ModePropagator(const ModeMatrix& G) : n_(int(G.rows())) {
    for (auto& idx : detail::connected_blocks(G)) {
      Block b;
      b.index = idx;
      const int m = int(idx.size());
      b.G.resize(m, m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) b.G(i, j) = G(idx[i], idx[j]);
      Eigen::ComplexEigenSolver<ModeMatrix> es(b.G);
      if (es.info() == Eigen::Success) {
        b.V = es.eigenvectors();
        b.lambda = es.eigenvalues();
        Eigen::PartialPivLU<ModeMatrix> lu(b.V);
        b.Vinv = lu.inverse();
        const ModeMatrix R = b.V * b.lambda.asDiagonal() * b.Vinv - b.G;
        const double cond = b.V.norm() * b.Vinv.norm();
        b.diagonal = b.Vinv.allFinite() && R.norm() <= 1e-10 * std::max(1.0, b.G.norm()) && cond < 1e8;
      }
      blocks_.push_back(std::move(b));
    }
  }

  /// Returns z(t_j) for ascending t_j >= 0.
  std::vector<ModeVector> evolve(const ModeVector& z0, std::span<const double> times) const {
    std::vector<ModeVector> out(times.size(), ModeVector::Zero(n_));
    for (const auto& b : blocks_) {
      const int m = int(b.index.size());
      ModeVector zb(m);
      for (int i = 0; i < m; ++i) zb[i] = z0[b.index[i]];
      if (zb.squaredNorm() == 0.0) continue;
      if (b.diagonal) {
        const ModeVector c = b.Vinv * zb;
        for (std::size_t j = 0; j < times.size(); ++j) {
          ModeVector e(m);
          for (int i = 0; i < m; ++i) e[i] = std::exp(b.lambda[i] * times[j]) * c[i];
          const ModeVector r = b.V * e;
          for (int i = 0; i < m; ++i) out[j][b.index[i]] = r[i];
        }
      } else {
        ModeVector cur = zb;
        double tprev = 0.0;
        for (std::size_t j = 0; j < times.size(); ++j) {
          if (times[j] < tprev) throw InvalidArgument("propagation times must be ascending");
          if (times[j] > tprev) cur = ModeMatrix((b.G * (times[j] - tprev)).exp()) * cur;
          tprev = times[j];
          for (int i = 0; i < m; ++i) out[j][b.index[i]] = cur[i];
        }
      }
    }
    return out;
  }

  std::size_t block_count() const { return blocks_.size(); }
  bool all_diagonalized() const {
    return std::all_of(blocks_.begin(), blocks_.end(), [](const Block& b) { return b.diagonal; });
  }

 private:
  struct Block {
    std::vector<int> index;
    ModeMatrix G, V, Vinv;
    Eigen::VectorXcd lambda;
    bool diagonal = false;
  };
  int n_;
  std::vector<Block> blocks_;
};

// ---------------------------------------------------------------------------
// Canonical initial modes

/// Pure rho, pure u parallel, pure u perpendicular (d_v = 3), pure micro f = e_2.
inline std::vector<ModeState> canonical_pure_modes(const HermiteSpec& spec, double xi) {
  std::vector<ModeState> out;
  ModeState m(spec, xi);
  m.rho = 1.0;
  out.push_back(m);
  m = ModeState(spec, xi);
  m.u[0] = 1.0;
  out.push_back(m);
  if (spec.velocity_dim == 3) {
    m = ModeState(spec, xi);
    m.u[1] = 1.0;
    out.push_back(m);
  }
  m = ModeState(spec, xi);
  m.f[MultiIndex{2, 0, 0}] = 1.0;
  out.push_back(m);
  return out;
}

/// Pure modes plus their normalized equal-weight mix.
inline std::vector<ModeState> canonical_modes(const HermiteSpec& spec, double xi) {
  auto out = canonical_pure_modes(spec, xi);
  ModeVector mix = ModeVector::Zero(ModeState::size(spec));
  for (const auto& m : out) mix += m.to_vector();
  mix /= mix.norm();
  out.push_back(ModeState::from_vector(spec, xi, mix));
  return out;
}

// ---------------------------------------------------------------------------
// Mode decay table

struct ModeDecayRow {
  double xi = 0.0;
  double fitted_rate = 0.0;     // slowest fitted decay rate of E_F (positive = decay)
  double heat_scale = 0.0;      // xi^2 / (1 + xi^2)
  double ratio = 0.0;           // fitted_rate / heat_scale
  double pointwise_ratio = 0.0; // largest c with E_F(t) <= E_F(0) exp(-c heat_scale t) on the grid
  double r_squared = 0.0;       // of the slowest fit
};

struct ModeDecayTable {
  std::vector<ModeDecayRow> rows;
  double c = 0.0;            // min ratio over the grid
  double c_pointwise = 0.0;  // min pointwise ratio over the grid
};

/// `scaled_times` are in units of (1 + xi^2) / xi^2, the heat/damping time
/// scale at each wavenumber.
inline ModeDecayTable verify_mode_decay(const HermiteSpec& spec, const SystemParams& params,
                                        std::span<const double> xi_grid, std::span<const double> scaled_times,
                                        double tau4 = 0.1, double tau5 = 0.01) {
  ModeDecayTable table;
  table.c = table.c_pointwise = std::numeric_limits<double>::infinity();
  for (double xi : xi_grid) {
    if (!(xi > 0.0)) throw InvalidArgument("mode decay grid needs positive wavenumbers");
    const double heat = xi * xi / (1.0 + xi * xi);
    std::vector<double> times(scaled_times.size());
    for (std::size_t j = 0; j < times.size(); ++j) times[j] = scaled_times[j] / heat;
    std::vector<double> all_times{0.0};
    all_times.insert(all_times.end(), times.begin(), times.end());

    const ModeMatrix H = energy_form(spec, params, xi, tau4, tau5);
    if (!(equivalence_at(spec, params, xi, tau4, tau5).lower > 0.0))
      throw InvalidArgument("tau configuration breaks equivalence of E_F with the plain energy");
    const ModePropagator prop(mode_generator(spec, params, xi));

    ModeDecayRow row;
    row.xi = xi;
    row.heat_scale = heat;
    row.fitted_rate = std::numeric_limits<double>::infinity();
    row.pointwise_ratio = std::numeric_limits<double>::infinity();
    for (const auto& m : canonical_modes(spec, xi)) {
      const auto path = prop.evolve(m.to_vector(), all_times);
      std::vector<double> ef(times.size());
      const double e0 = (path[0].adjoint() * H * path[0])(0, 0).real();
      for (std::size_t j = 0; j < times.size(); ++j) {
        ef[j] = (path[j + 1].adjoint() * H * path[j + 1])(0, 0).real();
        const double c_here = -std::log(ef[j] / e0) / (heat * times[j]);
        row.pointwise_ratio = std::min(row.pointwise_ratio, c_here);
      }
      const auto fit = fit_decay(times, ef, DecayModel::exponential);
      if (-fit.rate < row.fitted_rate) {
        row.fitted_rate = -fit.rate;
        row.r_squared = fit.r_squared;
      }
    }
    row.ratio = row.fitted_rate / heat;
    table.c = std::min(table.c, row.ratio);
    table.c_pointwise = std::min(table.c_pointwise, row.pointwise_ratio);
    table.rows.push_back(row);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Whole-space semigroup decay by radial quadrature

struct SpectrumProfile {
  enum class Kind { plateau, concentrated };
  Kind kind = Kind::plateau;
  double q = 1.0;         // plateau: emulated L^q data class, 1 <= q < 6/5
  double center = 1.0;    // concentrated
  double width = 0.05;    // concentrated
  double cap = 8.0;       // plateau support radius

  static SpectrumProfile q_class(double q) {
    if (!(q >= 1.0 && q < 1.2)) throw InvalidArgument("q must lie in [1, 6/5)");
    SpectrumProfile p;
    p.q = q;
    return p;
  }
  static SpectrumProfile concentrated_at(double center, double width) {
    if (!(center > 0.0) || !(width > 0.0)) throw InvalidArgument("concentrated profile needs positive center, width");
    SpectrumProfile p;
    p.kind = Kind::concentrated;
    p.center = center;
    p.width = width;
    return p;
  }

  /// Smooth envelope: 1 on [0, 1], 0 beyond cap.
  double envelope(double r) const {
    if (r <= 1.0) return 1.0;
    if (r >= cap) return 0.0;
    auto g = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
    const double s = (r - 1.0) / (cap - 1.0);
    return g(1.0 - s) / (g(1.0 - s) + g(s));
  }

  /// w(r) = r^{-3 (1 - 1/q)} envelope(r) for plateau, Gaussian bump otherwise.
  double weight(double r) const {
    if (kind == Kind::concentrated) {
      const double z = (r - center) / width;
      return std::abs(z) > 8.0 ? 0.0 : std::exp(-0.5 * z * z);
    }
    if (r <= 0.0) return q == 1.0 ? 1.0 : 0.0;
    return std::pow(r, -3.0 * (1.0 - 1.0 / q)) * envelope(r);
  }

  std::vector<double> breakpoints() const {
    if (kind == Kind::concentrated) {
      const double lo = std::max(0.0, center - 8.0 * width), hi = center + 8.0 * width;
      return {lo, center - 2 * width > lo ? center - 2 * width : lo + (center - lo) / 2, center,
              center + 2 * width, hi};
    }
    std::vector<double> b{0.0, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0, 2.0, 4.0};
    b.push_back(cap);
    return b;
  }
};

/// Norm time series of the semigroup applied to the data u_hat_0(xi) = w(|xi|) z_c,
/// summed over the canonical pure modes z_c.
struct SemigroupSeries {
  std::vector<double> t;
  std::vector<double> total;   // ||grad^k U||
  std::vector<double> macro;   // ||grad^k (rho, u, a, b)||
  std::vector<double> micro;   // ||grad^k {I-P} f||
  std::vector<double> gap;     // ||grad^k (b - u)||
  std::vector<double> u;       // ||grad^k u||
  std::vector<double> f;       // ||grad^k f||
  int intervals = 0;           // quadrature subintervals used
};

namespace detail {

constexpr int kSemigroupComponents = 6;

// Per-node integrand: for each t and component, xi^{2k} w^2 4 pi xi^2 |.|^2.
inline std::vector<double> semigroup_integrand(const HermiteSpec& spec, const SystemParams& params,
                                               const SpectrumProfile& profile, int k, std::span<const double> t,
                                               double xi) {
  const int nc = kSemigroupComponents;
  std::vector<double> out(t.size() * nc, 0.0);
  const double w = profile.weight(xi);
  const double weight = std::pow(xi, 2 * k) * w * w * 4.0 * std::numbers::pi * xi * xi;
  if (weight == 0.0) return out;
  const ModePropagator prop(mode_generator(spec, params, xi));
  const int d = spec.velocity_dim;
  for (const auto& m : canonical_pure_modes(spec, xi)) {
    const auto path = prop.evolve(m.to_vector(), t);
    for (std::size_t j = 0; j < t.size(); ++j) {
      const auto s = ModeState::from_vector(spec, xi, path[j]);
      const auto pm = project_macro(s.f);
      double uu = 0.0, gap = 0.0, macro_f = std::norm(pm.moments.a);
      for (int a = 0; a < d; ++a) {
        uu += std::norm(s.u[a]);
        gap += std::norm(pm.moments.b[a] - s.u[a]);
        macro_f += std::norm(pm.moments.b[a]);
      }
      const double ff = l2_norm_sq(s.f), rr = std::norm(s.rho);
      double* o = &out[j * nc];
      o[0] += weight * (rr + uu + ff);
      o[1] += weight * (rr + uu + macro_f);
      o[2] += weight * l2_norm_sq(pm.micro);
      o[3] += weight * gap;
      o[4] += weight * uu;
      o[5] += weight * ff;
    }
  }
  return out;
}

}  // namespace detail

inline SemigroupSeries semigroup_decay(const HermiteSpec& spec, const SystemParams& params,
                                       const SpectrumProfile& profile, int k, std::span<const double> t_grid,
                                       double rel_tol = 1e-6, int max_intervals = 4000) {
  if (k != 0 && k != 1) throw InvalidArgument("derivative order must be 0 or 1");
  if (t_grid.empty()) throw InvalidArgument("empty time grid");
  for (std::size_t j = 0; j < t_grid.size(); ++j)
    if (t_grid[j] < 0.0 || (j > 0 && t_grid[j] < t_grid[j - 1]))
      throw InvalidArgument("time grid must be nonnegative and ascending");
  spec.validate();
  params.validate();

  using boost::math::quadrature::gauss;
  using boost::math::quadrature::gauss_kronrod;
  const auto& xk = gauss_kronrod<double, 15>::abscissa();
  const auto& wk = gauss_kronrod<double, 15>::weights();
  const auto& wg = gauss<double, 7>::weights();
  const std::size_t nv = t_grid.size() * detail::kSemigroupComponents;

  struct Interval {
    double a, b;
    std::vector<double> value, error;
  };
  auto integrate = [&](double a, double b) {
    Interval iv{a, b, std::vector<double>(nv, 0.0), std::vector<double>(nv, 0.0)};
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    std::vector<double> gsum(nv, 0.0);
    for (std::size_t i = 0; i < xk.size(); ++i) {
      const int signs = xk[i] == 0.0 ? 1 : 2;
      for (int s = 0; s < signs; ++s) {
        const double x = c + (s == 0 ? 1.0 : -1.0) * h * xk[i];
        const auto fx = detail::semigroup_integrand(spec, params, profile, k, t_grid, x);
        for (std::size_t v = 0; v < nv; ++v) {
          iv.value[v] += wk[i] * fx[v];
          if (i % 2 == 0) gsum[v] += wg[i / 2] * fx[v];  // Gauss nodes are the even Kronrod abscissae
        }
      }
    }
    for (std::size_t v = 0; v < nv; ++v) {
      iv.value[v] *= h;
      iv.error[v] = std::abs(iv.value[v] - h * gsum[v]);
    }
    return iv;
  };

  std::vector<Interval> parts;
  const auto bp = profile.breakpoints();
  for (std::size_t i = 0; i + 1 < bp.size(); ++i)
    if (bp[i + 1] > bp[i]) parts.push_back(integrate(bp[i], bp[i + 1]));

  while (true) {
    std::vector<double> total(nv, 0.0), err(nv, 0.0);
    for (const auto& p : parts)
      for (std::size_t v = 0; v < nv; ++v) {
        total[v] += p.value[v];
        err[v] += p.error[v];
      }
    // worst entry relative to its own total
    std::size_t worst_v = nv;
    double worst = 1.0;
    for (std::size_t v = 0; v < nv; ++v) {
      const double allowed = rel_tol * std::abs(total[v]) + 1e-300;
      if (err[v] / allowed > worst) {
        worst = err[v] / allowed;
        worst_v = v;
      }
    }
    if (worst_v == nv) {
      SemigroupSeries out;
      out.t.assign(t_grid.begin(), t_grid.end());
      out.intervals = int(parts.size());
      std::vector<double>* series[] = {&out.total, &out.macro, &out.micro, &out.gap, &out.u, &out.f};
      for (std::size_t j = 0; j < t_grid.size(); ++j)
        for (int c = 0; c < detail::kSemigroupComponents; ++c)
          series[c]->push_back(std::sqrt(std::max(0.0, total[j * detail::kSemigroupComponents + c])));
      return out;
    }
    if (int(parts.size()) >= max_intervals) throw QuadratureError("radial quadrature did not converge");
    auto it = std::max_element(parts.begin(), parts.end(), [&](const Interval& x, const Interval& y) {
      return x.error[worst_v] < y.error[worst_v];
    });
    const double a = it->a, b = it->b, mid = 0.5 * (a + b);
    *it = integrate(a, mid);
    parts.push_back(integrate(mid, b));
  }
}

struct MicroGapRates {
  DecayFit f, micro, u, gap, total;
  double micro_excess() const { return f.rate - micro.rate; }  // > 0 when micro decays faster
  double gap_excess() const { return u.rate - gap.rate; }
  bool passes(double expected = 0.5, double tol = 0.1) const {
    return std::abs(micro_excess() - expected) <= tol && std::abs(gap_excess() - expected) <= tol;
  }
};

inline MicroGapRates micro_gap_decay(const HermiteSpec& spec, const SystemParams& params,
                                     const SpectrumProfile& profile, std::span<const double> t_grid,
                                     double window_begin, double window_end) {
  const auto s = semigroup_decay(spec, params, profile, 0, t_grid);
  MicroGapRates r;
  r.f = fit_decay(s.t, s.f, DecayModel::algebraic, window_begin, window_end);
  r.micro = fit_decay(s.t, s.micro, DecayModel::algebraic, window_begin, window_end);
  r.u = fit_decay(s.t, s.u, DecayModel::algebraic, window_begin, window_end);
  r.gap = fit_decay(s.t, s.gap, DecayModel::algebraic, window_begin, window_end);
  r.total = fit_decay(s.t, s.total, DecayModel::algebraic, window_begin, window_end);
  return r;
}

}  // namespace vfp
