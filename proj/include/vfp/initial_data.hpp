#pragma once

// Initial-data generators for torus runs. Every generator returns well-prepared
// data: zero-mean rho_pert and a, zero total momentum int b + (1 + rho_pert) u.

#include "vfp/dynamics.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace vfp {

enum class InitialKind { prepared_smooth, random_band, macro_only, micro_only };

inline InitialKind parse_initial_kind(const std::string& name) {
  if (name == "prepared_smooth") return InitialKind::prepared_smooth;
  if (name == "random_band") return InitialKind::random_band;
  if (name == "macro_only") return InitialKind::macro_only;
  if (name == "micro_only") return InitialKind::micro_only;
  throw InvalidArgument("unknown initial-data generator: " + name);
}

inline std::string to_string(InitialKind k) {
  switch (k) {
    case InitialKind::prepared_smooth: return "prepared_smooth";
    case InitialKind::random_band: return "random_band";
    case InitialKind::macro_only: return "macro_only";
    case InitialKind::micro_only: return "micro_only";
  }
  return "?";
}

/// Removes the means of rho_pert and a, then shifts u by a constant per axis so
/// that the total momentum vanishes.
inline void prepare(PerturbationState& s) {
  const auto& g = s.grid();
  auto remove_mean = [&](std::span<double> x) {
    const double m = grid_integral(g, x) / g.volume();
    for (double& v : x) v -= m;
  };
  remove_mean(s.rho.values);
  remove_mean(s.f.coefficient(0));
  const double mass = g.volume() + grid_integral(g, s.rho.values);
  for (int a = 0; a < g.dim; ++a) {
    auto& u = s.u.components[a];
    const auto b = s.f.coefficient(s.spec().unit_index(a));
    std::vector<double> mom(g.size());
    for (std::size_t p = 0; p < mom.size(); ++p) mom[p] = b[p] + (1.0 + s.rho.values[p]) * u[p];
    const double shift = grid_integral(g, mom) / mass;
    for (double& v : u) v -= shift;
  }
}

namespace detail {

// Smooth low-mode profile sum_a c1 sin(k x_a + phase_a) + c2 cos(2 k x_a).
inline std::vector<double> trig_profile(const SpatialGrid& g, double c1, double c2, double phase) {
  const double k = 2.0 * std::numbers::pi / g.length;
  std::vector<double> out(g.size(), 0.0);
  for (std::size_t p = 0; p < out.size(); ++p)
    for (int a = 0; a < g.dim; ++a) {
      const double x = g.coordinate(p, a);
      out[p] += c1 * std::sin(k * x + phase + 0.7 * a) + c2 * std::cos(2.0 * k * x + 0.3 * a);
    }
  return out;
}

inline void scaled_copy(std::span<double> dst, const std::vector<double>& src, double amp) {
  for (std::size_t p = 0; p < dst.size(); ++p) dst[p] = amp * src[p];
}

}  // namespace detail

inline PerturbationState make_initial_data(InitialKind kind, const SpatialGrid& grid, const HermiteSpec& spec,
                                           double amplitude, std::uint64_t seed = 0) {
  grid.validate();
  spec.validate();
  if (grid.dim != spec.velocity_dim) throw InvalidArgument("space_dim must equal velocity_dim");
  if (!(amplitude >= 0.0) || amplitude > 0.1) throw InvalidArgument("amplitude must lie in [0, 0.1]");
  PerturbationState s(grid, spec);
  const bool macro = kind != InitialKind::micro_only;
  const bool micro = kind != InitialKind::macro_only;
  const int d = grid.dim;

  if (kind == InitialKind::random_band) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const double k0 = 2.0 * std::numbers::pi / grid.length;
    auto random_field = [&] {
      std::vector<double> out(grid.size(), 0.0);
      for (int a = 0; a < d; ++a)
        for (int m = 1; m <= 4; ++m) {
          const double c = normal(rng) / (m * m), sn = normal(rng) / (m * m);
          for (std::size_t p = 0; p < out.size(); ++p) {
            const double x = k0 * m * grid.coordinate(p, a);
            out[p] += c * std::cos(x) + sn * std::sin(x);
          }
        }
      double peak = 0.0;
      for (double v : out) peak = std::max(peak, std::abs(v));
      if (peak > 0.0)
        for (double& v : out) v /= peak;
      return out;
    };
    auto put = [&](std::span<double> dst, bool on) {
      const auto f = random_field();
      if (on) detail::scaled_copy(dst, f, amplitude);
    };
    put(s.rho.values, macro);
    for (int a = 0; a < d; ++a) put(s.u.components[a], macro);
    put(s.f.coefficient(0), macro);
    for (int a = 0; a < d; ++a) put(s.f.coefficient(spec.unit_index(a)), macro);
    for (int k = 0; k < spec.basis_size(); ++k) {
      const int deg = HermiteSpec::total_degree(spec.multi_index(k));
      if (deg >= 2 && deg <= 4) put(s.f.coefficient(k), micro);
    }
  } else {
    using detail::scaled_copy;
    using detail::trig_profile;
    if (macro) {
      scaled_copy(s.rho.values, trig_profile(grid, 1.0, 0.5, 0.0), amplitude);
      scaled_copy(s.f.coefficient(0), trig_profile(grid, -0.3, 0.5, 1.1), amplitude);
      for (int a = 0; a < d; ++a) {
        scaled_copy(s.u.components[a], trig_profile(grid, 0.6, -0.2, 0.4 + a), amplitude);
        scaled_copy(s.f.coefficient(spec.unit_index(a)), trig_profile(grid, 0.4, 0.3, 2.0 + a), amplitude);
      }
    }
    if (micro) {
      int n = 0;
      for (int k = 0; k < spec.basis_size(); ++k) {
        const int deg = HermiteSpec::total_degree(spec.multi_index(k));
        if (deg < 2 || deg > 3) continue;
        scaled_copy(s.f.coefficient(k), trig_profile(grid, 0.3 / deg, 0.1, 0.5 * ++n), amplitude);
      }
    }
  }
  prepare(s);
  return s;
}

inline PerturbationState make_initial_data(const std::string& name, const SpatialGrid& grid, const HermiteSpec& spec,
                                           double amplitude, std::uint64_t seed = 0) {
  return make_initial_data(parse_initial_kind(name), grid, spec, amplitude, seed);
}

}  // namespace vfp
