#pragma once

#include <cmath>
#include <vector>

#include "grid.hpp"

namespace bosefluct {

namespace detail {

/// Unit directions used to measure the part of a sphere lying inside a cell.
inline const std::vector<Vec3>& sphere_directions(int dim) {
  static thread_local std::vector<Vec3> dirs[4];
  auto& d = dirs[dim];
  if (!d.empty()) return d;
  const int K = dim == 1 ? 2 : 2000;
  if (dim == 1) {
    d = {Vec3{1, 0, 0}, Vec3{-1, 0, 0}};
  } else if (dim == 2) {
    for (int i = 0; i < K; ++i) {
      double t = 2 * kPi * (i + 0.5) / K;
      d.push_back({std::cos(t), std::sin(t), 0});
    }
  } else {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < K; ++i) {
      double z = 1.0 - (2.0 * i + 1.0) / K, rho = std::sqrt(1 - z * z), t = golden * i;
      d.push_back({rho * std::cos(t), rho * std::sin(t), z});
    }
  }
  return d;
}

inline double sphere_measure(int dim, double r) {
  if (dim == 1) return 2.0;
  if (dim == 2) return 2 * kPi * r;
  return 4 * kPi * r * r;
}

inline void gauss_legendre8(double a, double b, double* x, double* w) {
  static const double t[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                              0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
  static const double c[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                              0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
  for (int i = 0; i < 8; ++i) {
    x[i] = 0.5 * (a + b) + 0.5 * (b - a) * t[i];
    w[i] = 0.5 * (b - a) * c[i];
  }
}

}  // namespace detail

/// Average over the lattice cell centred at `center` of the radial function s(|y|),
/// for s supported in [0, r_max]. Composite Gauss-Legendre in r, with geometric
/// panels towards the origin so that 1/r-type profiles are integrated accurately.
template <class S>
double cell_average_radial(const Lattice& lat, const Vec3& center, S&& s, double r_max, int panels = 48) {
  const double h = lat.h();
  const auto& dirs = detail::sphere_directions(lat.dim);
  auto fraction = [&](double r) {
    int inside = 0;
    for (const auto& u : dirs) {
      bool ok = true;
      for (int ax = 0; ax < lat.dim; ++ax)
        if (std::abs(center[ax] + r * u[ax]) > 0.5 * h) ok = false;
      inside += ok;
    }
    return double(inside) / dirs.size();
  };
  double cmin = 0, cmax = 0;
  for (int ax = 0; ax < lat.dim; ++ax) {
    double lo = std::max(0.0, std::abs(center[ax]) - 0.5 * h), hi = std::abs(center[ax]) + 0.5 * h;
    cmin += lo * lo;
    cmax += hi * hi;
  }
  double a = std::sqrt(cmin), b = std::min(std::sqrt(cmax), r_max);
  if (b <= a) return 0.0;
  // Panel edges: geometric near a (down to 1e-8 relative), uniform above.
  std::vector<double> edges{a};
  const double span = b - a;
  for (int i = 24; i >= 1; --i) edges.push_back(a + span * std::pow(0.5, i));
  for (int i = 1; i <= panels; ++i) edges.push_back(a + span * (0.5 + 0.5 * i / double(panels)));
  double acc = 0.0, x[8], w[8];
  for (size_t p = 0; p + 1 < edges.size(); ++p) {
    detail::gauss_legendre8(edges[p], edges[p + 1], x, w);
    for (int i = 0; i < 8; ++i) {
      double f = fraction(x[i]);
      if (f > 0) acc += w[i] * s(x[i]) * detail::sphere_measure(lat.dim, x[i]) * f;
    }
  }
  return acc / lat.dv();
}

}  // namespace bosefluct
