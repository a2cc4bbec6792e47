#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "grid.hpp"

namespace bosefluct {

/// Radial, non-negative, compactly supported pair potential with its scaling.
struct Potential {
  std::string name = "zero";
  std::function<double(double)> profile = [](double) { return 0.0; };
  double R_V = 1.0;
  double beta = 0.5;
  double N = 1.0;
  double b0 = 0.0;  // integral of V over R^3

  bool is_zero() const { return b0 == 0.0; }
  double scale() const { return std::pow(N, beta); }
  /// Support radius of V_N.
  double R_N() const { return R_V / scale(); }
  /// V_N(r) = N^{3 beta} V(N^beta r).
  double V_N(double r) const { return std::pow(N, 3 * beta) * profile(scale() * r); }

  Potential with_N(double n) const {
    Potential p = *this;
    p.N = n;
    return p;
  }
};

inline double radial_integral(const std::function<double(double)>& V, double R) {
  using boost::math::quadrature::gauss_kronrod;
  return 4.0 * kPi * gauss_kronrod<double, 61>::integrate([&](double r) { return r * r * V(r); }, 0.0, R, 15, 1e-14);
}

inline Potential zero_potential(double beta = 0.5, double N = 1.0) {
  Potential p;
  p.beta = beta;
  p.N = N;
  return p;
}

/// Smooth bump V(r) = A exp(1 - 1/(1 - (r/R)^2)) for r < R.
inline Potential smooth_bump(double amplitude, double R_V, double beta, double N) {
  if (amplitude < 0.0) throw PreconditionError("potential must be non-negative");
  if (!(R_V > 0.0)) throw PreconditionError("support radius must be positive");
  if (!(beta > 0.0 && beta < 1.0)) throw PreconditionError("beta must lie in (0, 1)");
  Potential p;
  p.name = "bump";
  p.R_V = R_V;
  p.beta = beta;
  p.N = N;
  p.profile = [amplitude, R_V](double r) {
    double s = r / R_V;
    if (s >= 1.0) return 0.0;
    return amplitude * std::exp(1.0 - 1.0 / (1.0 - s * s));
  };
  p.b0 = amplitude == 0.0 ? 0.0 : radial_integral(p.profile, R_V);
  return p;
}

/// omega_infinity(r) = b0/(8 pi) [1/r - 3/(2 ell) + c r^2/ell^3] for r <= ell, else 0.
/// The default c = 1/3 is the printed coefficient.
inline double omega_infinity(double ell, double b0, double r, double quad_coeff = 1.0 / 3.0) {
  r = std::abs(r);
  if (r > ell) return 0.0;
  if (r == 0.0) throw PreconditionError("omega_infinity is singular at the origin");
  return b0 / (8.0 * kPi) * (1.0 / r - 1.5 / ell + quad_coeff * r * r / (ell * ell * ell));
}

inline double omega_infinity(double ell, double b0, const Vec3& x, double quad_coeff = 1.0 / 3.0) {
  return omega_infinity(ell, b0, std::sqrt(ksq(x)), quad_coeff);
}

struct ScatteringOptions {
  int points = 10000;  // minimum radial points
  double support_fraction = 0.5;  // share of points inside 1.05 R_N
};

struct ScatteringSolution {
  double ell = 0.0;
  double N = 1.0;
  double beta = 0.5;
  double b0 = 0.0;
  double lambda = 0.0;
  RVec r, u, du;      // u = r f_N, normalised so that u(ell) = ell
  double integral_f = 0.0;      // int_{B_ell} f_N
  double integral_VN_f = 0.0;   // int V_N f_N
  double identity_residual = 0.0;  // relative defect of lambda int f = (1/2N) int V_N f

  /// f_N(r); equal to 1 outside the ball.
  double f(double rr) const {
    rr = std::abs(rr);
    if (rr >= ell || r.size() == 0) return 1.0;
    if (rr == 0.0) return du[0];
    auto it = std::upper_bound(r.data(), r.data() + r.size(), rr);
    Index j = std::clamp<Index>(it - r.data(), 1, r.size() - 1);
    double a = r[j - 1], b = r[j], h = b - a, t = (rr - a) / h;
    double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    double uu = h00 * u[j - 1] + h10 * h * du[j - 1] + h01 * u[j] + h11 * h * du[j];
    return uu / rr;
  }
  double omega(double rr) const { return 1.0 - f(rr); }
  double N_omega(double rr) const { return N * omega(rr); }
};

namespace detail {

struct RadialState {
  double u, du, If, IV;
};

/// Grid on [0, ell]: uniform inside the scaled support, geometric outside.
inline RVec scattering_grid(double R_N, double ell, const ScatteringOptions& opt) {
  const int n = std::max(opt.points, 10000);
  double inner = std::min(1.05 * R_N, ell);
  int n_in = std::max(2, int(opt.support_fraction * n));
  int n_out = n - n_in;
  if (inner >= ell) {
    n_in = n;
    n_out = 0;
  }
  RVec r(n_in + n_out);
  for (int i = 0; i < n_in; ++i) r[i] = inner * i / double(n_in - 1);
  if (n_out > 0) {
    double h0 = inner / (n_in - 1);
    // geometric steps h0 q^k summing to ell - inner
    double span = ell - inner, lo = 1.0, hi = 2.0;
    auto total = [&](double q) { return q == 1.0 ? h0 * n_out : h0 * (std::pow(q, n_out) - 1) / (q - 1); };
    if (total(1.0) > span) {
      for (int i = 1; i <= n_out; ++i) r[n_in - 1 + i] = inner + span * i / double(n_out);
    } else {
      while (total(hi) < span) hi *= 2;
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (total(mid) < span ? lo : hi) = mid;
      }
      double q = 0.5 * (lo + hi), x = inner, h = h0;
      for (int i = 1; i <= n_out; ++i) {
        x += h;
        h *= q;
        r[n_in - 1 + i] = x;
      }
    }
    r[r.size() - 1] = ell;
  }
  return r;
}

/// RK4 for u'' = (W - lambda) u with the two moment integrals carried along.
template <class W>
RadialState shoot(const RVec& r, W&& w, double lambda, RVec* u_out = nullptr, RVec* du_out = nullptr) {
  RadialState s{0.0, 1.0, 0.0, 0.0};
  auto rhs = [&](double x, const RadialState& y) {
    double wx = w(x);
    return RadialState{y.du, (wx - lambda) * y.u, x * y.u, x * wx * y.u};
  };
  auto axpy = [](const RadialState& y, double h, const RadialState& k) {
    return RadialState{y.u + h * k.u, y.du + h * k.du, y.If + h * k.If, y.IV + h * k.IV};
  };
  if (u_out) {
    u_out->resize(r.size());
    du_out->resize(r.size());
    (*u_out)[0] = s.u;
    (*du_out)[0] = s.du;
  }
  for (Index i = 0; i + 1 < r.size(); ++i) {
    double x = r[i], h = r[i + 1] - r[i];
    auto k1 = rhs(x, s);
    auto k2 = rhs(x + h / 2, axpy(s, h / 2, k1));
    auto k3 = rhs(x + h / 2, axpy(s, h / 2, k2));
    auto k4 = rhs(x + h, axpy(s, h, k3));
    s.u += h / 6 * (k1.u + 2 * k2.u + 2 * k3.u + k4.u);
    s.du += h / 6 * (k1.du + 2 * k2.du + 2 * k3.du + k4.du);
    s.If += h / 6 * (k1.If + 2 * k2.If + 2 * k3.If + k4.If);
    s.IV += h / 6 * (k1.IV + 2 * k2.IV + 2 * k3.IV + k4.IV);
    if (u_out) {
      (*u_out)[i + 1] = s.u;
      (*du_out)[i + 1] = s.du;
    }
  }
  return s;
}

}  // namespace detail

/// Lowest Neumann eigenpair of [-Delta + V_N/(2N)] f = lambda f on the ball of radius ell.
inline ScatteringSolution solve_neumann_scattering(const Potential& pot, double ell,
                                                   const ScatteringOptions& opt = {}) {
  if (!(ell > pot.R_N())) throw PreconditionError("ell must exceed the support radius of V_N");
  ScatteringSolution sol;
  sol.ell = ell;
  sol.N = pot.N;
  sol.beta = pot.beta;
  sol.b0 = pot.b0;
  sol.r = detail::scattering_grid(pot.R_N(), ell, opt);

  auto W = [&](double x) { return pot.V_N(x) / (2.0 * pot.N); };
  auto neumann = [&](const detail::RadialState& s) { return ell * s.du - s.u; };

  double lambda = 0.0;
  if (!pot.is_zero()) {
    double lo = 0.0, hi = 2.0 * 3.0 * pot.b0 / (8.0 * kPi * ell * ell * ell * pot.N);
    if (!(neumann(detail::shoot(sol.r, W, lo)) > 0.0))
      throw SolverError("no eigenvalue bracket: Neumann residual not positive at lambda = 0");
    int expand = 0;
    while (neumann(detail::shoot(sol.r, W, hi)) > 0.0) {
      lo = hi;
      hi *= 2.0;
      if (++expand > 60) throw SolverError("no eigenvalue bracket found");
    }
    for (int it = 0; it < 200 && hi - lo > 4e-16 * hi; ++it) {
      double mid = 0.5 * (lo + hi);
      (neumann(detail::shoot(sol.r, W, mid)) > 0.0 ? lo : hi) = mid;
    }
    lambda = 0.5 * (lo + hi);
  }
  sol.lambda = lambda;
  auto end = detail::shoot(sol.r, W, lambda, &sol.u, &sol.du);
  const double scale = ell / end.u;
  sol.u *= scale;
  sol.du *= scale;
  sol.integral_f = 4.0 * kPi * end.If * scale;
  sol.integral_VN_f = 4.0 * kPi * end.IV * scale * 2.0 * pot.N;
  const double lhs = lambda * sol.integral_f, rhs = sol.integral_VN_f / (2.0 * pot.N);
  sol.identity_residual = rhs == 0.0 ? std::abs(lhs) : std::abs(lhs - rhs) / std::abs(rhs);
  return sol;
}

/// Scattering length of V from the zero-energy radial equation -u'' + V u / 2 = 0.
inline double scattering_length(const Potential& pot, int steps = 20000) {
  if (pot.is_zero()) return 0.0;
  RVec r = RVec::LinSpaced(std::max(steps, 1000) + 1, 0.0, pot.R_V);
  auto s = detail::shoot(r, [&](double x) { return 0.5 * pot.profile(x); }, 0.0);
  return pot.R_V - s.u / s.du;
}

/// sup over r in [delta, ell] of |N omega_N(r) - omega_infinity(r)| on the radial grid.
inline double sup_error_vs_limit(const ScatteringSolution& sol, double delta, double quad_coeff = 1.0 / 3.0) {
  double err = 0.0;
  for (Index i = 0; i < sol.r.size(); ++i) {
    double x = sol.r[i];
    if (x < delta || x > sol.ell) continue;
    err = std::max(err, std::abs(sol.N_omega(x) - omega_infinity(sol.ell, sol.b0, x, quad_coeff)));
  }
  return err;
}

}  // namespace bosefluct
