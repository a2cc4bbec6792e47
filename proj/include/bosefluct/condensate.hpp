#pragma once

#include <string>
#include <vector>

#include "grid.hpp"
#include "radial_sampling.hpp"
#include "scattering.hpp"

namespace bosefluct {

enum class NonlinearityMode { cubic, linear_as_printed };

struct CondensateTrajectory {
  enum class Flavor { nls, modified_hartree };

  Lattice lat;
  double dt = 0.0;
  Flavor flavor = Flavor::nls;
  double sigma = 0.0;  // NLS coupling
  double N = 0.0;      // Hartree particle number
  std::vector<double> times;
  std::vector<GridFunction> snapshots;
  std::vector<std::string> warnings;

  const GridFunction& at_step(size_t n) const { return snapshots.at(n); }
  size_t steps() const { return snapshots.empty() ? 0 : snapshots.size() - 1; }
  const GridFunction& final_state() const { return snapshots.back(); }
};

/// Normalised periodised Gaussian centred in the box, optionally carrying a plane-wave kick.
inline GridFunction gaussian_initial_state(const Lattice& lat, double width, int kick = 0) {
  auto g = GridFunction::sample(lat, [&](const Vec3& x) {
    double prod = 1.0;
    for (int ax = 0; ax < lat.dim; ++ax) {
      double s = 0;
      for (int img = -3; img <= 3; ++img) {
        double d = x[ax] - 0.5 * lat.L + img * lat.L;
        s += std::exp(-d * d / (2 * width * width));
      }
      prod *= s;
    }
    return prod * std::exp(cd(0, 2 * kPi * kick * x[0] / lat.L));
  });
  return g.normalized();
}

/// E = int |grad phi|^2 + (sigma/2) |phi|^4.
inline double nls_energy(const GridFunction& phi, double sigma) {
  auto c = fourier_transform(phi, Direction::forward);
  double kin = 0;
  for (Index i = 0; i < c.v.size(); ++i) kin += ksq(phi.lat.wavevector(i)) * std::norm(c.v[i]);
  double pot = phi.v.cwiseAbs2().cwiseAbs2().sum();
  return phi.lat.dv() * (kin + 0.5 * sigma * pot);
}

namespace detail {

inline void free_step(GridFunction& phi, double tau) {
  phi = apply_multiplier(phi, [tau](const Vec3& k) { return std::exp(cd(0, -ksq(k) * tau)); });
}

/// Strang splitting: half potential step, full kinetic step, half potential step.
template <class Potential>
CondensateTrajectory split_step(const GridFunction& phi0, double T, double dt, Potential&& potential) {
  if (!(dt > 0.0)) throw PreconditionError("dt must be positive");
  if (T < 0.0) throw PreconditionError("T must be non-negative");
  if (!(phi0.norm() > 0.0)) throw PreconditionError("initial state must be nonzero");
  CondensateTrajectory tr;
  tr.lat = phi0.lat;
  tr.dt = dt;
  const long steps = std::lround(T / dt);
  tr.times.reserve(steps + 1);
  tr.snapshots.reserve(steps + 1);
  GridFunction phi = phi0;
  tr.times.push_back(0.0);
  tr.snapshots.push_back(phi);
  for (long n = 0; n < steps; ++n) {
    RVec w = potential(phi);
    for (Index i = 0; i < phi.v.size(); ++i) phi.v[i] *= std::exp(cd(0, -0.5 * dt * w[i]));
    free_step(phi, dt);
    w = potential(phi);
    for (Index i = 0; i < phi.v.size(); ++i) phi.v[i] *= std::exp(cd(0, -0.5 * dt * w[i]));
    tr.times.push_back((n + 1) * dt);
    tr.snapshots.push_back(phi);
  }
  return tr;
}

}  // namespace detail

/// i d_t phi = -Delta phi + sigma |phi|^2 phi (or + sigma phi in the linear reading).
inline CondensateTrajectory evolve_nls(const GridFunction& phi0, double sigma, double T, double dt,
                                       NonlinearityMode mode = NonlinearityMode::cubic) {
  auto tr = detail::split_step(phi0, T, dt, [&](const GridFunction& phi) -> RVec {
    if (mode == NonlinearityMode::linear_as_printed) return RVec::Constant(phi.v.size(), sigma);
    return sigma * phi.v.cwiseAbs2();
  });
  tr.flavor = CondensateTrajectory::Flavor::nls;
  tr.sigma = sigma;
  return tr;
}

/// Lattice tabulation of V_N f_N whose lattice integral equals int V_N f_N.
/// Point samples when resolved, cell averages otherwise.
struct HartreeKernel {
  GridFunction g;
  double integral = 0.0;
  bool resolved = true;
};

inline HartreeKernel tabulate_hartree_kernel(const Lattice& lat, const Potential& pot, const ScatteringSolution& scat) {
  HartreeKernel hk;
  hk.g = GridFunction(lat);
  hk.integral = pot.is_zero() ? 0.0 : scat.integral_VN_f;
  if (pot.is_zero()) return hk;
  const double RN = pot.R_N();
  hk.resolved = RN / lat.h() >= 4.0;
  auto s = [&](double r) { return pot.V_N(r) * scat.f(r); };
  const double reach = RN + std::sqrt(double(lat.dim)) * lat.h();
  for (Index i = 0; i < lat.size(); ++i) {
    Vec3 x = lat.displacement(0, i);
    double rx = std::sqrt(ksq(x));
    if (rx > reach) continue;
    hk.g.v[i] = hk.resolved ? s(rx) : cell_average_radial(lat, x, s, RN);
  }
  double sum = lat.dv() * hk.g.v.real().sum();
  if (sum > 0.0) hk.g.v *= hk.integral / sum;
  return hk;
}

/// (g * rho)(x) = int g(x - y) rho(y) dy on the torus.
inline RVec periodic_convolution(const GridFunction& g, const RVec& rho) {
  GridFunction r(g.lat, rho.cast<cd>());
  auto gh = fourier_transform(g, Direction::forward);
  auto rh = fourier_transform(r, Direction::forward);
  GridFunction c(g.lat, gh.v.cwiseProduct(rh.v) * std::sqrt(double(g.lat.size())) * g.lat.dv());
  return fourier_transform(c, Direction::inverse).v.real();
}

/// i d_t phi = -Delta phi + (V_N f_N * |phi|^2) phi.
inline CondensateTrajectory evolve_modified_hartree(const GridFunction& phi0, const Potential& pot,
                                                    const ScatteringSolution& scat, double T, double dt) {
  auto hk = tabulate_hartree_kernel(phi0.lat, pot, scat);
  auto tr = detail::split_step(phi0, T, dt, [&](const GridFunction& phi) -> RVec {
    if (pot.is_zero()) return RVec::Zero(phi.v.size());
    return periodic_convolution(hk.g, phi.v.cwiseAbs2());
  });
  tr.flavor = CondensateTrajectory::Flavor::modified_hartree;
  tr.N = pot.N;
  if (!hk.resolved)
    tr.warnings.push_back("V_N under-resolved: fewer than 4 lattice points across N^-beta R_V; cell-averaged tabulation used");
  return tr;
}

/// Kernel of q = 1 - |phi><phi|.
inline Kernel projector_q(const GridFunction& phi) {
  double n = phi.norm();
  if (!(n > 0.0)) throw PreconditionError("projector of the zero function");
  if (std::abs(n - 1.0) > 1e-8) throw PreconditionError("projector requires a normalised function");
  Kernel q = identity_kernel(phi.lat);
  q.k -= phi.v * phi.v.adjoint();
  return q;
}

}  // namespace bosefluct
