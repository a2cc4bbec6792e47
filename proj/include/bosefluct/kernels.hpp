#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <string>

#include "condensate.hpp"
#include "grid.hpp"
#include "radial_sampling.hpp"
#include "scattering.hpp"

namespace bosefluct {

/// Radial correlation profile omega(r), r > 0, supported in [0, support].
struct RadialProfile {
  std::function<double(double)> value;
  double support = 0.0;
  bool zero = false;
};

inline RadialProfile limiting_profile(double ell, double b0, double quad_coeff = 1.0 / 3.0) {
  RadialProfile p;
  p.support = ell;
  p.zero = b0 == 0.0;
  p.value = [=](double r) { return omega_infinity(ell, b0, r, quad_coeff); };
  return p;
}

/// N omega_N(r) from the Neumann scattering solution.
inline RadialProfile finite_profile(const ScatteringSolution& scat) {
  RadialProfile p;
  p.support = scat.ell;
  p.zero = scat.b0 == 0.0;
  p.value = [scat](double r) { return scat.N_omega(r); };
  return p;
}

/// omega sampled on lattice displacements z = displacement(0, i). Off the origin the
/// profile is sampled at |z|; at the origin it is the cell average (d = 2, 3) or the
/// value at half a cell (d = 1, where the 1/r average diverges).
inline RVec sample_profile(const Lattice& lat, const RadialProfile& prof) {
  RVec w = RVec::Zero(lat.size());
  if (prof.zero) return w;
  if (prof.support >= 0.5 * lat.L) throw PreconditionError("profile support must be shorter than half the box");
  for (Index i = 1; i < lat.size(); ++i) {
    double r = std::sqrt(ksq(lat.displacement(0, i)));
    w[i] = r > prof.support ? 0.0 : prof.value(r);
  }
  w[0] = lat.dim == 1 ? prof.value(0.5 * lat.h()) : cell_average_radial(lat, Vec3{0, 0, 0}, prof.value, prof.support);
  return w;
}

inline void require_normalized(const GridFunction& phi) {
  if (std::abs(phi.norm() - 1.0) > 1e-8) throw PreconditionError("condensate wave function must be normalised");
}

/// Two-point function w(x - y) m((x + y)/2), with m given on the half lattice.
inline Kernel midpoint_kernel(const Lattice& lat, const RVec& w, const CVec& mid) {
  Kernel K(lat);
  for (Index x = 0; x < lat.size(); ++x) {
    auto a = lat.unflatten(x);
    for (Index y = 0; y < lat.size(); ++y) {
      auto b = lat.unflatten(y);
      std::array<int, 3> d{0, 0, 0};
      for (int ax = 0; ax < lat.dim; ++ax) d[ax] = b[ax] - a[ax];
      double wv = w[lat.flatten(d)];
      if (wv != 0.0) K.k(x, y) = wv * mid[lat.midpoint(x, y)];
    }
  }
  return K;
}

/// (q (x) q) applied slot-wise: op(q) op(K) op(q)^T.
inline Kernel project_slots(const Kernel& q, const Kernel& K) {
  return Kernel::from_op(K.lat, q.op() * K.op() * q.op().transpose());
}

/// Builds eta = -(q (x) q) omega(x - y) phi^2((x + y)/2) for a fixed profile.
class EtaBuilder {
 public:
  EtaBuilder(const Lattice& lat, RadialProfile prof) : lat_(lat), prof_(std::move(prof)), w_(sample_profile(lat, prof_)) {}

  const Lattice& lattice() const { return lat_; }
  const RadialProfile& profile() const { return prof_; }
  const RVec& samples() const { return w_; }

  /// Unprojected base -omega(x - y) phi^2((x + y)/2).
  Kernel base(const GridFunction& phi) const {
    require_same(lat_, phi.lat);
    CVec half = refine_to_half_lattice(phi).v;
    return midpoint_kernel(lat_, -w_, half.cwiseProduct(half));
  }
  Kernel eta(const GridFunction& phi) const {
    require_normalized(phi);
    return project_slots(projector_q(phi), base(phi));
  }

 private:
  Lattice lat_;
  RadialProfile prof_;
  RVec w_;
};

inline Kernel build_eta(const GridFunction& phi, const RadialProfile& prof) { return EtaBuilder(phi.lat, prof).eta(phi); }

/// sh = sum (eta conj(eta))^n eta / (2n+1)!, ch = sum (eta conj(eta))^n / (2n)!,
/// truncated once the next term has HS norm below tol.
inline std::pair<Kernel, Kernel> hyperbolic_functions(const Kernel& eta, double tol = 1e-14) {
  const CMat E = eta.op();
  const CMat P = E * E.conjugate();
  const Index M = E.rows();
  CMat ch = CMat::Identity(M, M), sh = E;
  CMat cterm = CMat::Identity(M, M), sterm = E;
  for (int n = 1; n < 200; ++n) {
    cterm = cterm * P / double((2 * n - 1) * (2 * n));
    sterm = cterm * E / double(2 * n + 1);
    ch += cterm;
    sh += sterm;
    if (cterm.norm() < tol && sterm.norm() < tol) break;
  }
  return {Kernel::from_op(eta.lat, sh), Kernel::from_op(eta.lat, ch)};
}

inline std::pair<Kernel, Kernel> build_K1_K2(const GridFunction& phi, double b0, const Kernel& q) {
  require_normalized(phi);
  const CMat Q = q.op();
  CMat K1 = Q * (b0 * phi.v.cwiseAbs2()).cast<cd>().asDiagonal() * Q;
  CMat K2 = Q * (b0 * phi.v.cwiseProduct(phi.v)).asDiagonal() * Q.transpose();
  return {Kernel::from_op(phi.lat, K1), Kernel::from_op(phi.lat, K2)};
}

struct FamilyNorms {
  double eta = 0, sh = 0, p = 0, r = 0, k = 0, mu = 0, eta_dot = 0;
};

struct KernelFamily {
  enum class Source { limiting, finite_N };

  double t = 0.0;
  Source source = Source::limiting;
  double N = 0.0;
  GridFunction phi;
  Kernel q, eta, sh, ch, p, k, mu, r, K1, K2, eta_dot;
  bool has_eta_dot = false;
  bool eta_dot_one_sided = false;
  FamilyNorms norms;

  const Lattice& lat() const { return eta.lat; }
};

/// r = sh - eta, p = ch - 1, k = unprojected base, mu = eta - k.
inline void decompose(KernelFamily& f, const Kernel& base) {
  f.r = f.sh - f.eta;
  f.p = f.ch - identity_kernel(f.lat());
  f.k = base;
  f.mu = f.eta - f.k;
  f.norms.eta = hs_norm(f.eta);
  f.norms.sh = hs_norm(f.sh);
  f.norms.p = hs_norm(f.p);
  f.norms.r = hs_norm(f.r);
  f.norms.k = hs_norm(f.k);
  f.norms.mu = hs_norm(f.mu);
}

inline KernelFamily make_family(const EtaBuilder& builder, const GridFunction& phi, double b0, double t,
                                KernelFamily::Source source = KernelFamily::Source::limiting, double N = 0.0) {
  require_normalized(phi);
  KernelFamily f;
  f.t = t;
  f.source = source;
  f.N = N;
  f.phi = phi;
  f.q = projector_q(phi);
  Kernel base = builder.base(phi);
  f.eta = project_slots(f.q, base);
  std::tie(f.sh, f.ch) = hyperbolic_functions(f.eta);
  decompose(f, base);
  std::tie(f.K1, f.K2) = build_K1_K2(phi, b0, f.q);
  return f;
}

struct EtaDerivative {
  Kernel value;
  bool one_sided = false;
};

/// Centred difference of eta over neighbouring snapshots; one-sided (first order) at the ends.
inline EtaDerivative eta_time_derivative(const CondensateTrajectory& tr, size_t n, const EtaBuilder& builder) {
  const size_t last = tr.steps();
  if (n > last) throw PreconditionError("time index outside the trajectory");
  if (last == 0) return {Kernel(builder.lattice()), true};
  size_t lo = n == 0 ? 0 : n - 1, hi = n == last ? last : n + 1;
  Kernel a = builder.eta(tr.at_step(lo)), b = builder.eta(tr.at_step(hi));
  double span = tr.times[hi] - tr.times[lo];
  return {Kernel(builder.lattice(), (b.k - a.k) / span), lo == n || hi == n};
}

inline void attach_eta_dot(KernelFamily& f, const EtaDerivative& d) {
  f.eta_dot = d.value;
  f.has_eta_dot = true;
  f.eta_dot_one_sided = d.one_sided;
  f.norms.eta_dot = hs_norm(d.value);
}

/// Family at trajectory step n, with eta_dot.
inline KernelFamily family_at(const CondensateTrajectory& tr, size_t n, const EtaBuilder& builder, double b0) {
  auto f = make_family(builder, tr.at_step(n), b0, tr.times.at(n));
  attach_eta_dot(f, eta_time_derivative(tr, n, builder));
  return f;
}

struct FamilyDefects {
  double eta_symmetry = 0;
  double hyperbolic_identity = 0;  // || ch ch - sh conj(sh) - 1 ||_HS
  double intertwining = 0;         // || ch sh - sh conj(ch) ||_HS
  double q_range = 0;              // || q eta - eta ||_HS
  double sh_bound_excess = 0;      // max(0, ||sh|| - sinh ||eta||)
  double p_bound_excess = 0;       // max(0, ||p||_op - (cosh ||eta|| - 1))
};

inline FamilyDefects check_family(const KernelFamily& f) {
  FamilyDefects d;
  const CMat E = f.eta.op(), S = f.sh.op(), C = f.ch.op();
  const Index M = E.rows();
  d.eta_symmetry = (E - E.transpose()).norm();
  d.hyperbolic_identity = (C * C - S * S.conjugate() - CMat::Identity(M, M)).norm();
  d.intertwining = (C * S - S * C.conjugate()).norm();
  d.q_range = (f.q.op() * E - E).norm();
  d.sh_bound_excess = std::max(0.0, f.norms.sh - std::sinh(f.norms.eta));
  d.p_bound_excess = std::max(0.0, op_norm(f.p) - (std::cosh(f.norms.eta) - 1.0));
  return d;
}

/// Binary snapshot: int32 d, int32 m, double L, double t, then row-major complex doubles.
inline void write_kernel(const std::string& path, const Kernel& K, double t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  std::int32_t d = K.lat.dim, m = K.lat.m;
  out.write(reinterpret_cast<const char*>(&d), sizeof d);
  out.write(reinterpret_cast<const char*>(&m), sizeof m);
  out.write(reinterpret_cast<const char*>(&K.lat.L), sizeof(double));
  out.write(reinterpret_cast<const char*>(&t), sizeof t);
  for (Index i = 0; i < K.k.rows(); ++i)
    for (Index j = 0; j < K.k.cols(); ++j) {
      double re = K.k(i, j).real(), im = K.k(i, j).imag();
      out.write(reinterpret_cast<const char*>(&re), sizeof re);
      out.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
  if (!out) throw ConfigError("failed writing " + path);
}

inline std::pair<Kernel, double> read_kernel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::int32_t d = 0, m = 0;
  double L = 0, t = 0;
  in.read(reinterpret_cast<char*>(&d), sizeof d);
  in.read(reinterpret_cast<char*>(&m), sizeof m);
  in.read(reinterpret_cast<char*>(&L), sizeof L);
  in.read(reinterpret_cast<char*>(&t), sizeof t);
  if (!in) throw StructuralError("truncated kernel header in " + path);
  Kernel K(Lattice(d, m, L));
  for (Index i = 0; i < K.k.rows(); ++i)
    for (Index j = 0; j < K.k.cols(); ++j) {
      double re = 0, im = 0;
      in.read(reinterpret_cast<char*>(&re), sizeof re);
      in.read(reinterpret_cast<char*>(&im), sizeof im);
      K.k(i, j) = cd(re, im);
    }
  if (!in) throw StructuralError("truncated kernel data in " + path);
  return {K, t};
}

}  // namespace bosefluct
