#pragma once

#include <cstdint>
#include <random>

#include "bogoliubov.hpp"
#include "fock.hpp"

namespace bosefluct {

struct OracleSettings {
  int modes = 2;
  int n_max = 14;
  double t = 0.5;
  double dt = 1e-4;
  double h1_norm = 0.5;
  double h2_norm = 0.12;
  Index max_dim = 20000;
  std::uint64_t seed = 1;
};

/// A few-mode quadratic generator evolved both exactly on the truncated Fock space and
/// through the Bogoliubov pair.
struct OracleInstance {
  OracleSettings settings;
  QuadraticGenerator gen;
  FockBasis basis;
  Ccr ccr;
  CMat Ut;  // exp(-i G t)
  BogoliubovPair pair;
  std::mt19937_64 rng;

  CVec random_vector() {
    std::normal_distribution<double> nd;
    CVec v(settings.modes);
    for (auto& x : v) x = cd(nd(rng), nd(rng));
    return v;
  }
  CVec vacuum_state() const {
    CVec v = CVec::Zero(basis.dim());
    v[basis.vacuum()] = 1.0;
    return v;
  }
};

inline QuadraticGenerator random_quadratic_generator(int M, double h1, double h2, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CMat A(M, M), B(M, M);
  for (Index i = 0; i < A.size(); ++i) {
    A.data()[i] = cd(nd(rng), nd(rng));
    B.data()[i] = cd(nd(rng), nd(rng));
  }
  CMat H1 = 0.5 * (A + A.adjoint()), H2 = 0.5 * (B + B.transpose());
  return {0.0, h1 * H1 / H1.norm(), h2 * H2 / H2.norm()};
}

inline OracleInstance matched_instance(const OracleSettings& s) {
  if (s.modes < 1 || s.n_max < 4) throw ConfigError("oracle needs at least one mode and n_max >= 4");
  if (!(s.dt > 0.0) || s.t < 0.0) throw ConfigError("oracle time step must be positive and t non-negative");
  std::mt19937_64 rng(s.seed);
  auto g = random_quadratic_generator(s.modes, s.h1_norm, s.h2_norm, rng);
  FockBasis b(s.modes, s.n_max, s.max_dim);
  Ccr c = build_ccr(b);
  CMat Ut = ExactPropagator(second_quantize(b, c, g.H1, g.H2)).unitary(s.t);
  auto p = propagate([&](double) { return g; }, s.modes, 0.0, s.t, s.dt).pair;
  return {s, std::move(g), std::move(b), std::move(c), std::move(Ut), std::move(p), std::move(rng)};
}

/// Worst conjugation defect and leakage over `count` random (f, g).
inline ConjugationVerdict oracle_conjugation(OracleInstance& inst, int count, double leak_tol = 1e-8) {
  ConjugationVerdict worst;
  for (int i = 0; i < count; ++i) {
    CVec f = inst.random_vector(), g = inst.random_vector();
    auto v = verify_bogoliubov_conjugation(inst.basis, inst.ccr, inst.Ut, inst.pair.U, inst.pair.V, f, g, 2, leak_tol);
    worst.defect = std::max(worst.defect, v.defect);
    worst.leakage = std::max(worst.leakage, v.leakage);
  }
  return worst;
}

/// |<U Omega, exp(i s phi(h)) U Omega> - exp(-s^2 ||nu||^2 / 2)| with nu = U h + conj(V) conj(h).
inline CharacteristicValue oracle_characteristic_defect(const OracleInstance& inst, const CVec& h, double s) {
  CVec psi = inst.Ut * inst.vacuum_state();
  auto exact = characteristic_function_exact(inst.basis, inst.ccr, psi, h, s);
  CVec nu = inst.pair.U * h + inst.pair.V.conjugate() * h.conjugate();
  return {exact.value - std::exp(-0.5 * s * s * nu.squaredNorm()), exact.leakage};
}

/// <U Omega, N U Omega> on the truncated space.
inline double oracle_vacuum_number(const OracleInstance& inst) {
  CVec psi = inst.Ut * inst.vacuum_state();
  return (psi.adjoint() * number_operator(inst.basis) * psi)(0, 0).real();
}

/// Weight of U^* a^*(f) U Omega outside the one-particle sector.
inline double oracle_one_particle_excess(const OracleInstance& inst, const CVec& f) {
  CVec st = inst.Ut.adjoint() * creation(inst.ccr, f) * inst.Ut * inst.vacuum_state();
  double out = 0.0;
  for (Index i = 0; i < inst.basis.dim(); ++i)
    if (inst.basis.sector(i) != 1) out += std::norm(st[i]);
  return out;
}

}  // namespace bosefluct
