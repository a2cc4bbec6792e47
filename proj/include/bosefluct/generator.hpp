#pragma once

#include <string>
#include <vector>

#include "bogoliubov.hpp"
#include "fock.hpp"
#include "kernels.hpp"

namespace bosefluct {

/// Operator ordering of a quadratic term  int K(x;y) X(F_x) Y(G_y).
enum class Ordering { cc, ca, ac, aa };  // a*a*, a*a, a a*, a a

/// One displayed term in mode matrices: column x of F is F_x, with a^*(f) = sum f_i b^*_i
/// and a(f) = sum conj(f_i) b_i. A plain a_x has F = identity.
struct QuadraticTerm {
  Ordering ordering;
  CMat F, K, G;
  bool plus_hc = false;
  std::string group;
};

/// Normal-ordered coefficients  sum H1 b*b + sum P b*b* + sum Q bb + c  before hermitisation.
struct NormalOrdered {
  CMat H1, P, Q;
  cd c = 0.0;
};

inline NormalOrdered normal_order(const std::vector<QuadraticTerm>& terms, Index M) {
  NormalOrdered n{CMat::Zero(M, M), CMat::Zero(M, M), CMat::Zero(M, M), 0.0};
  for (const auto& t : terms) {
    CMat h1 = CMat::Zero(M, M), p = CMat::Zero(M, M), q = CMat::Zero(M, M);
    cd c = 0.0;
    switch (t.ordering) {
      case Ordering::ca:
        h1 = t.F * t.K * t.G.adjoint();
        break;
      case Ordering::cc:
        p = t.F * t.K * t.G.transpose();
        break;
      case Ordering::aa:
        q = t.F.conjugate() * t.K * t.G.adjoint();
        break;
      case Ordering::ac:
        h1 = t.G * t.K.transpose() * t.F.adjoint();
        c = (t.K.transpose() * t.F.adjoint() * t.G).trace();
        break;
    }
    n.H1 += h1;
    n.P += p;
    n.Q += q;
    n.c += c;
    if (t.plus_hc) {
      n.H1 += h1.adjoint();
      n.P += q.adjoint();
      n.Q += p.adjoint();
      n.c += std::conj(c);
    }
  }
  return n;
}

/// Hermitian part of the normal-ordered form.
inline QuadraticGenerator hermitize(const NormalOrdered& n, double t) {
  QuadraticGenerator g;
  g.t = t;
  g.H1 = 0.5 * (n.H1 + n.H1.adjoint());
  CMat P = 0.5 * (n.P + n.Q.adjoint());
  g.H2 = 0.5 * (P + P.transpose());
  g.c = n.c.real();
  CMat R = 0.5 * (n.P - n.Q.adjoint());
  g.antihermitian_residual = (0.5 * (n.H1 - n.H1.adjoint())).norm() + (0.5 * (R + R.transpose())).norm();
  return g;
}

/// Term-by-term second quantisation on a truncated Fock space (oracle for normal_order).
inline CMat fock_terms(const FockBasis& basis, const Ccr& ccr, const std::vector<QuadraticTerm>& terms) {
  const Index D = basis.dim();
  CMat out = CMat::Zero(D, D);
  auto op = [&](bool create, const CVec& f) { return create ? creation(ccr, f) : annihilation(ccr, f); };
  for (const auto& t : terms) {
    bool xc = t.ordering == Ordering::cc || t.ordering == Ordering::ca;
    bool yc = t.ordering == Ordering::cc || t.ordering == Ordering::ac;
    std::vector<CMat> X, Y;
    for (Index i = 0; i < t.F.cols(); ++i) X.push_back(op(xc, t.F.col(i)));
    for (Index j = 0; j < t.G.cols(); ++j) Y.push_back(op(yc, t.G.col(j)));
    CMat term = CMat::Zero(D, D);
    for (Index x = 0; x < t.K.rows(); ++x)
      for (Index y = 0; y < t.K.cols(); ++y)
        if (t.K(x, y) != 0.0) term += t.K(x, y) * X[x] * Y[y];
    out += term;
    if (t.plus_hc) out += term.adjoint();
  }
  return out;
}

/// Midpoint-sampled pairing kernel  w(x - y) m((x + y)/2)  as a mode matrix.
inline CMat midpoint_pairing(const Lattice& lat, const RVec& w, const CVec& mid) {
  return midpoint_kernel(lat, w, mid).op();
}

struct GeneratorInputs {
  double b0 = 0.0;
  double ell = 0.0;
  RVec omega_samples;  // omega_infinity on lattice displacements
  bool quartic_group_has_b0 = true;  // false: the quartic-norm group without the b0 prefactor
};

inline GeneratorInputs generator_inputs(const Lattice& lat, double b0, double ell, double quad_coeff = 1.0 / 3.0) {
  return {b0, ell, sample_profile(lat, limiting_profile(ell, b0, quad_coeff))};
}

/// Every displayed term of the quadratic generator minus the kinetic energy, in mode matrices.
inline std::vector<QuadraticTerm> generator_terms(const KernelFamily& f, const GeneratorInputs& in) {
  if (!f.has_eta_dot) throw StructuralError("kernel family lacks the time derivative of eta");
  const Lattice& lat = f.lat();
  const Index M = lat.size();
  const double dv = lat.dv();
  const CMat I = CMat::Identity(M, M);
  const CMat ch = f.ch.op(), sh = f.sh.op(), p = f.p.op(), r = f.r.op(), k = f.k.op(), mu = f.mu.op();
  const CMat ed = f.eta_dot.op(), K1 = f.K1.op(), K2 = f.K2.op();
  const CMat Lap = (-laplacian_matrix(lat)).cast<cd>();
  const CVec& phi = f.phi.v;
  const CMat W = (in.b0 * phi.cwiseAbs2()).cast<cd>().asDiagonal();
  const CMat pL = p * Lap, rL = r * Lap, muL = mu * Lap;

  std::vector<QuadraticTerm> T;
  auto add = [&](Ordering o, const CMat& F, const CMat& K, const CMat& G, bool hc, const char* grp) {
    T.push_back({o, F, K, G, hc, grp});
  };
  using O = Ordering;

  // (i d_t T) T^*
  add(O::cc, ch, ed, ch, true, "dT");
  add(O::aa, sh, ed, sh, true, "dT");
  add(O::ca, ch, ed, sh, true, "dT");
  add(O::ca, ch, ed.transpose(), sh, true, "dT");

  // Interaction groups.
  add(O::ca, ch, W, ch, false, "V1");
  add(O::ca, sh, W, sh, false, "V1");
  add(O::cc, ch, W, sh, false, "V1");
  add(O::aa, ch, W, sh, false, "V1");

  add(O::ca, ch, K1, ch, false, "V2");
  add(O::ca, sh, K1, sh, false, "V2");
  add(O::cc, ch, K1, sh, false, "V2");
  add(O::aa, ch, K1.transpose(), sh, false, "V2");

  add(O::ca, ch, K2, sh, true, "V3");
  add(O::ca, ch, K2.transpose(), sh, true, "V3");
  add(O::cc, ch, K2, ch, true, "V3");
  add(O::aa, sh, K2, sh, true, "V3");

  const CVec ph = std::sqrt(dv) * phi;
  const CVec g3 = std::sqrt(dv) * phi.cwiseAbs2().cwiseProduct(phi);
  const double l4 = dv * phi.cwiseAbs2().cwiseAbs2().sum();
  CMat one = CMat::Constant(1, 1, in.quartic_group_has_b0 ? in.b0 : 1.0);
  add(O::ca, ph, one * (0.5 * l4), ph, true, "V4");
  add(O::ca, ph, -one, g3, true, "V4");

  // Pairing on the ball of radius ell.
  CVec half = refine_to_half_lattice(f.phi).v;
  CVec half_sq = half.cwiseProduct(half);
  RVec chi(M);
  for (Index i = 0; i < M; ++i) chi[i] = std::sqrt(ksq(lat.displacement(0, i))) <= in.ell ? 1.0 : 0.0;
  const double lam = 3.0 * in.b0 / (8.0 * kPi * std::pow(in.ell, 3));
  add(O::cc, I, midpoint_pairing(lat, lam * chi, half_sq), I, true, "lambda");

  // Kinetic corrections.
  add(O::ca, I, I, pL, false, "K");
  add(O::ca, pL, I, ch, false, "K");
  add(O::ca, k, I, rL, false, "K");
  for (int ax = 0; ax < lat.dim; ++ax) {
    CMat kD = k * derivative_matrix(lat, ax).transpose().cast<cd>();
    add(O::ca, kD, I, kD, false, "K");
  }
  add(O::ca, rL, I, r, false, "K");

  add(O::cc, I, I, muL, false, "K");
  add(O::cc, I, I, rL, false, "K");
  add(O::cc, pL, I, sh, false, "K");
  add(O::aa, rL, I, I, false, "K");
  add(O::aa, muL, I, I, false, "K");
  add(O::aa, sh, I, pL, false, "K");
  add(O::ca, rL, I, k, false, "K");

  CVec lap_half = refine_to_half_lattice(f.phi, [](const Vec3& q) { return cd(-ksq(q)); }).v;
  CVec grad_sq = CVec::Zero(half.size());
  for (int ax = 0; ax < lat.dim; ++ax) {
    CVec g = refine_to_half_lattice(f.phi, [ax](const Vec3& q) { return cd(0, q[ax]); }).v;
    grad_sq += g.cwiseProduct(g);
  }
  add(O::cc, I, midpoint_pairing(lat, 0.5 * in.omega_samples, half.cwiseProduct(lap_half)), I, true, "K");
  add(O::cc, I, midpoint_pairing(lat, 0.5 * in.omega_samples, grad_sq), I, true, "K");
  return T;
}

/// The quadratic generator at the family's time, hermitised; the kinetic part is kept apart.
inline QuadraticGenerator assemble_generator(const KernelFamily& f, const GeneratorInputs& in) {
  auto n = normal_order(generator_terms(f, in), f.lat().size());
  auto g = hermitize(n, f.t);
  check_generator(g);
  return g;
}

/// Generator source along a limiting condensate trajectory sampled every dt.
class GeneratorSource {
 public:
  GeneratorSource(const CondensateTrajectory& tr, const EtaBuilder& builder, GeneratorInputs in)
      : tr_(tr), builder_(builder), in_(std::move(in)) {}

  QuadraticGenerator operator()(double t) const {
    long n = std::lround(t / tr_.dt);
    if (n < 0 || size_t(n) > tr_.steps() || std::abs(n * tr_.dt - t) > 1e-9 * std::max(1.0, t))
      throw PreconditionError("generator requested off the condensate time grid");
    auto f = family_at(tr_, size_t(n), builder_, in_.b0);
    return assemble_generator(f, in_);
  }

 private:
  const CondensateTrajectory& tr_;
  const EtaBuilder& builder_;
  GeneratorInputs in_;
};

}  // namespace bosefluct
