#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "grid.hpp"

namespace bosefluct {

/// Quadratic generator
///   G = sum K(x,y) b*_x b_y + sum H1(x,y) b*_x b_y + sum (H2(x,y) b*_x b*_y + h.c.) + c
/// in an orthonormal mode basis b_x. On a lattice b_x = sqrt(dV) a_x, so every matrix
/// here is dV times the corresponding kernel; the kinetic part K = -Delta is held apart.
struct QuadraticGenerator {
  double t = 0.0;
  CMat H1;
  CMat H2;
  cd c = 0.0;
  double antihermitian_residual = 0.0;  // norm of the discarded anti-hermitian part
};

inline void check_generator(const QuadraticGenerator& g, double tol = 1e-10) {
  const double s1 = std::max(1.0, g.H1.norm()), s2 = std::max(1.0, g.H2.norm());
  if ((g.H1 - g.H1.adjoint()).norm() > tol * s1) throw StructuralError("H1 is not self-adjoint");
  if ((g.H2 - g.H2.transpose()).norm() > tol * s2) throw StructuralError("H2 is not symmetric");
}

/// The Bogoliubov map Theta(t;s) = [[U, J V J], [V, J U J]] stored through (U, V).
struct BogoliubovPair {
  double t = 0.0, s = 0.0;
  CMat U, V;

  static BogoliubovPair identity(Index modes, double s = 0.0) {
    return {s, s, CMat::Identity(modes, modes), CMat::Zero(modes, modes)};
  }
  /// Theta(f, g) = (U f + conj(V) g, V f + conj(U) g).
  std::pair<CVec, CVec> apply(const CVec& f, const CVec& g) const {
    return {U * f + V.conjugate() * g, V * f + U.conjugate() * g};
  }
  /// || U^* U - V^* V - 1 ||_HS.
  double symplectic_defect() const {
    return (U.adjoint() * U - V.adjoint() * V - CMat::Identity(U.rows(), U.cols())).norm();
  }
  /// || U^* (J V J) - V^* (J U J) ||_HS.
  double conjugation_defect() const { return (U.adjoint() * V.conjugate() - V.adjoint() * U.conjugate()).norm(); }
  /// Vacuum expectation of the number operator after the flow.
  double vacuum_number() const { return V.squaredNorm(); }
};

/// Composition Theta(t;r) o Theta(r;s).
inline BogoliubovPair compose(const BogoliubovPair& later, const BogoliubovPair& earlier) {
  return {later.t, earlier.s, later.U * earlier.U + later.V.conjugate() * earlier.V,
          later.V * earlier.U + later.U.conjugate() * earlier.V};
}

/// Exact flow of the kinetic part: right multiplication by exp(i K tau).
class KineticFlow {
 public:
  KineticFlow() = default;
  explicit KineticFlow(const RMat& K) : es_(0.5 * (K + K.transpose())), active_(true) {}
  static KineticFlow lattice(const Lattice& lat) { return KineticFlow(-laplacian_matrix(lat)); }

  bool active() const { return active_; }
  CMat multiplier(double tau) const {
    CVec ph = (es_.eigenvalues() * tau).unaryExpr([](double a) { return std::exp(cd(0, a)); });
    CMat Q = es_.eigenvectors().cast<cd>();
    return Q * ph.asDiagonal() * Q.transpose();
  }

 private:
  Eigen::SelfAdjointEigenSolver<RMat> es_;
  bool active_ = false;
};

/// Block matrix A with d/dt Theta = Theta A for the non-kinetic part:
/// A = i [[H1, -2 H2], [2 conj(H2), -H1^T]].
/// Derived from i[G, A(f,g)] = A(i(H1 f - 2 H2 g), i(2 conj(H2) f - H1^T g)) and
/// fixed against the truncated-Fock oracle.
inline CMat flow_matrix(const QuadraticGenerator& g) {
  const Index M = g.H1.rows();
  const cd I(0, 1);
  CMat A(2 * M, 2 * M);
  A.topLeftCorner(M, M) = I * g.H1;
  A.topRightCorner(M, M) = -2.0 * I * g.H2;
  A.bottomLeftCorner(M, M) = 2.0 * I * g.H2.conjugate();
  A.bottomRightCorner(M, M) = -I * g.H1.transpose();
  return A;
}

/// One Strang step: exact kinetic half steps around a Cayley (implicit midpoint) step
/// for the generator averaged over the interval. The Cayley map keeps the pair exactly
/// on the Bogoliubov group up to rounding.
inline BogoliubovPair bdg_step(const BogoliubovPair& p, const QuadraticGenerator& g0, const QuadraticGenerator& g1,
                               double dt, const KineticFlow* kin = nullptr, const CMat* half_kick = nullptr) {
  const Index M = p.U.rows();
  CMat E;
  if (kin && kin->active()) E = half_kick ? *half_kick : kin->multiplier(0.5 * dt);
  CMat U = p.U, V = p.V;
  if (E.size()) {
    U = U * E;
    V = V * E;
  }
  CMat A = 0.5 * (flow_matrix(g0) + flow_matrix(g1));
  CMat Id = CMat::Identity(2 * M, 2 * M);
  CMat rhs = (Id + 0.5 * dt * A).leftCols(M);
  CMat C = (Id - 0.5 * dt * A).partialPivLu().solve(rhs);
  CMat C11 = C.topRows(M), C21 = C.bottomRows(M);
  CMat Un = U * C11 + V.conjugate() * C21;
  CMat Vn = V * C11 + U.conjugate() * C21;
  if (E.size()) {
    Un = Un * E;
    Vn = Vn * E;
  }
  return {p.t + dt, p.s, std::move(Un), std::move(Vn)};
}

struct PropagationDiagnostics {
  double t = 0.0;
  double V_hs_sq = 0.0;
  double sympl_defect = 0.0;
  double conj_defect = 0.0;
  double U_opnorm = 0.0;
};

struct PropagationOptions {
  double max_defect = 1e-6;
  bool resymplectify = false;  // project back onto the group after every step
  int opnorm_every = 1;  // 0 disables the operator-norm column
  std::function<void(const BogoliubovPair&)> observer;
};

struct Propagation {
  BogoliubovPair pair;
  std::vector<PropagationDiagnostics> series;
};

inline BogoliubovPair resymplectify(const BogoliubovPair& p);

inline PropagationDiagnostics diagnose(const BogoliubovPair& p, bool opnorm) {
  return {p.t, p.vacuum_number(), p.symplectic_defect(), p.conjugation_defect(),
          opnorm ? op_norm_matrix(p.U) : std::numeric_limits<double>::quiet_NaN()};
}

/// Propagates Theta(t;s) from the identity at s. `gen(tau)` is queried once per grid time.
inline Propagation propagate(const std::function<QuadraticGenerator(double)>& gen, Index modes, double s, double t,
                             double dt, const KineticFlow& kin = {}, const PropagationOptions& opt = {}) {
  if (!(dt > 0.0)) throw PreconditionError("dt must be positive");
  const long steps = std::lround(std::abs(t - s) / dt);
  const double h = steps == 0 ? 0.0 : (t - s) / steps;
  Propagation out;
  out.pair = BogoliubovPair::identity(modes, s);
  out.series.push_back(diagnose(out.pair, opt.opnorm_every > 0));
  if (opt.observer) opt.observer(out.pair);
  CMat half;
  if (kin.active() && steps > 0) half = kin.multiplier(0.5 * h);
  QuadraticGenerator g0 = gen(s);
  for (long n = 0; n < steps; ++n) {
    QuadraticGenerator g1 = gen(s + (n + 1) * h);
    out.pair = bdg_step(out.pair, g0, g1, h, &kin, half.size() ? &half : nullptr);
    out.pair.t = s + (n + 1) * h;
    if (opt.resymplectify) out.pair = resymplectify(out.pair);
    bool opn = opt.opnorm_every > 0 && ((n + 1) % opt.opnorm_every == 0 || n + 1 == steps);
    auto d = diagnose(out.pair, opn);
    out.series.push_back(d);
    if (opt.observer) opt.observer(out.pair);
    if (d.sympl_defect > opt.max_defect || d.conj_defect > opt.max_defect)
      throw SolverError("Bogoliubov propagation lost the symplectic structure; reduce dt");
    g0 = std::move(g1);
  }
  return out;
}

/// Closed-form Theta(t;0) = exp(t A) for a constant generator (kinetic part included in K).
inline BogoliubovPair constant_generator_flow(const QuadraticGenerator& g, double t, const RMat* K = nullptr);

}  // namespace bosefluct

#include <unsupported/Eigen/MatrixFunctions>

namespace bosefluct {

/// Polar-type projection Theta -> Theta Z^{-1/2}, Z = S Theta^* S Theta.
inline BogoliubovPair resymplectify(const BogoliubovPair& p) {
  const Index M = p.U.rows();
  CMat Th(2 * M, 2 * M);
  Th << p.U, p.V.conjugate(), p.V, p.U.conjugate();
  CMat S = CMat::Identity(2 * M, 2 * M);
  S.bottomRightCorner(M, M) *= -1.0;
  CMat Z = S * Th.adjoint() * S * Th;
  CMat R = Th * Z.sqrt().inverse();
  return {p.t, p.s, R.topLeftCorner(M, M), R.bottomLeftCorner(M, M)};
}

inline BogoliubovPair constant_generator_flow(const QuadraticGenerator& g, double t, const RMat* K) {
  QuadraticGenerator full = g;
  if (K) full.H1 += K->cast<cd>();
  const Index M = g.H1.rows();
  CMat X = (t * flow_matrix(full)).exp();
  return {t, 0.0, X.topLeftCorner(M, M), X.bottomLeftCorner(M, M)};
}

}  // namespace bosefluct
