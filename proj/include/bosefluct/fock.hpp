#pragma once

#include <Eigen/Sparse>

#include <algorithm>
#include <map>
#include <vector>

#include "grid.hpp"

namespace bosefluct {

using SpMat = Eigen::SparseMatrix<cd>;

/// Occupation-number basis with total occupation <= n_max, graded lexicographic order.
class FockBasis {
 public:
  FockBasis(int modes, int n_max, Index max_dim = 20000) : modes_(modes), n_max_(n_max) {
    if (modes < 1 || n_max < 0) throw ConfigError("Fock basis needs at least one mode and n_max >= 0");
    std::vector<int> cur(modes, 0);
    for (int n = 0; n <= n_max; ++n) {
      enumerate(0, n, cur);
      if (Index(states_.size()) > max_dim) throw ConfigError("Fock dimension exceeds the configured limit");
    }
    for (Index i = 0; i < dim(); ++i) index_[states_[i]] = i;
  }

  Index dim() const { return Index(states_.size()); }
  int modes() const { return modes_; }
  int n_max() const { return n_max_; }
  const std::vector<int>& state(Index i) const { return states_[i]; }
  int sector(Index i) const { return sum(states_[i]); }
  Index find(const std::vector<int>& occ) const {
    auto it = index_.find(occ);
    return it == index_.end() ? -1 : it->second;
  }
  Index vacuum() const { return 0; }

  /// Weight of psi in sectors with total occupation >= n.
  double weight_at_or_above(const CVec& psi, int n) const {
    double w = 0;
    for (Index i = 0; i < dim(); ++i)
      if (sector(i) >= n) w += std::norm(psi[i]);
    return w;
  }
  /// Weight in the top two sectors, the cutoff-leakage monitor.
  double leakage(const CVec& psi) const { return weight_at_or_above(psi, n_max_ - 1); }

 private:
  static int sum(const std::vector<int>& v) {
    int s = 0;
    for (int x : v) s += x;
    return s;
  }
  void enumerate(int pos, int left, std::vector<int>& cur) {
    if (pos == modes_ - 1) {
      cur[pos] = left;
      states_.push_back(cur);
      return;
    }
    for (int k = left; k >= 0; --k) {
      cur[pos] = k;
      enumerate(pos + 1, left - k, cur);
    }
  }

  int modes_, n_max_;
  std::vector<std::vector<int>> states_;
  std::map<std::vector<int>, Index> index_;
};

/// Annihilation operators a_i (sqrt(n) amplitudes); creation operators are their adjoints.
struct Ccr {
  std::vector<SpMat> a, adag;
};

inline Ccr build_ccr(const FockBasis& basis) {
  Ccr c;
  const Index D = basis.dim();
  for (int i = 0; i < basis.modes(); ++i) {
    std::vector<Eigen::Triplet<cd>> tr;
    for (Index col = 0; col < D; ++col) {
      auto occ = basis.state(col);
      if (occ[i] == 0) continue;
      double amp = std::sqrt(double(occ[i]));
      occ[i] -= 1;
      tr.emplace_back(basis.find(occ), col, amp);
    }
    SpMat m(D, D);
    m.setFromTriplets(tr.begin(), tr.end());
    c.a.push_back(m);
    c.adag.push_back(SpMat(m.adjoint()));
  }
  return c;
}

/// Total number operator.
inline CMat number_operator(const FockBasis& basis) {
  CMat n = CMat::Zero(basis.dim(), basis.dim());
  for (Index i = 0; i < basis.dim(); ++i) n(i, i) = basis.sector(i);
  return n;
}

/// sum H1(i,j) a_i^* a_j + sum (H2(i,j) a_i^* a_j^* + conj(H2(i,j)) a_i a_j) + c.
inline CMat second_quantize(const FockBasis& basis, const Ccr& ccr, const CMat& H1, const CMat& H2, cd c = 0.0) {
  const int M = basis.modes();
  if (H1.rows() != M || H1.cols() != M || H2.rows() != M || H2.cols() != M)
    throw StructuralError("coefficient matrices must be modes x modes");
  SpMat G(basis.dim(), basis.dim());
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      if (H1(i, j) != 0.0) G += H1(i, j) * (ccr.adag[i] * ccr.a[j]);
      if (H2(i, j) != 0.0) {
        G += H2(i, j) * (ccr.adag[i] * ccr.adag[j]);
        G += std::conj(H2(i, j)) * (ccr.a[i] * ccr.a[j]);
      }
    }
  CMat out = CMat(G);
  out.diagonal().array() += c;
  return out;
}

/// a^*(f) = sum f_i a_i^*, a(f) = sum conj(f_i) a_i.
inline CMat creation(const Ccr& ccr, const CVec& f) {
  SpMat s(ccr.a[0].rows(), ccr.a[0].cols());
  for (size_t i = 0; i < ccr.a.size(); ++i) s += f[i] * ccr.adag[i];
  return CMat(s);
}
inline CMat annihilation(const Ccr& ccr, const CVec& f) {
  SpMat s(ccr.a[0].rows(), ccr.a[0].cols());
  for (size_t i = 0; i < ccr.a.size(); ++i) s += std::conj(f[i]) * ccr.a[i];
  return CMat(s);
}
/// A(f, g) = a^*(f) + a(conj g).
inline CMat field_A(const Ccr& ccr, const CVec& f, const CVec& g) {
  return creation(ccr, f) + annihilation(ccr, g.conjugate());
}
/// phi_a(h) = a^*(h) + a(h).
inline CMat field_phi(const Ccr& ccr, const CVec& h) { return creation(ccr, h) + annihilation(ccr, h); }

inline void require_hermitian(const CMat& G, const char* what) {
  double scale = std::max(1.0, G.norm());
  if ((G - G.adjoint()).norm() > 1e-12 * scale) throw PreconditionError(what);
}

/// exp(-i G t) for a constant hermitian generator, from one cached eigendecomposition.
class ExactPropagator {
 public:
  explicit ExactPropagator(const CMat& G) {
    require_hermitian(G, "generator must be hermitian");
    es_.compute(0.5 * (G + G.adjoint()));
  }
  CMat unitary(double t) const {
    const auto& E = es_.eigenvalues();
    CVec ph(E.size());
    for (Index i = 0; i < E.size(); ++i) ph[i] = std::exp(cd(0, -E[i] * t));
    return es_.eigenvectors() * ph.asDiagonal() * es_.eigenvectors().adjoint();
  }
  CVec evolve(const CVec& psi, double t) const {
    const auto& E = es_.eigenvalues();
    CVec c = es_.eigenvectors().adjoint() * psi;
    for (Index i = 0; i < E.size(); ++i) c[i] *= std::exp(cd(0, -E[i] * t));
    return es_.eigenvectors() * c;
  }

 private:
  Eigen::SelfAdjointEigenSolver<CMat> es_;
};

inline CVec evolve_exact(const CMat& G, const CVec& psi0, double T) { return ExactPropagator(G).evolve(psi0, T); }

/// Time-dependent generator: exponential midpoint rule with step dt.
template <class GenFn>
CVec evolve_exact(GenFn&& G, const CVec& psi0, double t0, double T, double dt) {
  const long steps = std::max(1L, std::lround(std::abs(T - t0) / dt));
  const double h = (T - t0) / steps;
  CVec psi = psi0;
  for (long n = 0; n < steps; ++n) psi = ExactPropagator(G(t0 + (n + 0.5) * h)).evolve(psi, h);
  return psi;
}

struct ConjugationVerdict {
  double defect = 0.0;
  double leakage = 0.0;
};

/// || U^* A(f,g) U - A(Theta(f,g)) || on the probe block: columns in sectors <= probe,
/// rows in sectors <= probe + 1. Theta(f,g) = (U f + conj(V) g, V f + conj(U) g).
inline ConjugationVerdict verify_bogoliubov_conjugation(const FockBasis& basis, const Ccr& ccr, const CMat& Ut,
                                                        const CMat& U, const CMat& V, const CVec& f, const CVec& g,
                                                        int probe = 2, double leak_tol = 1e-8) {
  if (probe + 1 >= basis.n_max() - 1) throw ConfigError("probe sectors must lie below the leakage monitor");
  ConjugationVerdict v;
  std::vector<Index> cols, rows;
  for (Index i = 0; i < basis.dim(); ++i) {
    if (basis.sector(i) <= probe) cols.push_back(i);
    if (basis.sector(i) <= probe + 1) rows.push_back(i);
  }
  for (Index c : cols) v.leakage = std::max(v.leakage, basis.leakage(Ut.col(c)));
  CMat lhs = Ut.adjoint() * field_A(ccr, f, g) * Ut;
  CMat rhs = field_A(ccr, U * f + V.conjugate() * g, V * f + U.conjugate() * g);
  CMat diff(rows.size(), cols.size());
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < cols.size(); ++c) diff(r, c) = lhs(rows[r], cols[c]) - rhs(rows[r], cols[c]);
  v.defect = op_norm_matrix(diff);
  if (v.leakage > leak_tol) throw InconclusiveError("cutoff leakage above threshold; raise n_max");
  return v;
}

struct CharacteristicValue {
  cd value;
  double leakage = 0.0;
};

/// <psi, exp(i s phi_a(h)) psi> by exact exponentiation on the truncated space.
inline CharacteristicValue characteristic_function_exact(const FockBasis& basis, const Ccr& ccr, const CVec& psi,
                                                         const CVec& h, double s, double leak_tol = 1e-6) {
  CMat phi = field_phi(ccr, h);
  ExactPropagator P(-s * phi);  // exp(-i (-s phi) 1) = exp(i s phi)
  CVec out = P.evolve(psi, 1.0);
  CharacteristicValue r{psi.dot(out), std::max(basis.leakage(out), basis.leakage(psi))};
  if (r.leakage > leak_tol) throw InconclusiveError("cutoff leakage above threshold; raise n_max");
  return r;
}

}  // namespace bosefluct
