#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "bogoliubov.hpp"
#include "kernels.hpp"

namespace bosefluct {

/// Bounded one-particle operator.
struct Observable {
  std::string name;
  Kernel O;
  double op_norm = 0.0;
};

inline Observable make_observable(std::string name, Kernel O) {
  double n = op_norm(O);
  if (!std::isfinite(n)) throw PreconditionError("observable must be bounded");
  return {std::move(name), std::move(O), n};
}

inline double smooth_step(double s, double softness) { return 0.5 * (1.0 + std::tanh(s / softness)); }

/// Multiplication by a smoothed box of half width `half_width` around `center` (per axis).
inline Observable position_window(const Lattice& lat, const Vec3& center, double half_width, double softness) {
  RVec w(lat.size());
  for (Index i = 0; i < lat.size(); ++i) {
    Vec3 x = lat.position(i);
    double v = 1.0;
    for (int ax = 0; ax < lat.dim; ++ax) {
      double d = std::remainder(x[ax] - center[ax], lat.L);
      v *= smooth_step(half_width - std::abs(d), softness);
    }
    w[i] = v;
  }
  return make_observable("position_window", Kernel::from_op(lat, w.cast<cd>().asDiagonal().toDenseMatrix()));
}

/// Fourier multiplier by a smoothed ball |k| <= k_max.
inline Observable momentum_window(const Lattice& lat, double k_max, double softness) {
  CMat S = spectral_matrix(lat, [&](const Vec3& k) { return cd(smooth_step(k_max - std::sqrt(ksq(k)), softness)); });
  return make_observable("momentum_window", Kernel::from_op(lat, S));
}

/// nu = (U ch + conj(V) sh) w + (U sh + conj(V) ch) conj(w), all as mode matrices.
inline CVec fluctuation_from_pair(const CMat& U, const CMat& V, const CMat& ch, const CMat& sh, const CVec& w) {
  const CMat Vb = V.conjugate();
  return (U * ch + Vb * sh) * w + (U * sh + Vb * ch) * w.conjugate();
}

/// w = q O phi.
inline GridFunction projected_action(const Observable& O, const KernelFamily& f) {
  return kernel_apply(f.q, kernel_apply(O.O, f.phi));
}

inline GridFunction fluctuation_vector(const Observable& O, const KernelFamily& f, const BogoliubovPair& pair) {
  if (std::abs(f.t - pair.t) > 1e-9 * std::max(1.0, std::abs(f.t)))
    throw StructuralError("kernel family and Bogoliubov pair belong to different times");
  require_normalized(f.phi);
  CVec w = projected_action(O, f).v;
  return {f.lat(), fluctuation_from_pair(pair.U, pair.V, f.ch.op(), f.sh.op(), w)};
}

/// sigma_0 = sh conj(q O phi) + ch q O phi.
inline GridFunction initial_variance_vector(const Observable& O, const KernelFamily& f) {
  CVec w = projected_action(O, f).v;
  return {f.lat(), f.sh.op() * w.conjugate() + f.ch.op() * w};
}

struct CovarianceReport {
  double t = 0.0;
  std::vector<GridFunction> nu;
  CMat sigma;  // <nu_i, nu_j> for i < j, <nu_j, nu_i> otherwise
  cd det = 0.0;
  CMat inverse;
  double condition = std::numeric_limits<double>::infinity();
  bool invertible = false;
  bool hermitian = false;            // imaginary parts of the off-diagonal Gram entries vanish
  bool real_part_positive = false;   // Re sigma positive semidefinite
  double variance() const { return sigma(0, 0).real(); }
};

inline CovarianceReport covariance_matrix(const std::vector<GridFunction>& nu, double t = 0.0, double tol = 1e-12) {
  if (nu.empty()) throw PreconditionError("covariance of an empty list");
  const Index k = Index(nu.size());
  for (const auto& v : nu) require_same(nu[0].lat, v.lat);
  CovarianceReport r;
  r.t = t;
  r.nu = nu;
  r.sigma.resize(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) r.sigma(i, j) = i < j ? inner(nu[i], nu[j]) : inner(nu[j], nu[i]);
  for (Index i = 0; i < k; ++i) r.sigma(i, i) = r.sigma(i, i).real();
  const double scale = std::max(1e-300, r.sigma.cwiseAbs().maxCoeff());
  r.hermitian = (r.sigma - r.sigma.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
  Eigen::SelfAdjointEigenSolver<RMat> es(r.sigma.real());
  r.real_part_positive = es.eigenvalues().minCoeff() >= -tol * scale;
  Eigen::JacobiSVD<CMat> svd(r.sigma);
  const auto& sv = svd.singularValues();
  r.condition = sv(k - 1) > 0 ? sv(0) / sv(k - 1) : std::numeric_limits<double>::infinity();
  r.det = r.sigma.determinant();
  r.invertible = sv(k - 1) > 1e-12 * sv(0) && sv(0) > 0;
  if (r.invertible) r.inverse = r.sigma.inverse();
  return r;
}

/// P(G in [a, b]) for centred G with variance var.
inline double gaussian_probability(double var, double a, double b) {
  if (var < 0.0 || !std::isfinite(var)) throw PreconditionError("variance must be finite and non-negative");
  if (!(a < b)) throw PreconditionError("interval must satisfy a < b");
  if (var == 0.0) return (a <= 0.0 && 0.0 <= b) ? 1.0 : 0.0;
  const double s = std::sqrt(2.0 * var);
  // Tail-aware differences of the complementary error function.
  if (a >= 0.0) return 0.5 * (std::erfc(a / s) - std::erfc(b / s));
  if (b <= 0.0) return 0.5 * (std::erfc(-b / s) - std::erfc(-a / s));
  return 1.0 - 0.5 * (std::erfc(-a / s) + std::erfc(b / s));
}

/// exp(-1/2 s^T sigma s).
inline cd characteristic_function(const CMat& sigma, const RVec& s) {
  if (s.size() != sigma.rows()) throw StructuralError("argument length differs from covariance size");
  cd q = (s.cast<cd>().transpose() * sigma * s.cast<cd>())(0, 0);
  return std::exp(-0.5 * q);
}

/// Test function given by g and its transform ghat(s) = int g(x) e^{-isx} dx.
struct TestFunction {
  std::function<cd(double)> ghat;
  std::function<cd(double)> g;
};

struct ExpectationOptions {
  double tol = 1e-11;
  int max_depth = 18;
};

namespace detail {

template <class F>
cd integrate(F&& f, double a, double b, const ExpectationOptions& opt) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, opt.max_depth, opt.tol);
}

/// Nested adaptive quadrature over [-R, R]^k.
template <class F>
cd nested(int k, double R, std::vector<double>& pt, int level, F&& f, const ExpectationOptions& opt) {
  if (level == k) return f(pt);
  return integrate(
      [&](double x) {
        pt[level] = x;
        return nested(k, R, pt, level + 1, f, opt);
      },
      -R, R, opt);
}

/// Radius with (1 + R)^4 exp(-lambda R^2 / 2) below 1e-17.
inline double truncation_radius(double lambda) {
  double R = 1.0;
  while (std::pow(1.0 + R, 4) * std::exp(-0.5 * lambda * R * R) > 1e-17) R *= 1.1;
  return R;
}

inline double min_real_eigenvalue(const CMat& A) {
  Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (A.real() + A.real().transpose()));
  return es.eigenvalues().minCoeff();
}

}  // namespace detail

/// (2 pi)^{-k} int prod ghat_j(s_j) exp(-1/2 s^T sigma s) ds.
inline cd multivariate_expectation(const CMat& sigma, const std::vector<TestFunction>& g,
                                   const ExpectationOptions& opt = {}) {
  const int k = int(g.size());
  if (k == 0 || sigma.rows() != k || sigma.cols() != k) throw StructuralError("one test function per observable");
  const double lam = detail::min_real_eigenvalue(sigma);
  if (!(lam > 1e-12 * std::max(1.0, sigma.cwiseAbs().maxCoeff())))
    throw PreconditionError("covariance is singular; the Gaussian expectation is undefined");
  const double R = detail::truncation_radius(lam);
  std::vector<double> pt(k);
  cd val = detail::nested(k, R, pt, 0, [&](const std::vector<double>& s) {
    cd prod = 1.0;
    RVec sv(k);
    for (int j = 0; j < k; ++j) {
      cd gh = g[j].ghat(s[j]);
      if (!std::isfinite(gh.real()) || !std::isfinite(gh.imag()))
        throw PreconditionError("test function transform is not integrable");
      prod *= gh;
      sv[j] = s[j];
    }
    return prod * characteristic_function(sigma, sv);
  }, opt);
  return val / std::pow(2.0 * kPi, k);
}

/// Density form (det(2 pi sigma))^{-1/2} int prod g_j(x_j) exp(-1/2 x^T sigma^{-1} x) dx, for k <= 2.
inline cd multivariate_expectation_density(const CMat& sigma, const std::vector<TestFunction>& g,
                                           const ExpectationOptions& opt = {}) {
  const int k = int(g.size());
  if (k == 0 || k > 2 || sigma.rows() != k) throw StructuralError("density form is provided for k <= 2");
  const double lam = detail::min_real_eigenvalue(sigma);
  if (!(lam > 0.0)) throw PreconditionError("covariance is singular; the Gaussian expectation is undefined");
  CMat inv = sigma.inverse();
  const double R = detail::truncation_radius(detail::min_real_eigenvalue(inv));
  std::vector<double> pt(k);
  cd val = detail::nested(k, R, pt, 0, [&](const std::vector<double>& x) {
    cd prod = 1.0;
    CVec xv(k);
    for (int j = 0; j < k; ++j) {
      prod *= g[j].g(x[j]);
      xv[j] = x[j];
    }
    return prod * std::exp(-0.5 * (xv.transpose() * inv * xv)(0, 0));
  }, opt);
  return val / std::sqrt(std::pow(2.0 * kPi, k) * sigma.determinant());
}

}  // namespace bosefluct
