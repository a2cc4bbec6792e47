#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include "errors.hpp"

namespace bosefluct {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using Index = Eigen::Index;
using Vec3 = std::array<double, 3>;

inline constexpr double kPi = std::numbers::pi;

/// Periodic lattice of m^dim points on the torus [0, L)^dim.
struct Lattice {
  int dim = 1;
  int m = 2;
  double L = 1.0;

  Lattice() = default;
  Lattice(int d, int m_axis, double box) : dim(d), m(m_axis), L(box) {
    if (dim < 1 || dim > 3) throw PreconditionError("lattice dimension must be 1, 2 or 3");
    if (m < 2 || m % 2 != 0) throw PreconditionError("points per axis must be even and >= 2");
    if (!(L > 0.0)) throw PreconditionError("box length must be positive");
  }

  Index size() const {
    Index n = 1;
    for (int a = 0; a < dim; ++a) n *= m;
    return n;
  }
  double h() const { return L / m; }
  double dv() const { return std::pow(h(), dim); }

  /// Signed Fourier / displacement index in [-m/2, m/2 - 1].
  int signed_index(int j) const {
    int r = ((j % m) + m) % m;
    return r >= m / 2 ? r - m : r;
  }
  double wavenumber(int j) const { return 2.0 * kPi * signed_index(j) / L; }

  std::array<int, 3> unflatten(Index flat) const {
    std::array<int, 3> a{0, 0, 0};
    for (int ax = dim - 1; ax >= 0; --ax) {
      a[ax] = static_cast<int>(flat % m);
      flat /= m;
    }
    return a;
  }
  Index flatten(const std::array<int, 3>& a) const {
    Index f = 0;
    for (int ax = 0; ax < dim; ++ax) f = f * m + (((a[ax] % m) + m) % m);
    return f;
  }

  Vec3 position(Index flat) const {
    auto a = unflatten(flat);
    Vec3 x{0, 0, 0};
    for (int ax = 0; ax < dim; ++ax) x[ax] = a[ax] * h();
    return x;
  }
  Vec3 wavevector(Index flat) const {
    auto a = unflatten(flat);
    Vec3 k{0, 0, 0};
    for (int ax = 0; ax < dim; ++ax) k[ax] = wavenumber(a[ax]);
    return k;
  }

  /// Minimum-image displacement y - x.
  Vec3 displacement(Index x, Index y) const {
    auto a = unflatten(x), b = unflatten(y);
    Vec3 d{0, 0, 0};
    for (int ax = 0; ax < dim; ++ax) d[ax] = signed_index(b[ax] - a[ax]) * h();
    return d;
  }
  double distance(Index x, Index y) const {
    auto d = displacement(x, y);
    return std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  }

  /// Lattice with twice the points per axis; holds the midpoints (x+y)/2.
  Lattice half_lattice() const { return Lattice(dim, 2 * m, L); }

  /// Index on half_lattice() of the minimum-image midpoint of x and y.
  Index midpoint(Index x, Index y) const {
    auto a = unflatten(x), b = unflatten(y);
    std::array<int, 3> c{0, 0, 0};
    for (int ax = 0; ax < dim; ++ax) c[ax] = 2 * a[ax] + signed_index(b[ax] - a[ax]);
    return half_lattice().flatten(c);
  }

  bool operator==(const Lattice& o) const { return dim == o.dim && m == o.m && L == o.L; }
  bool operator!=(const Lattice& o) const { return !(*this == o); }
};

struct GridFunction {
  Lattice lat;
  CVec v;

  GridFunction() = default;
  explicit GridFunction(const Lattice& l) : lat(l), v(CVec::Zero(l.size())) {}
  GridFunction(const Lattice& l, CVec values) : lat(l), v(std::move(values)) {
    if (v.size() != lat.size()) throw StructuralError("grid function size does not match lattice");
  }

  template <class F>
  static GridFunction sample(const Lattice& l, F&& f) {
    GridFunction g(l);
    for (Index i = 0; i < l.size(); ++i) g.v[i] = f(l.position(i));
    return g;
  }

  double norm() const { return std::sqrt(lat.dv()) * v.norm(); }
  double sup_norm() const { return v.cwiseAbs().maxCoeff(); }
  GridFunction conjugate() const { return {lat, v.conjugate()}; }
  GridFunction normalized() const {
    double n = norm();
    if (!(n > 0.0)) throw PreconditionError("cannot normalize the zero function");
    return {lat, v / n};
  }
};

inline void require_same(const Lattice& a, const Lattice& b) {
  if (a != b) throw StructuralError("lattice mismatch");
}

/// <f, g> = dV sum conj(f) g, linear in the second slot.
inline cd inner(const GridFunction& f, const GridFunction& g) {
  require_same(f.lat, g.lat);
  return f.lat.dv() * f.v.dot(g.v);
}

inline GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  require_same(a.lat, b.lat);
  return {a.lat, a.v + b.v};
}
inline GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  require_same(a.lat, b.lat);
  return {a.lat, a.v - b.v};
}
inline GridFunction operator*(cd s, const GridFunction& a) { return {a.lat, s * a.v}; }

// ---------------------------------------------------------------------------
// Fourier transforms

enum class Direction { forward, inverse };

namespace detail {

/// Unitary separable DFT of a flattened m^dim array, in place.
inline void fft_inplace(const Lattice& lat, CVec& data, Direction dir) {
  static thread_local Eigen::FFT<double> fft;
  const int m = lat.m;
  const double scale = dir == Direction::forward ? 1.0 / std::sqrt(double(m)) : std::sqrt(double(m));
  std::vector<cd> in(m), out(m);
  Index stride = 1;
  for (int ax = lat.dim - 1; ax >= 0; --ax) {
    const Index block = stride * m;
    for (Index base = 0; base < data.size(); base += block) {
      for (Index off = 0; off < stride; ++off) {
        for (int j = 0; j < m; ++j) in[j] = data[base + off + j * stride];
        if (dir == Direction::forward)
          fft.fwd(out, in);
        else
          fft.inv(out, in);
        for (int j = 0; j < m; ++j) data[base + off + j * stride] = out[j] * scale;
      }
    }
    stride = block;
  }
}

}  // namespace detail

inline GridFunction fourier_transform(const GridFunction& f, Direction dir) {
  GridFunction g = f;
  detail::fft_inplace(f.lat, g.v, dir);
  return g;
}

/// Applies the Fourier multiplier mult(k) to f.
template <class Mult>
GridFunction apply_multiplier(const GridFunction& f, Mult&& mult) {
  GridFunction g = fourier_transform(f, Direction::forward);
  for (Index i = 0; i < g.v.size(); ++i) g.v[i] *= mult(f.lat.wavevector(i));
  detail::fft_inplace(f.lat, g.v, Direction::inverse);
  return g;
}

inline double ksq(const Vec3& k) { return k[0] * k[0] + k[1] * k[1] + k[2] * k[2]; }

inline GridFunction laplacian(const GridFunction& f) {
  return apply_multiplier(f, [](const Vec3& k) { return cd(-ksq(k)); });
}

/// Spectral partial derivative along `axis`; the Nyquist mode is dropped.
inline GridFunction gradient(const GridFunction& f, int axis) {
  const double nyq = kPi * f.lat.m / f.lat.L;
  return apply_multiplier(f, [axis, nyq](const Vec3& k) {
    return std::abs(std::abs(k[axis]) - nyq) < 1e-9 * nyq ? cd(0.0) : cd(0.0, k[axis]);
  });
}

/// Dense matrix of a Fourier multiplier acting on sample vectors.
template <class Mult>
CMat spectral_matrix(const Lattice& lat, Mult&& mult) {
  const Index n = lat.size();
  CMat S(n, n);
  GridFunction e(lat);
  for (Index j = 0; j < n; ++j) {
    e.v.setZero();
    e.v[j] = 1.0;
    S.col(j) = apply_multiplier(e, mult).v;
  }
  return S;
}

/// Matrix of the spectral Laplacian (real symmetric, negative semidefinite).
inline RMat laplacian_matrix(const Lattice& lat) {
  CMat S = spectral_matrix(lat, [](const Vec3& k) { return cd(-ksq(k)); });
  RMat R = S.real();
  return 0.5 * (R + R.transpose());
}

/// Matrix of the spectral derivative along `axis` (real antisymmetric).
inline RMat derivative_matrix(const Lattice& lat, int axis) {
  const double nyq = kPi * lat.m / lat.L;
  CMat S = spectral_matrix(lat, [axis, nyq](const Vec3& k) {
    return std::abs(std::abs(k[axis]) - nyq) < 1e-9 * nyq ? cd(0.0) : cd(0.0, k[axis]);
  });
  RMat R = S.real();
  return 0.5 * (R - R.transpose());
}

/// Trigonometric interpolant of mult(k) * f-hat sampled on the half lattice.
template <class Mult>
GridFunction refine_to_half_lattice(const GridFunction& f, Mult&& mult) {
  const Lattice& lat = f.lat;
  const Lattice fine = lat.half_lattice();
  GridFunction c = fourier_transform(f, Direction::forward);
  GridFunction g(fine);
  const double gain = std::pow(2.0, 0.5 * lat.dim);
  for (Index i = 0; i < c.v.size(); ++i) {
    auto a = lat.unflatten(i);
    // Split Nyquist coefficients evenly between +m/2 and -m/2 on the fine grid.
    int nyq = 0;
    std::array<int, 3> n{0, 0, 0};
    for (int ax = 0; ax < lat.dim; ++ax) {
      n[ax] = lat.signed_index(a[ax]);
      if (n[ax] == -lat.m / 2) ++nyq;
    }
    const int copies = 1 << nyq;
    for (int mask = 0; mask < copies; ++mask) {
      std::array<int, 3> nf = n;
      int bit = 0;
      for (int ax = 0; ax < lat.dim; ++ax) {
        if (n[ax] == -lat.m / 2) {
          if (mask & (1 << bit)) nf[ax] = lat.m / 2;
          ++bit;
        }
      }
      Vec3 k{0, 0, 0};
      for (int ax = 0; ax < lat.dim; ++ax) k[ax] = 2.0 * kPi * nf[ax] / lat.L;
      g.v[fine.flatten(nf)] += c.v[i] * gain / double(copies) * cd(mult(k));
    }
  }
  detail::fft_inplace(fine, g.v, Direction::inverse);
  return g;
}

inline GridFunction refine_to_half_lattice(const GridFunction& f) {
  return refine_to_half_lattice(f, [](const Vec3&) { return cd(1.0); });
}

// ---------------------------------------------------------------------------
// Kernels

/// Two-point kernel K(x;y); acts as (Kf)(x) = dV sum_y K(x;y) f(y).
struct Kernel {
  Lattice lat;
  CMat k;

  Kernel() = default;
  explicit Kernel(const Lattice& l) : lat(l), k(CMat::Zero(l.size(), l.size())) {}
  Kernel(const Lattice& l, CMat values) : lat(l), k(std::move(values)) {
    if (k.rows() != lat.size() || k.cols() != lat.size())
      throw StructuralError("kernel shape does not match lattice");
  }

  /// Matrix of the operator in the orthonormal lattice basis (dV * K).
  CMat op() const { return lat.dv() * k; }
  static Kernel from_op(const Lattice& l, const CMat& op) { return {l, op / l.dv()}; }
};

inline Kernel identity_kernel(const Lattice& lat) {
  return {lat, CMat::Identity(lat.size(), lat.size()) / lat.dv()};
}

inline GridFunction kernel_apply(const Kernel& K, const GridFunction& f) {
  require_same(K.lat, f.lat);
  return {f.lat, K.lat.dv() * (K.k * f.v)};
}

inline Kernel kernel_compose(const Kernel& A, const Kernel& B) {
  require_same(A.lat, B.lat);
  return {A.lat, A.lat.dv() * (A.k * B.k)};
}

inline Kernel kernel_adjoint(const Kernel& K) { return {K.lat, K.k.adjoint()}; }
inline Kernel kernel_transpose(const Kernel& K) { return {K.lat, K.k.transpose()}; }
inline Kernel kernel_conjugate(const Kernel& K) { return {K.lat, K.k.conjugate()}; }

inline Kernel operator+(const Kernel& a, const Kernel& b) {
  require_same(a.lat, b.lat);
  return {a.lat, a.k + b.k};
}
inline Kernel operator-(const Kernel& a, const Kernel& b) {
  require_same(a.lat, b.lat);
  return {a.lat, a.k - b.k};
}

/// ||K||_2 = sqrt(dV^2 sum |K|^2).
inline double hs_norm(const Kernel& K) { return K.lat.dv() * K.k.norm(); }

inline double op_norm_matrix(const CMat& A) {
  if (A.size() == 0) return 0.0;
  Eigen::BDCSVD<CMat> svd(A);
  return svd.singularValues()(0);
}

inline double op_norm(const Kernel& K) { return op_norm_matrix(K.op()); }

}  // namespace bosefluct
