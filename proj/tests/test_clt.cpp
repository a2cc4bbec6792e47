#include <gtest/gtest.h>

#include <random>

#include "bosefluct/clt.hpp"
#include "bosefluct/fock.hpp"

using namespace bosefluct;

namespace {

const double kB0 = smooth_bump(1.0, 1.0, 0.5, 1.0).b0;

CVec random_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CVec v(n);
  for (Index i = 0; i < n; ++i) v[i] = cd(nd(rng), nd(rng));
  return v;
}

TestFunction gaussian_test(double v) {
  return {[v](double s) { return cd(std::exp(-0.5 * v * s * s)); },
          [v](double x) { return cd(std::exp(-0.5 * x * x / v) / std::sqrt(2 * kPi * v)); }};
}

struct Instance {
  Lattice lat{1, 32, 2 * kPi};
  GridFunction phi = gaussian_initial_state(lat, 0.5, 1);
  EtaBuilder builder{lat, limiting_profile(lat.L / 4, kB0)};
  KernelFamily family = make_family(builder, phi, kB0, 0.0);
};

}  // namespace

TEST(Fluctuation, InitialTimeEqualsInitialVarianceVector) {
  Instance s;
  auto O = position_window(s.lat, Vec3{2.5, 0, 0}, 0.7, 0.2);
  auto pair = BogoliubovPair::identity(s.lat.size());
  auto nu = fluctuation_vector(O, s.family, pair);
  auto sig = initial_variance_vector(O, s.family);
  EXPECT_LT((nu - sig).norm(), 1e-10);
  EXPECT_GT(nu.norm(), 1e-3);
}

TEST(Fluctuation, ProjectorOntoCondensateGivesZero) {
  Instance s;
  Kernel P(s.lat, s.phi.v * s.phi.v.adjoint());
  auto nu = fluctuation_vector(make_observable("proj", P), s.family, BogoliubovPair::identity(s.lat.size()));
  EXPECT_LT(nu.norm(), 1e-12);
}

TEST(Fluctuation, FreeFlowPreservesNorm) {
  Lattice lat(1, 32, 2 * kPi);
  auto phi = gaussian_initial_state(lat, 0.5, 1);
  EtaBuilder b(lat, limiting_profile(lat.L / 4, 0.0));
  auto tr = evolve_nls(phi, 0.0, 0.2, 1e-2);
  QuadraticGenerator zero{0.0, CMat::Zero(32, 32), CMat::Zero(32, 32)};
  auto O = momentum_window(lat, 3.0, 0.5);
  for (size_t n : {size_t(0), size_t(10), size_t(20)}) {
    auto f = make_family(b, tr.at_step(n), 0.0, tr.times[n]);
    auto p = propagate([&](double) { return zero; }, 32, 0.0, tr.times[n], 1e-2, KineticFlow::lattice(lat)).pair;
    auto nu = fluctuation_vector(O, f, p);
    EXPECT_NEAR(nu.norm(), projected_action(O, f).norm(), 1e-12);
  }
  auto f = make_family(b, tr.at_step(5), 0.0, tr.times[5]);
  EXPECT_THROW(fluctuation_vector(O, f, BogoliubovPair::identity(32)), StructuralError);
}

TEST(Observables, BoundedAndShaped) {
  Lattice lat(1, 64, 2 * kPi);
  auto x = position_window(lat, Vec3{kPi, 0, 0}, 1.0, 0.1);
  auto k = momentum_window(lat, 4.0, 0.3);
  EXPECT_LE(x.op_norm, 1.0 + 1e-12);
  EXPECT_LE(k.op_norm, 1.0 + 1e-12);
  EXPECT_NEAR(x.O.op()(32, 32).real(), 1.0, 1e-6);
  EXPECT_NEAR(x.O.op()(0, 0).real(), 0.0, 1e-6);
  EXPECT_LT((k.O.k - k.O.k.adjoint()).norm(), 1e-12);
}

TEST(Covariance, SmallCases) {
  Lattice lat(1, 8, 1.0);
  std::mt19937_64 rng(31);
  GridFunction a(lat, random_vector(8, rng));
  auto r1 = covariance_matrix({a});
  EXPECT_NEAR(r1.det.real(), a.norm() * a.norm(), 1e-12);
  EXPECT_TRUE(r1.invertible);
  EXPECT_NEAR(r1.variance(), a.norm() * a.norm(), 1e-12);

  auto r2 = covariance_matrix({a, a});
  EXPECT_FALSE(r2.invertible);
  EXPECT_NEAR(std::abs(r2.det), 0.0, 1e-12);

  GridFunction e0(lat), e1(lat);
  e0.v[0] = 2.0;
  e1.v[3] = cd(0, 1.5);
  auto r3 = covariance_matrix({e0, e1});
  EXPECT_NEAR(std::abs(r3.sigma(0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(r3.sigma(0, 0).real(), e0.norm() * e0.norm(), 1e-14);
  EXPECT_NEAR(r3.sigma(1, 1).real(), e1.norm() * e1.norm(), 1e-14);
  EXPECT_TRUE(r3.hermitian);
}

TEST(Covariance, OrderingConventionAndBounds) {
  Lattice lat(1, 8, 1.0);
  std::mt19937_64 rng(32);
  std::vector<GridFunction> nu;
  for (int i = 0; i < 3; ++i) nu.emplace_back(lat, random_vector(8, rng));
  auto r = covariance_matrix(nu);
  // Both triangles carry the product with the lower index first: a symmetric matrix.
  EXPECT_LT((r.sigma - r.sigma.transpose()).norm(), 1e-14);
  EXPECT_EQ(r.sigma(0, 2), inner(nu[0], nu[2]));
  EXPECT_FALSE(r.hermitian);
  EXPECT_TRUE(r.real_part_positive);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_LE(std::abs(r.sigma(i, j)), nu[i].norm() * nu[j].norm() * (1 + 1e-12));
  // Real-valued vectors give a hermitian (real symmetric) matrix.
  for (auto& v : nu) v.v = v.v.real().cast<cd>();
  EXPECT_TRUE(covariance_matrix(nu).hermitian);
  // Permuting the observables permutes the real part.
  auto rr = covariance_matrix(nu);
  auto rp = covariance_matrix({nu[2], nu[0], nu[1]});
  const int perm[3] = {2, 0, 1};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(rp.sigma(i, j).real(), rr.sigma(perm[i], perm[j]).real(), 1e-14);
}

TEST(GaussianProbability, StandardValues) {
  EXPECT_NEAR(gaussian_probability(1.0, -1.96, 1.96), 0.9500042097035593, 1e-13);
  EXPECT_NEAR(gaussian_probability(3.0, -1e6, 1e6), 1.0, 1e-12);
  EXPECT_NEAR(gaussian_probability(4.0, 0.0, 1e6), 0.5, 1e-14);
  EXPECT_NEAR(gaussian_probability(1.0, 8.0, 9.0) / 6.21983198586583043e-16, 1.0, 1e-12);
  EXPECT_EQ(gaussian_probability(0.0, -1.0, 1.0), 1.0);
  EXPECT_EQ(gaussian_probability(0.0, 0.5, 1.0), 0.0);
  EXPECT_THROW(gaussian_probability(-1.0, 0.0, 1.0), PreconditionError);
  EXPECT_THROW(gaussian_probability(1.0, 1.0, 1.0), PreconditionError);
}

TEST(Characteristic, BasicProperties) {
  std::mt19937_64 rng(33);
  Lattice lat(1, 8, 1.0);
  std::vector<GridFunction> nu;
  for (int i = 0; i < 3; ++i) nu.emplace_back(lat, random_vector(8, rng));
  auto r = covariance_matrix(nu);
  EXPECT_EQ(characteristic_function(r.sigma, RVec::Zero(3)), cd(1.0));
  std::uniform_real_distribution<double> u(-2, 2);
  for (int rep = 0; rep < 20; ++rep) {
    RVec s(3);
    s << u(rng), u(rng), u(rng);
    cd v = characteristic_function(r.sigma, s);
    EXPECT_LE(std::abs(v), 1.0 + 1e-15);
    // |value| depends only on || sum s_j nu_j ||.
    CVec sum = s[0] * nu[0].v + s[1] * nu[1].v + s[2] * nu[2].v;
    EXPECT_NEAR(std::abs(v), std::exp(-0.5 * lat.dv() * sum.squaredNorm()), 1e-13);
  }
  EXPECT_THROW(characteristic_function(r.sigma, RVec::Zero(2)), StructuralError);
}

TEST(Characteristic, OrderedWeylProductMatchesFockOracle) {
  // <Omega, e^{i s1 phi(nu1)} e^{i s2 phi(nu2)} Omega> = exp(-1/2 s^T Sigma s).
  FockBasis b(2, 30);
  auto ccr = build_ccr(b);
  std::mt19937_64 rng(34);
  Lattice lat(1, 2, 2.0);
  CVec n1 = 0.3 * random_vector(2, rng), n2 = 0.3 * random_vector(2, rng);
  // Mode vectors are sqrt(dV) times the function values.
  GridFunction f1(lat, n1 / std::sqrt(lat.dv())), f2(lat, n2 / std::sqrt(lat.dv()));
  auto r = covariance_matrix({f1, f2});
  CVec vac = CVec::Zero(b.dim());
  vac[b.vacuum()] = 1.0;
  for (auto [s1, s2] : {std::pair{1.0, 0.7}, {-1.3, 0.4}, {2.0, -1.5}}) {
    CVec st = ExactPropagator(-s2 * field_phi(ccr, n2)).evolve(vac, 1.0);
    st = ExactPropagator(-s1 * field_phi(ccr, n1)).evolve(st, 1.0);
    cd oracle = vac.dot(st);
    RVec s(2);
    s << s1, s2;
    EXPECT_LT(std::abs(oracle - characteristic_function(r.sigma, s)), 1e-8);
  }
}

TEST(Expectation, GaussianTestFunction) {
  const double var = 0.8, v = 0.3;
  CMat S = CMat::Constant(1, 1, var);
  cd e = multivariate_expectation(S, {gaussian_test(v)});
  EXPECT_NEAR(e.real(), 1.0 / std::sqrt(2 * kPi * (var + v)), 1e-10);
  EXPECT_NEAR(e.imag(), 0.0, 1e-14);
  cd d = multivariate_expectation_density(S, {gaussian_test(v)});
  EXPECT_NEAR(std::abs(d - e), 0.0, 1e-10);
}

TEST(Expectation, ConstantTestFunctionGivesOne) {
  // ghat = 2 pi times a narrow normal density approximates the transform of g = 1.
  const double eps = 1e-2;
  TestFunction one{[eps](double s) { return cd(std::sqrt(2 * kPi) / eps * std::exp(-0.5 * s * s / (eps * eps))); },
                   [eps](double x) { return cd(std::exp(-0.5 * eps * eps * x * x)); }};
  cd e = multivariate_expectation(CMat::Constant(1, 1, 1.7), {one});
  EXPECT_NEAR(e.real(), 1.0 / std::sqrt(1.0 + eps * eps * 1.7), 1e-10);
  EXPECT_NEAR(e.real(), 1.0, 1e-3);
}

TEST(Expectation, IndependentComponentsFactorise) {
  CMat S = CMat::Zero(2, 2);
  S(0, 0) = 0.6;
  S(1, 1) = 1.4;
  auto g1 = gaussian_test(0.2), g2 = gaussian_test(0.5);
  cd e = multivariate_expectation(S, {g1, g2});
  cd a = multivariate_expectation(CMat::Constant(1, 1, 0.6), {g1});
  cd c = multivariate_expectation(CMat::Constant(1, 1, 1.4), {g2});
  EXPECT_NEAR(std::abs(e - a * c), 0.0, 1e-10);
}

TEST(Expectation, DensityFormAgreesForCorrelatedComplexCovariance) {
  CMat S(2, 2);
  S << 1.0, cd(0.3, 0.2), cd(0.3, 0.2), 0.8;
  TestFunction g1{[](double s) { return cd(std::exp(-0.5 * 0.4 * s * s)) * std::exp(cd(0, -0.3 * s)); },
                  [](double x) { return cd(std::exp(-0.5 * (x - 0.3) * (x - 0.3) / 0.4) / std::sqrt(2 * kPi * 0.4)); }};
  auto g2 = gaussian_test(0.25);
  cd e = multivariate_expectation(S, {g1, g2});
  cd d = multivariate_expectation_density(S, {g1, g2});
  EXPECT_LT(std::abs(e - d), 1e-8);
  EXPECT_THROW(multivariate_expectation(CMat::Zero(1, 1), {g2}), PreconditionError);
  TestFunction bad{[](double) { return cd(std::numeric_limits<double>::infinity()); }, nullptr};
  EXPECT_THROW(multivariate_expectation(CMat::Constant(1, 1, 1.0), {bad}), PreconditionError);
}
