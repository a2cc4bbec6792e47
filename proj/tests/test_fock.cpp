#include <gtest/gtest.h>

#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "bosefluct/fock.hpp"

using namespace bosefluct;

namespace {

CMat random_hermitian(int M, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CMat A(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) A(i, j) = cd(nd(rng), nd(rng));
  CMat H = 0.5 * (A + A.adjoint());
  return scale * H / H.norm();
}

CMat random_symmetric(int M, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CMat A(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) A(i, j) = cd(nd(rng), nd(rng));
  CMat S = 0.5 * (A + A.transpose());
  return scale * S / S.norm();
}

}  // namespace

TEST(FockBasis, SingleModeMatrices) {
  FockBasis b(1, 2);
  ASSERT_EQ(b.dim(), 3);
  auto ccr = build_ccr(b);
  CMat a = CMat(ccr.a[0]);
  CMat expect = CMat::Zero(3, 3);
  expect(0, 1) = 1.0;
  expect(1, 2) = std::sqrt(2.0);
  EXPECT_LT((a - expect).norm(), 1e-15);
  EXPECT_LT((CMat(ccr.adag[0]) - expect.adjoint()).norm(), 1e-15);
}

TEST(FockBasis, OrderingAndDimension) {
  FockBasis b(3, 4);
  EXPECT_EQ(b.dim(), 35);  // C(3 + 4, 4)
  EXPECT_EQ(b.sector(b.vacuum()), 0);
  for (Index i = 1; i < b.dim(); ++i) EXPECT_LE(b.sector(i - 1), b.sector(i));
  EXPECT_EQ(b.find({1, 0, 0}), 1);
  EXPECT_EQ(b.find({0, 0, 1}), 3);
  EXPECT_EQ(b.find({5, 0, 0}), -1);
  EXPECT_THROW(FockBasis(10, 10, 1000), ConfigError);
}

TEST(FockBasis, CommutationBelowCutoff) {
  FockBasis b(2, 4);
  auto ccr = build_ccr(b);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      CMat comm = CMat(ccr.a[i] * ccr.adag[j]) - CMat(ccr.adag[j] * ccr.a[i]);
      CMat aa = CMat(ccr.a[i] * ccr.a[j]) - CMat(ccr.a[j] * ccr.a[i]);
      EXPECT_LT(aa.norm(), 1e-14);
      for (Index c = 0; c < b.dim(); ++c) {
        if (b.sector(c) >= b.n_max()) continue;
        CVec col = comm.col(c);
        CVec e = CVec::Zero(b.dim());
        if (i == j) e[c] = 1.0;
        EXPECT_LT((col - e).norm(), 1e-14);
      }
    }
}

TEST(FockBasis, NumberOperatorAndQuadraticForms) {
  FockBasis b(3, 4);
  auto ccr = build_ccr(b);
  CMat N = number_operator(b);
  EXPECT_LT((N - CMat(N.diagonal().asDiagonal())).norm(), 1e-15);
  CMat G = second_quantize(b, ccr, CMat::Identity(3, 3), CMat::Zero(3, 3));
  EXPECT_LT((G - N).norm(), 1e-14);

  std::mt19937_64 rng(3);
  CMat H1 = random_hermitian(3, 1.0, rng), H2 = random_symmetric(3, 1.0, rng);
  CMat G2 = second_quantize(b, ccr, CMat::Zero(3, 3), H2);
  for (Index r = 0; r < b.dim(); ++r)
    for (Index c = 0; c < b.dim(); ++c)
      if (std::abs(G2(r, c)) > 1e-14) EXPECT_EQ(std::abs(b.sector(r) - b.sector(c)), 2);
  CMat G3 = second_quantize(b, ccr, H1, H2, 0.5);
  EXPECT_LT((G3 - G3.adjoint()).norm(), 1e-13);
  EXPECT_THROW(second_quantize(b, ccr, CMat::Zero(2, 2), H2), StructuralError);
}

TEST(FockPropagation, NormPreservedAndMatchesDiagonalFlow) {
  FockBasis b(2, 5);
  auto ccr = build_ccr(b);
  std::mt19937_64 rng(4);
  CMat G = second_quantize(b, ccr, random_hermitian(2, 1.0, rng), random_symmetric(2, 0.3, rng));
  CVec psi = CVec::Zero(b.dim());
  psi[b.vacuum()] = 1.0;
  CVec out = evolve_exact(G, psi, 0.7);
  EXPECT_NEAR(out.norm(), 1.0, 1e-13);
  // Number-conserving diagonal generator: pure phase on each basis state.
  CMat D = second_quantize(b, ccr, CMat(RVec::Constant(2, 1.5).cast<cd>().asDiagonal()), CMat::Zero(2, 2));
  CVec st = CVec::Zero(b.dim());
  st[b.find({1, 2})] = 1.0;
  CVec o = evolve_exact(D, st, 0.4);
  EXPECT_LT(std::abs(o[b.find({1, 2})] - std::exp(cd(0, -1.5 * 3 * 0.4))), 1e-13);
  CMat bad = G;
  bad(0, 1) += 1.0;
  EXPECT_THROW(ExactPropagator{bad}, PreconditionError);
}

TEST(FockPropagation, TimeDependentMatchesConstantCase) {
  FockBasis b(2, 4);
  auto ccr = build_ccr(b);
  std::mt19937_64 rng(5);
  CMat G = second_quantize(b, ccr, random_hermitian(2, 1.0, rng), random_symmetric(2, 0.2, rng));
  CVec psi = CVec::Zero(b.dim());
  psi[1] = 1.0;
  CVec a = evolve_exact(G, psi, 0.5);
  CVec c = evolve_exact([&](double) { return G; }, psi, 0.0, 0.5, 0.05);
  EXPECT_LT((a - c).norm(), 1e-12);
}

TEST(FockCharacteristic, VacuumIsGaussian) {
  FockBasis b(2, 24);
  auto ccr = build_ccr(b);
  CVec psi = CVec::Zero(b.dim());
  psi[b.vacuum()] = 1.0;
  CVec h(2);
  h << cd(0.3, 0.1), cd(-0.2, 0.15);
  for (double s : {0.5, 1.0, 2.0}) {
    auto v = characteristic_function_exact(b, ccr, psi, h, s);
    EXPECT_LT(std::abs(v.value - std::exp(-0.5 * s * s * h.squaredNorm())), 1e-10);
  }
}

TEST(FockCharacteristic, LeakageIsReported) {
  FockBasis b(1, 4);
  auto ccr = build_ccr(b);
  CVec psi = CVec::Zero(b.dim());
  psi[b.vacuum()] = 1.0;
  CVec h(1);
  h << 3.0;
  EXPECT_THROW(characteristic_function_exact(b, ccr, psi, h, 1.0), InconclusiveError);
}

TEST(FockConjugation, FreeFlowIsPhaseRotation) {
  FockBasis b(2, 6);
  auto ccr = build_ccr(b);
  CMat H1 = CMat::Zero(2, 2);
  H1(0, 0) = 0.7;
  H1(1, 1) = -0.4;
  CMat G = second_quantize(b, ccr, H1, CMat::Zero(2, 2));
  const double t = 0.9;
  CMat Ut = ExactPropagator(G).unitary(t);
  // a^*(f) -> a^*(exp(i H1 t) f) under U^* . U with U = exp(-iGt).
  CMat U = (cd(0, t) * H1).exp();
  CVec f(2), g(2);
  f << cd(0.3, -0.2), cd(0.5, 0.1);
  g << cd(-0.1, 0.4), cd(0.2, 0.2);
  auto v = verify_bogoliubov_conjugation(b, ccr, Ut, U, CMat::Zero(2, 2), f, g);
  EXPECT_LT(v.defect, 1e-12);
  auto w = verify_bogoliubov_conjugation(b, ccr, Ut, U.conjugate(), CMat::Zero(2, 2), f, g);
  EXPECT_GT(w.defect, 1e-2);
  EXPECT_THROW(verify_bogoliubov_conjugation(b, ccr, Ut, U, CMat::Zero(2, 2), f, g, 4), ConfigError);
}
