#include "gkd/analysis.hpp"
#include "gkd/esvd.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <Eigen/QR>

#include <cmath>

using namespace gkd;

namespace {

SaddlePointSystem channel(Index n) {
  ChannelSpec s;
  s.length_n = n;
  return build_1d_channel(s);
}

}  // namespace

TEST(Spectrum, OrthonormalColumnsGiveUnitSchur) {
  SaddlePointSystem sys;
  Eigen::HouseholderQR<Matrix> qr(Matrix::Random(9, 4));
  sys.A = oracle::sparse(Matrix(qr.householderQ() * Matrix::Identity(9, 4)));
  sys.W = oracle::sparse(Matrix::Identity(9, 9));
  sys.g = Vector::Zero(9);
  sys.r = Vector::Zero(4);
  const auto F = SpdFactor::factorize(sys.W);
  const auto s = schur_spectrum_dense(sys, F);
  EXPECT_LE((s.values.array() - 1.0).abs().maxCoeff(), 1e-12);
  EXPECT_NEAR(s.effective_condition, 1.0, 1e-12);
}

TEST(Spectrum, SchurValuesAreSquaredEllipticValues) {
  const auto sys = channel(16);
  const auto F = SpdFactor::factorize(sys.W);
  const auto s = schur_spectrum_dense(sys, F);
  const auto e = elliptic_spectrum_dense(sys, F);
  EXPECT_LE((s.values - e.values.array().square().matrix()).cwiseAbs().maxCoeff(), 1e-10);
  const auto t = esvd_direct(sys, F, sys.n(), Target::Largest);
  EXPECT_LE((t.sigma - e.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Spectrum, SmallestValuesDetachFromTheCluster) {
  const auto sys = channel(128);
  const auto F = SpdFactor::factorize(sys.W);
  const Vector v = schur_spectrum_dense(sys, F).values;
  const Index n = v.size();
  // Relative spread of the top half is small, the bottom values stray far below.
  EXPECT_LT(v(0) / v(n / 2), 4.0);
  EXPECT_GT(v(n / 2) / v(n - 1), 100.0);
}

TEST(Spectrum, DeflationRemovesTargetedValues) {
  const auto sys = channel(24);
  const auto F = SpdFactor::factorize(sys.W);
  const Index k = 4;
  const auto t = esvd_direct(sys, F, k, Target::Smallest);
  const auto full = elliptic_spectrum_dense(sys, F);
  const auto d = deflated_spectrum_dense(sys, F, make_deflation(sys, t));
  const Index n = sys.n();
  EXPECT_LE(d.values.tail(k).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((d.values.head(n - k) - full.values.head(n - k)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(d.effective_condition, full.effective_condition);
}

TEST(EffectiveCondition, Definition) {
  const std::vector<double> flat(6, 2.5);
  EXPECT_DOUBLE_EQ(effective_condition(flat, 0), 1.0);
  const std::vector<double> v{4, 2, 1, 0.5};
  EXPECT_DOUBLE_EQ(effective_condition(v, 0), 64.0);
  EXPECT_DOUBLE_EQ(effective_condition(v, 1), 16.0);
}

TEST(EffectiveCondition, DeflationImprovesChannel) {
  const auto sys = channel(128);
  const auto F = SpdFactor::factorize(sys.W);
  const auto e = elliptic_spectrum_dense(sys, F);
  EXPECT_LT(effective_condition(e.values, 10), effective_condition(e.values, 0));
}

TEST(ErrorCoefficients, ZeroForExactStart) {
  const auto sys = channel(12);
  const auto F = SpdFactor::factorize(sys.W);
  const auto t = esvd_direct(sys, F, sys.n(), Target::Largest);
  const Vector u = Vector::Random(sys.m());
  const auto c = error_coefficients(sys, t, u, u);
  EXPECT_EQ(c.z.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(c.above.empty());
}

TEST(ErrorCoefficients, OddEvenPatternAndSmallestDominate) {
  const auto sys = channel(64);
  const auto F = SpdFactor::factorize(sys.W);
  const auto t = esvd_direct(sys, F, sys.n(), Target::Largest);
  const auto ref = direct_solve(sys);
  const auto c = error_coefficients(sys, t, ref.u, craig_first_iterate(sys, F));
  // 1-based even positions carry nothing.
  for (Index i = 1; i < c.z.size(); i += 2) EXPECT_LT(std::abs(c.z(i)), 1e-7) << i;
  Index arg = 0;
  c.z.cwiseAbs().maxCoeff(&arg);
  EXPECT_GE(arg, c.z.size() / 2);
  for (Index i : c.above) EXPECT_GT(std::abs(c.z(i)), c.threshold);
}

TEST(IterationMetrics, PlateauLength) {
  const std::vector<double> fast{1, 0.01, 1e-4};
  EXPECT_LE(plateau_length(fast), 1);
  const std::vector<double> slow{1, 0.9, 0.8, 0.7, 0.05};
  EXPECT_EQ(plateau_length(slow), 4);
  const std::vector<double> never{1, 1, 1};
  EXPECT_EQ(plateau_length(never), 3);
}

TEST(IterationMetrics, PlateauOfChannel) {
  const auto sys = channel(128);
  const auto F = SpdFactor::factorize(sys.W);
  CraigOptions o;
  o.reference = direct_solve(sys);
  const auto rep = craig_solve(sys, F, o);
  const Index len = plateau_length(rep.true_errors());
  EXPECT_GE(len, 26);
  EXPECT_LE(len, 38);
}

TEST(IterationMetrics, IterationsToAndRedundancy) {
  const std::vector<double> rel{1, 1e-3, 1e-9, 1e-12};
  EXPECT_EQ(iterations_to(rel, 1e-8), 3);
  EXPECT_EQ(iterations_to(rel, 1e-20), 0);
  const std::vector<double> res{1, 0.999, 0.5, 0.4999, 0.1};
  EXPECT_DOUBLE_EQ(redundant_fraction(res), 0.5);
}

TEST(DirectSolve, MatchesDenseOracle) {
  const auto sys = oracle::random_system(30, 12, 4);
  const auto a = direct_solve(sys);
  const auto b = oracle::kkt_solve(sys);
  EXPECT_LE(oracle::rel_diff(a.u, b.u), 1e-12);
  EXPECT_LE(oracle::rel_diff(a.p, b.p), 1e-12);
  EXPECT_EQ(assemble_kkt(sys).rows(), 42);
}
