#include "gkd/analysis.hpp"
#include "gkd/solver.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <Eigen/SVD>

#include <cmath>
#include <numeric>

using namespace gkd;

namespace {

SaddlePointSystem channel(Index n) {
  ChannelSpec s;
  s.length_n = n;
  return build_1d_channel(s);
}

// W = I2, A = e1, g = (1, 1), r = 0.
SaddlePointSystem tiny() {
  SaddlePointSystem sys;
  sys.W = oracle::sparse(Matrix::Identity(2, 2));
  sys.A = oracle::sparse(Matrix(Eigen::Vector2d(1, 0)));
  sys.g = Eigen::Vector2d(1, 1);
  sys.r = Vector::Zero(1);
  return sys;
}

CraigOptions tight() {
  CraigOptions o;
  o.tol = 1e-13;
  o.max_iter = 500;
  return o;
}

}  // namespace

TEST(Craig, TwoByTwoExample) {
  const auto sys = tiny();
  const auto F = SpdFactor::factorize(sys.W);
  const auto rep = craig_solve(sys, F, tight());
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.iterations, 1);
  EXPECT_NEAR(rep.u(0), 0.0, 1e-15);
  EXPECT_NEAR(rep.u(1), 1.0, 1e-15);
  EXPECT_NEAR(rep.p(0), 1.0, 1e-15);
}

TEST(Craig, MatchesDenseSolveOnRandomSystems) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto sys = oracle::random_system(12 + Index(seed), 5 + Index(seed % 4), seed);
    const auto F = SpdFactor::factorize(sys.W);
    CraigOptions o = tight();
    o.reorth = Reorthogonalization::Full;
    const auto rep = craig_solve(sys, F, o);
    const auto ref = oracle::kkt_solve(sys);
    EXPECT_LE(oracle::rel_diff(rep.u, ref.u), 1e-9) << seed;
    EXPECT_LE(oracle::rel_diff(rep.p, ref.p), 1e-9) << seed;
  }
}

TEST(Craig, PressureIteratesFollowSchurCg) {
  const auto sys = channel(8);
  const auto F = SpdFactor::factorize(sys.W);
  CraigOptions o = tight();
  o.stop_rule = StopRule::Reference;
  const auto ref = oracle::kkt_solve(sys);
  o.reference = ReferenceSolution{ref.u, ref.p};
  o.tol = 1e-300;
  o.max_iter = sys.n();

  // CG on S p = A^T W^{-1} g - r from p = 0.
  const Matrix S = oracle::schur(sys);
  const Matrix Wd = oracle::dense(sys.W);
  const Vector rhs = oracle::dense(sys.A).transpose() * Wd.ldlt().solve(sys.g) - sys.r;
  std::vector<Vector> cg;
  Vector p = Vector::Zero(sys.n()), res = rhs, d = res;
  for (Index k = 0; k < sys.n(); ++k) {
    const Vector Sd = S * d;
    const double a = res.squaredNorm() / d.dot(Sd);
    p += a * d;
    const Vector res2 = res - a * Sd;
    d = res2 + (res2.squaredNorm() / res.squaredNorm()) * d;
    res = res2;
    cg.push_back(p);
  }

  // Each CRAIG iterate is recovered by capping max_iter.
  for (Index k = 1; k <= sys.n(); ++k) {
    CraigOptions ok = o;
    ok.max_iter = k;
    const auto rep = craig_solve(sys, F, ok);
    if (rep.iterations < k) break;
    EXPECT_LE((rep.p - cg[static_cast<std::size_t>(k - 1)]).norm(), 1e-8 * (1 + ref.p.norm())) << k;
  }
}

TEST(Craig, ZeroRightHandSide) {
  auto sys = channel(6);
  sys.g.setZero();
  sys.r.setZero();
  const auto F = SpdFactor::factorize(sys.W);
  const auto rep = craig_solve(sys, F, tight());
  EXPECT_EQ(rep.status, SolveStatus::ZeroRhs);
  EXPECT_EQ(rep.u.norm(), 0.0);
  EXPECT_EQ(rep.p.norm(), 0.0);
}

TEST(Craig, MaxIterationsReturnsPartialReport) {
  const auto sys = channel(64);
  const auto F = SpdFactor::factorize(sys.W);
  CraigOptions o;
  o.max_iter = 7;
  const auto rep = craig_solve(sys, F, o);
  EXPECT_EQ(rep.status, SolveStatus::MaxIterations);
  EXPECT_FALSE(rep.converged);
  EXPECT_EQ(rep.iterations, 7);
  EXPECT_EQ(rep.history.size(), 7u);
  EXPECT_EQ(rep.u.size(), sys.m());
}

TEST(Craig, InvalidOptions) {
  CraigOptions o;
  o.tol = -1;
  EXPECT_THROW(o.validate(), Error);
  CraigOptions r;
  r.stop_rule = StopRule::Reference;
  EXPECT_THROW(r.validate(), Error);
}

TEST(Craig, Deterministic) {
  const auto sys = channel(40);
  const auto F = SpdFactor::factorize(sys.W);
  const auto a = craig_solve(sys, F, CraigOptions{});
  const auto b = craig_solve(sys, F, CraigOptions{});
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.p, b.p);
}

TEST(Craig, TraceSatisfiesBidiagonalRelation) {
  const auto sys = channel(30);
  const auto F = SpdFactor::factorize(sys.W);
  CraigOptions o = tight();
  o.keep_trace = true;
  o.reorth = Reorthogonalization::Full;
  o.max_iter = 12;
  const auto rep = craig_solve(sys, F, o);
  ASSERT_TRUE(rep.trace.has_value());
  const auto& t = *rep.trace;
  const Matrix lhs = sys.A * t.V;
  const Matrix rhs = sys.W * (t.U * t.bidiagonal());
  EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(w_orthonormality_defect(sys.W, t.U), 1e-12);
  EXPECT_LE(orthonormality_defect(t.V), 1e-12);
}

TEST(Craig, EstimateIsALowerBound) {
  const auto sys = channel(64);
  const auto F = SpdFactor::factorize(sys.W);
  CraigOptions o;
  const auto ref = direct_solve(sys);
  o.reference = ref;
  const auto rep = craig_solve(sys, F, o);
  int below = 0, total = 0;
  for (const auto& h : rep.history) {
    if (std::isnan(h.err_estimate)) continue;
    ++total;
    if (h.err_estimate <= h.err_true * (1 + 1e-10)) ++below;
  }
  ASSERT_GT(total, 10);
  EXPECT_GE(double(below) / total, 0.95);
}

TEST(ErrorEstimate, WindowSums) {
  const std::vector<double> zero(8, 0.0);
  for (double e : craig_error_estimate(zero, 3)) EXPECT_EQ(e, 0.0);

  const std::vector<double> z{3, 4, 12};
  const auto full = craig_error_estimate(z, 3);
  ASSERT_EQ(full.size(), 1u);
  EXPECT_DOUBLE_EQ(full[0], 13.0);

  const auto win = craig_error_estimate(z, 2);
  ASSERT_EQ(win.size(), 2u);
  EXPECT_DOUBLE_EQ(win[0], 5.0);
  EXPECT_DOUBLE_EQ(win[1], std::sqrt(160.0));
  EXPECT_TRUE(craig_error_estimate(z, 4).empty());
}

TEST(Gkb, IdentityOperatorsOneStep) {
  SaddlePointSystem sys;
  sys.W = oracle::sparse(Matrix::Identity(3, 3));
  sys.A = oracle::sparse(Matrix::Identity(3, 2));
  sys.g = Vector::Zero(3);
  sys.r = Vector::Zero(2);
  const auto F = SpdFactor::factorize(sys.W);
  const Vector start = Eigen::Vector2d(3, 4);
  const auto f = gkb_run(sys, F, start, 1, Reorthogonalization::Full);
  ASSERT_EQ(f.steps(), 1);
  EXPECT_NEAR(f.alpha(0), 1.0, 1e-15);
  EXPECT_NEAR(f.beta(0), 5.0, 1e-15);
  EXPECT_TRUE(f.V.col(0).isApprox(start / 5.0));
  EXPECT_TRUE(f.U.col(0).head(2).isApprox(start / 5.0));
}

TEST(Gkb, RitzValuesBoundedByLargestAndExactAtFullLength) {
  const auto small = channel(3);
  const auto Fs = SpdFactor::factorize(small.W);
  const auto es = oracle::dense_esvd(small);
  const auto f2 = gkb_run(small, Fs, Vector::Ones(small.n()), 2, Reorthogonalization::Full);
  Eigen::JacobiSVD<Matrix> s2(f2.bidiagonal());
  for (Index i = 0; i < s2.singularValues().size(); ++i) EXPECT_LE(s2.singularValues()(i), es.s(i) + 1e-12);

  const auto sys = channel(8);
  const auto F = SpdFactor::factorize(sys.W);
  const auto e = oracle::dense_esvd(sys);
  const auto f = gkb_run(sys, F, Vector::LinSpaced(sys.n(), 1, 2), sys.n(), Reorthogonalization::Full);
  ASSERT_EQ(f.steps(), sys.n());
  Eigen::JacobiSVD<Matrix> sv(f.bidiagonal());
  EXPECT_LE((sv.singularValues() - e.s).cwiseAbs().maxCoeff(), 1e-10);
}
