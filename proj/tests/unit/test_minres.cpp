#include "gkd/analysis.hpp"
#include "gkd/esvd.hpp"
#include "gkd/minres.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gkd;

namespace {

SaddlePointSystem channel(Index n) {
  ChannelSpec s;
  s.length_n = n;
  return build_1d_channel(s);
}

MinresOptions matched(const ReferenceSolution& ref, double tol = 1e-8) {
  MinresOptions o;
  o.stop = MinresStop::Reference;
  o.reference = ref;
  o.tol = tol;
  return o;
}

}  // namespace

TEST(SaddleEig, ClosedForms) {
  auto [a, b] = saddle_eig_from_sigma(0.0);
  EXPECT_DOUBLE_EQ(a, 1.0);
  EXPECT_DOUBLE_EQ(b, 0.0);
  std::tie(a, b) = saddle_eig_from_sigma(std::sqrt(2.0));
  EXPECT_NEAR(a, 2.0, 1e-15);
  EXPECT_NEAR(b, -1.0, 1e-15);
}

TEST(SaddleEig, MonolithicSpectrumFromEllipticValues) {
  const auto sys = channel(8);
  const auto e = oracle::dense_esvd(sys);
  std::vector<double> want(static_cast<std::size_t>(sys.m() - sys.n()), 1.0);
  for (Index i = 0; i < e.s.size(); ++i) {
    const auto [a, b] = saddle_eig_from_sigma(e.s(i));
    want.push_back(a);
    want.push_back(b);
  }
  std::sort(want.begin(), want.end());
  const Vector got = oracle::monolithic_spectrum(sys);
  ASSERT_EQ(got.size(), Index(want.size()));
  for (Index i = 0; i < got.size(); ++i) EXPECT_NEAR(got(i), want[static_cast<std::size_t>(i)], 1e-10);
}

TEST(SaddleEig, EigenvectorsFromTriplets) {
  const auto sys = channel(8);
  const auto F = SpdFactor::factorize(sys.W);
  const auto t = esvd_direct(sys, F, 3, Target::Smallest);
  const auto basis = saddle_eigvecs_from_triplets(sys, F, t);
  ASSERT_EQ(basis.Y.cols(), 6);
  const MonolithicOperator K(sys, F);
  for (Index j = 0; j < basis.Y.cols(); ++j) {
    EXPECT_NEAR(basis.Y.col(j).norm(), 1.0, 1e-14);
    EXPECT_LE((K.apply(basis.Y.col(j)) - basis.lambda(j) * basis.Y.col(j)).norm(), 1e-10);
  }
}

TEST(Monolithic, WhiteningRoundTrip) {
  const auto sys = channel(9);
  const auto F = SpdFactor::factorize(sys.W);
  const MonolithicOperator K(sys, F);
  const Vector u = Vector::Random(sys.m()), p = Vector::Random(sys.n());
  const auto [u2, p2] = K.to_original(K.to_whitened(u, p));
  EXPECT_LE((u2 - u).norm(), 1e-12);
  EXPECT_EQ(p2, p);
  // K~ [L^T u; p] = [L^{-1}(W u + A p); A^T u].
  const Vector y = K.apply(K.to_whitened(u, p));
  EXPECT_LE((F.mul_lower(Vector(y.head(sys.m()))) - (sys.W * u + sys.A * p)).norm(), 1e-10);
  EXPECT_LE((y.tail(sys.n()) - sys.A.transpose() * u).norm(), 1e-10);
}

TEST(Minres, DiagonalToy) {
  SaddlePointSystem sys;
  sys.W = oracle::sparse(Matrix::Identity(2, 2));
  sys.A = oracle::sparse(Matrix(Eigen::Vector2d(1, 0)));
  sys.g = Eigen::Vector2d(1, 1);
  sys.r = Vector::Zero(1);
  const auto F = SpdFactor::factorize(sys.W);
  MinresOptions o;
  o.tol = 1e-14;
  const auto rep = minres_preconditioned(sys, F, o);
  EXPECT_TRUE(rep.converged);
  EXPECT_LE(rep.iterations, 3);
  EXPECT_NEAR(rep.u(0), 0.0, 1e-12);
  EXPECT_NEAR(rep.u(1), 1.0, 1e-12);
  EXPECT_NEAR(rep.p(0), 1.0, 1e-12);
}

TEST(Minres, MatchesDenseSolve) {
  const auto sys = channel(16);
  const auto F = SpdFactor::factorize(sys.W);
  MinresOptions o;
  o.tol = 1e-12;
  const auto rep = minres_preconditioned(sys, F, o);
  const auto ref = oracle::kkt_solve(sys);
  EXPECT_LE(oracle::rel_diff(rep.u, ref.u), 1e-9);
  EXPECT_LE(oracle::rel_diff(rep.p, ref.p), 1e-9);
}

TEST(Minres, TwiceTheCraigIterations) {
  const auto sys = channel(128);
  const auto F = SpdFactor::factorize(sys.W);
  const auto ref = direct_solve(sys);
  CraigOptions co;
  co.stop_rule = StopRule::Reference;
  co.reference = ref;
  const auto c = craig_solve(sys, F, co);
  const auto m = minres_preconditioned(sys, F, matched(ref));
  EXPECT_NEAR(double(m.iterations), 2.0 * double(c.iterations), 2.0);
  EXPECT_GE(redundant_fraction(m.resid_precond), 0.4);
}

TEST(Minres, EmptyDeflationBasisIsTheBaseline) {
  const auto sys = channel(32);
  const auto F = SpdFactor::factorize(sys.W);
  MinresOptions o;
  const auto a = minres_preconditioned(sys, F, o);
  const auto b = minres_deflated(sys, F, Matrix(sys.m() + sys.n(), 0), o);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.p, b.p);
}

TEST(Minres, DeflationReducesIterations) {
  const auto sys = channel(64);
  const auto F = SpdFactor::factorize(sys.W);
  const auto ref = direct_solve(sys);
  const auto t = esvd_direct(sys, F, 6, Target::Smallest);
  const auto Y = saddle_eigvecs_from_triplets(sys, F, t).Y;
  const auto base = minres_preconditioned(sys, F, matched(ref));
  const auto defl = minres_deflated(sys, F, Y, matched(ref));
  EXPECT_TRUE(defl.converged);
  EXPECT_LT(defl.iterations, base.iterations);
}

TEST(Minres, DeflatedSolutionMatchesDenseSolve) {
  const auto sys = channel(16);
  const auto F = SpdFactor::factorize(sys.W);
  const auto t = esvd_direct(sys, F, 3, Target::Smallest);
  MinresOptions o;
  o.tol = 1e-12;
  const auto rep = minres_deflated(sys, F, saddle_eigvecs_from_triplets(sys, F, t).Y, o);
  const auto ref = oracle::kkt_solve(sys);
  EXPECT_LE(oracle::rel_diff(rep.u, ref.u), 1e-7);
  EXPECT_LE(oracle::rel_diff(rep.p, ref.p), 1e-7);
}

TEST(Minres, DependentBasisIsRejected) {
  const auto sys = channel(16);
  const auto F = SpdFactor::factorize(sys.W);
  const auto t = esvd_direct(sys, F, 2, Target::Smallest);
  const Matrix Y = saddle_eigvecs_from_triplets(sys, F, t).Y;
  Matrix Yd(Y.rows(), Y.cols() + 1);
  Yd << Y, Y.col(0);
  try {
    minres_deflated(sys, F, Yd, MinresOptions{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IllConditionedCoarse);
  }
}

TEST(Minres, ZeroSigmaTripletIsRejected) {
  const auto sys = channel(8);
  const auto F = SpdFactor::factorize(sys.W);
  auto t = esvd_direct(sys, F, 1, Target::Smallest);
  t.sigma(0) = 0.0;
  EXPECT_THROW(saddle_eigvecs_from_triplets(sys, F, t), Error);
}
