#include "gkd/analysis.hpp"
#include "gkd/deflation.hpp"
#include "gkd/esvd.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <numeric>

using namespace gkd;

namespace {

SaddlePointSystem channel(Index n) {
  ChannelSpec s;
  s.length_n = n;
  return build_1d_channel(s);
}

std::vector<Index> last(Index n, Index k) {
  std::vector<Index> idx;
  for (Index i = n - k; i < n; ++i) idx.push_back(i);
  return idx;
}

double max_abs(const Matrix& M) { return M.cwiseAbs().maxCoeff(); }

struct Dense {
  Matrix M, P, Q;
};

Dense assemble(const SaddlePointSystem& sys, const DeflationOperators& d) {
  return {oracle::assemble(sys.m(), [&](const Vector& x) { return d.apply_M(x); }),
          oracle::assemble(sys.m(), [&](const Vector& x) { return d.apply_P(x); }),
          oracle::assemble(sys.n(), [&](const Vector& x) { return d.apply_Q(x); })};
}

CraigOptions tight() {
  CraigOptions o;
  o.tol = 1e-13;
  o.max_iter = 2000;
  o.reorth = Reorthogonalization::Full;
  return o;
}

}  // namespace

TEST(Deflation, EmptyBasisIsIdentity) {
  const auto sys = channel(6);
  const auto e = oracle::dense_esvd(sys);
  const auto d = make_deflation(sys, oracle::triplets_from(e, {}));
  EXPECT_EQ(d.k(), 0);
  const Vector x = Vector::Random(sys.m()), y = Vector::Random(sys.n());
  EXPECT_EQ(d.apply_M(x).norm(), 0.0);
  EXPECT_EQ(d.apply_P(x), x);
  EXPECT_EQ(d.apply_Q(y), y);
  EXPECT_EQ(d.apply_Qt(y), y);
  EXPECT_TRUE(d.deflated_matvec(y).isApprox(sys.A * y));
  const auto [u, p] = correct_solution(d, sys, x, y);
  EXPECT_EQ(u, x);
  EXPECT_EQ(p, y);
}

TEST(Deflation, ProjectorIdentities) {
  const auto sys = channel(8);
  const auto e = oracle::dense_esvd(sys);
  const auto d = make_deflation(sys, oracle::triplets_from(e, last(sys.n(), 2)));
  const auto D = assemble(sys, d);
  const Matrix W = oracle::dense(sys.W), A = oracle::dense(sys.A);
  EXPECT_LE(max_abs(D.Q * D.Q - D.Q), 1e-12);
  EXPECT_LE(max_abs(D.P * D.P - D.P), 1e-12);
  EXPECT_LE(max_abs(D.P * W - W * D.P.transpose()), 1e-12);
  EXPECT_LE(max_abs(D.P * A - A * D.Q), 1e-12);
  const Matrix Pt = oracle::assemble(sys.m(), [&](const Vector& x) { return d.apply_Pt(x); });
  const Matrix Qt = oracle::assemble(sys.n(), [&](const Vector& x) { return d.apply_Qt(x); });
  EXPECT_LE(max_abs(Pt - D.P.transpose()), 1e-13);
  EXPECT_LE(max_abs(Qt - D.Q.transpose()), 1e-13);
}

TEST(Deflation, ProjectorIdentitiesOnRandomSystems) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto sys = oracle::random_system(20, 9, seed);
    const auto e = oracle::dense_esvd(sys);
    const auto d = make_deflation(sys, oracle::triplets_from(e, {0, 3, 8}));
    const auto D = assemble(sys, d);
    const Matrix W = oracle::dense(sys.W), A = oracle::dense(sys.A);
    EXPECT_LE(max_abs(D.P * W - W * D.P.transpose()), 1e-11) << seed;
    EXPECT_LE(max_abs(D.P * A - A * D.Q), 1e-11) << seed;
    EXPECT_LE(max_abs(D.Q * D.Q - D.Q), 1e-11) << seed;
  }
}

TEST(Deflation, ExactTripletsGiveOrthogonalQ) {
  const auto sys = channel(10);
  const auto e = oracle::dense_esvd(sys);
  const auto t = oracle::triplets_from(e, last(sys.n(), 3));
  const auto d = make_deflation(sys, t);
  const Vector y = Vector::Random(sys.n());
  EXPECT_LE((d.apply_Q(y) - (y - t.V * (t.V.transpose() * y))).norm(), 1e-12);
}

TEST(Deflation, SpanOfVIsAnnihilated) {
  const auto sys = channel(8);
  const auto e = oracle::dense_esvd(sys);
  const auto t = oracle::triplets_from(e, last(sys.n(), 2));
  for (auto mode : {DeflationMode::General, DeflationMode::Simplified}) {
    const auto d = make_deflation(sys, t, mode);
    EXPECT_LE(d.deflated_matvec(Vector(t.V * Eigen::Vector2d(0.3, -2))).norm(), 1e-12);
  }
}

TEST(Deflation, MatvecMatchesDenseProjection) {
  const auto sys = channel(8);
  const auto e = oracle::dense_esvd(sys);
  const auto d = make_deflation(sys, oracle::triplets_from(e, last(sys.n(), 2)));
  const auto D = assemble(sys, d);
  const Vector x = Vector::Random(sys.n());
  EXPECT_LE((d.deflated_matvec(x) - D.P * oracle::dense(sys.A) * x).norm(), 1e-12);
}

TEST(Deflation, DeflatedSchurSpectrum) {
  const auto sys = channel(8);
  const auto e = oracle::dense_esvd(sys);
  const Index k = 2;
  const auto d = make_deflation(sys, oracle::triplets_from(e, last(sys.n(), k)));
  const Matrix AQ = oracle::assemble(sys.n(), [&](const Vector& x) { return d.deflated_matvec(x); });
  const Matrix S = AQ.transpose() * oracle::dense(sys.W).ldlt().solve(AQ);
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  const Vector ev = es.eigenvalues();  // ascending
  for (Index i = 0; i < k; ++i) EXPECT_LE(std::abs(ev(i)), 1e-10);
  for (Index i = k; i < sys.n(); ++i) {
    const double s = e.s(sys.n() - 1 - i);
    EXPECT_NEAR(ev(i), s * s, 1e-10);
  }
}

TEST(Deflation, FullDeflationIsTheDirectSolution) {
  const auto sys = channel(8);
  const auto e = oracle::dense_esvd(sys);
  std::vector<Index> all(static_cast<std::size_t>(sys.n()));
  std::iota(all.begin(), all.end(), 0);
  const auto d = make_deflation(sys, oracle::triplets_from(e, all));
  const auto F = SpdFactor::factorize(sys.W);
  const auto rep = deflated_solve(sys, F, d, tight());
  const auto ref = oracle::kkt_solve(sys);
  EXPECT_LE(oracle::rel_diff(rep.u, ref.u), 1e-10);
  EXPECT_LE(oracle::rel_diff(rep.p, ref.p), 1e-10);
}

TEST(Deflation, DeflateAndCorrectMatchesDirectSolve) {
  const auto sys = channel(16);
  const auto F = SpdFactor::factorize(sys.W);
  const auto e = oracle::dense_esvd(sys);
  const auto ref = oracle::kkt_solve(sys);
  for (auto aug : {Augmentation::OneSided, Augmentation::TwoSided}) {
    const auto rep = deflated_solve(sys, F, make_deflation(sys, oracle::triplets_from(e, {2, 7, 14})), tight(), aug);
    EXPECT_LE(oracle::rel_diff(rep.u, ref.u), 1e-8);
    EXPECT_LE(oracle::rel_diff(rep.p, ref.p), 1e-8);
  }
}

TEST(Deflation, GeneralBasisConstructor) {
  const auto sys = oracle::random_system(14, 6, 5);
  const auto e = oracle::dense_esvd(sys);
  const auto t = oracle::triplets_from(e, {1, 4});
  // Rotate the basis: A (V R) = W (U R) (R^T S R).
  Eigen::Matrix2d R;
  R << std::cos(0.4), -std::sin(0.4), std::sin(0.4), std::cos(0.4);
  const Matrix S = R.transpose() * t.sigma.asDiagonal() * R;
  const DeflationOperators a(sys, t, DeflationMode::General);
  const DeflationOperators b(sys, t.U * R, S, t.V * R, DeflationMode::General);
  const Vector x = Vector::Random(sys.m());
  EXPECT_LE((a.apply_M(x) - b.apply_M(x)).norm(), 1e-12);
  const Vector y = Vector::Random(sys.n());
  EXPECT_LE((a.apply_Q(y) - b.apply_Q(y)).norm(), 1e-12);
}

TEST(Deflation, ZeroSigmaIsRejectedInGeneralMode) {
  const auto sys = channel(6);
  auto t = oracle::triplets_from(oracle::dense_esvd(sys), {0, 1});
  t.sigma(1) = 0.0;
  try {
    make_deflation(sys, t);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::SingularTriplet);
  }
}

TEST(Deflation, ShapeMismatchIsRejected) {
  const auto sys = channel(6);
  auto t = oracle::triplets_from(oracle::dense_esvd(sys), {0});
  t.V.conservativeResize(sys.n() - 1, Eigen::NoChange);
  EXPECT_THROW(make_deflation(sys, t), Error);
}

TEST(Deflation, NoTripletsReproducesPlainCraig) {
  const auto sys = channel(40);
  const auto F = SpdFactor::factorize(sys.W);
  const auto d = make_deflation(sys, oracle::triplets_from(oracle::dense_esvd(sys), {}));
  const auto a = craig_solve(sys, F, CraigOptions{});
  const auto b = deflated_solve(sys, F, d, CraigOptions{});
  ASSERT_EQ(a.iterations, b.iterations);
  for (std::size_t i = 0; i < a.history.size(); ++i) EXPECT_NEAR(a.history[i].zeta, b.history[i].zeta, 1e-12);
  EXPECT_LE((a.u - b.u).norm(), 1e-12);
}

TEST(Deflation, ExactDeflationShortensThePlateau) {
  const auto sys = channel(128);
  const auto F = SpdFactor::factorize(sys.W);
  const auto ref = direct_solve(sys);
  CraigOptions o;
  o.reference = ref;
  o.max_iter = 2000;
  const auto base = craig_solve(sys, F, o);
  const auto t = esvd_direct(sys, F, 10, Target::Smallest);
  const auto defl = deflated_solve(sys, F, make_deflation(sys, t), o);
  EXPECT_LT(defl.iterations, base.iterations);
  EXPECT_LT(plateau_length(defl.true_errors()), plateau_length(base.true_errors()));
}
