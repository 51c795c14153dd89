#include "gkd/deflation.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace gkd {

namespace {

constexpr double kSingularTol = 1e-14;

}  // namespace

void EllipticTriplets::check_shapes(Index m, Index n) const {
  require_dim(U.rows(), m, "triplets U rows");
  require_dim(V.rows(), n, "triplets V rows");
  require_dim(U.cols(), k(), "triplets U cols");
  require_dim(V.cols(), k(), "triplets V cols");
  if (residuals.size() != 0) require_dim(residuals.size(), k(), "triplet residuals");
}

EllipticTriplets EllipticTriplets::slice(Index first, Index count) const {
  if (first < 0 || count < 0 || first + count > k()) fail(ErrorCode::InvalidSpec, "triplet slice out of range");
  EllipticTriplets out;
  out.U = U.middleCols(first, count);
  out.V = V.middleCols(first, count);
  out.sigma = sigma.segment(first, count);
  out.exact = exact;
  if (residuals.size() == k()) out.residuals = residuals.segment(first, count);
  return out;
}

EllipticTriplets EllipticTriplets::smallest(Index count) const { return slice(k() - count, count); }

EllipticTriplets EllipticTriplets::largest(Index count) const { return slice(0, count); }

DeflationOperators::DeflationOperators(const SaddlePointSystem& sys, const EllipticTriplets& t, DeflationMode mode)
    : A_(sys.A), W_(sys.W), U_(t.U), V_(t.V), mode_(mode) {
  sys.check_shapes();
  t.check_shapes(sys.m(), sys.n());
  const Index k = t.k();
  S_inv_ = Matrix::Zero(k, k);
  const double smax = k > 0 ? t.sigma.cwiseAbs().maxCoeff() : 0.0;
  for (Index i = 0; i < k; ++i) {
    if (!(std::abs(t.sigma(i)) > kSingularTol * smax)) {
      singular_ = true;
      continue;
    }
    S_inv_(i, i) = 1.0 / t.sigma(i);
  }
  if (singular_ && mode_ == DeflationMode::General) {
    fail(ErrorCode::SingularTriplet, "elliptic singular value below 1e-14 relative in general deflation mode");
  }
}

DeflationOperators::DeflationOperators(const SaddlePointSystem& sys, Matrix U, Matrix S, Matrix V,
                                       DeflationMode mode)
    : A_(sys.A), W_(sys.W), U_(std::move(U)), V_(std::move(V)), mode_(mode) {
  sys.check_shapes();
  const Index k = S.rows();
  require_dim(S.cols(), k, "coupling matrix");
  require_dim(U_.rows(), sys.m(), "basis U rows");
  require_dim(V_.rows(), sys.n(), "basis V rows");
  require_dim(U_.cols(), k, "basis U cols");
  require_dim(V_.cols(), k, "basis V cols");
  if (k == 0) {
    S_inv_ = Matrix(0, 0);
    return;
  }
  Eigen::JacobiSVD<Matrix> svd(S, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  if (!(s(k - 1) > kSingularTol * s(0))) {
    singular_ = true;
    if (mode_ == DeflationMode::General) fail(ErrorCode::SingularTriplet, "coupling matrix is singular");
    S_inv_ = Matrix::Zero(k, k);
    return;
  }
  S_inv_ = svd.solve(Matrix::Identity(k, k));
}

void DeflationOperators::require_invertible() const {
  if (singular_) fail(ErrorCode::SingularTriplet, "M needs every deflated value to be nonzero");
}

Vector DeflationOperators::apply_M(const Vector& x) const {
  require_dim(x.size(), m(), "apply_M");
  if (k() == 0) return Vector::Zero(n());
  require_invertible();
  return V_ * (S_inv_ * (U_.transpose() * x));
}

Vector DeflationOperators::apply_Mt(const Vector& y) const {
  require_dim(y.size(), n(), "apply_Mt");
  if (k() == 0) return Vector::Zero(m());
  require_invertible();
  return U_ * (S_inv_.transpose() * (V_.transpose() * y));
}

Vector DeflationOperators::apply_P(const Vector& x) const {
  require_dim(x.size(), m(), "apply_P");
  if (k() == 0) return x;
  return x - A_ * apply_M(x);
}

Vector DeflationOperators::apply_Pt(const Vector& x) const {
  require_dim(x.size(), m(), "apply_Pt");
  if (k() == 0) return x;
  return x - apply_Mt(Vector(A_.transpose() * x));
}

Vector DeflationOperators::apply_Q(const Vector& y) const {
  require_dim(y.size(), n(), "apply_Q");
  if (k() == 0) return y;
  if (mode_ == DeflationMode::Simplified) return y - V_ * (V_.transpose() * y);
  return y - apply_M(Vector(A_ * y));
}

Vector DeflationOperators::apply_Qt(const Vector& y) const {
  require_dim(y.size(), n(), "apply_Qt");
  if (k() == 0) return y;
  if (mode_ == DeflationMode::Simplified) return y - V_ * (V_.transpose() * y);
  return y - A_.transpose() * apply_Mt(y);
}

Vector DeflationOperators::deflated_matvec(const Vector& x) const {
  require_dim(x.size(), n(), "deflated_matvec");
  if (k() == 0) return A_ * x;
  return A_ * apply_Q(x);
}

DeflationOperators make_deflation(const SaddlePointSystem& sys, const EllipticTriplets& t, DeflationMode mode) {
  return DeflationOperators(sys, t, mode);
}

std::pair<Vector, Vector> correct_solution(const DeflationOperators& defl, const SaddlePointSystem& sys,
                                           const Vector& u_hat, const Vector& p_hat) {
  require_dim(u_hat.size(), sys.m(), "u_hat");
  require_dim(p_hat.size(), sys.n(), "p_hat");
  require_dim(defl.m(), sys.m(), "deflation rows");
  require_dim(defl.n(), sys.n(), "deflation cols");
  if (defl.k() == 0) return {u_hat, p_hat};
  const Vector Mtr = defl.apply_Mt(sys.r);
  Vector p = defl.apply_Q(p_hat) + defl.apply_M(sys.g) - defl.apply_M(Vector(sys.W * Mtr));
  Vector u = defl.apply_Pt(u_hat) + Mtr;
  return {std::move(u), std::move(p)};
}

SolveReport deflated_solve(const SaddlePointSystem& sys, const SpdFactor& F, const DeflationOperators& defl,
                           const CraigOptions& opts, Augmentation aug) {
  sys.check_shapes();
  require_dim(F.dim(), sys.m(), "deflated_solve factor");
  require_dim(defl.m(), sys.m(), "deflation rows");
  require_dim(defl.n(), sys.n(), "deflation cols");
  detail::CraigProblem pb{sys.A, sys.W, F, [&defl](const Vector& x) { return defl.deflated_matvec(x); }, {}, {}, {}, {}, {}};
  if (aug == Augmentation::TwoSided)
    pb.backward = [&defl, &sys](const Vector& u) { return defl.apply_Qt(Vector(sys.A.transpose() * u)); };
  pb.u0 = F.apply_inverse(sys.g);
  const Vector Atu0 = sys.A.transpose() * pb.u0;
  pb.b = defl.apply_Qt(Vector(sys.r - Atu0));
  pb.rhs_scale = sys.r.norm() + Atu0.norm();
  // Q = 0 when every direction is deflated; the correction alone solves the system.
  if (defl.k() >= sys.n()) pb.b.setZero();
  if (defl.k() > 0) {
    pb.map_iterate = [&defl, &sys](const Vector& u, const Vector& p) { return correct_solution(defl, sys, u, p); };
  }
  return detail::craig_iterate(pb, opts);
}

}  // namespace gkd
