#include "gkd/linops.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gkd {

namespace {

double max_abs(const SparseMatrix& M) {
  double out = 0.0;
  for (int k = 0; k < M.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(M, k); it; ++it) out = std::max(out, std::abs(it.value()));
  }
  return out;
}

// Infinity norm, used for the backward-error scale of the probe.
double inf_norm(const SparseMatrix& M) {
  Vector rows = Vector::Zero(M.rows());
  for (int k = 0; k < M.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(M, k); it; ++it) rows(it.row()) += std::abs(it.value());
  }
  return rows.size() == 0 ? 0.0 : rows.maxCoeff();
}

}  // namespace

bool is_symmetric(const SparseMatrix& W, double rel_tol) {
  if (W.rows() != W.cols()) return false;
  const SparseMatrix diff = SparseMatrix(W.transpose()) - W;
  return max_abs(diff) <= rel_tol * max_abs(W);
}

SpdFactor SpdFactor::factorize(const SparseMatrix& W, const Tolerances& tol) {
  tol.validate();
  if (W.rows() != W.cols()) {
    fail(ErrorCode::DimensionMismatch, "W must be square");
  }
  if (!is_symmetric(W)) {
    fail(ErrorCode::NotSymmetric, "W is not symmetric within 1e-12 relative");
  }

  auto llt = std::make_shared<Llt>();
  llt->compute(W);
  if (llt->info() != Eigen::Success) {
    fail(ErrorCode::NotPositiveDefinite, "nonpositive pivot in sparse Cholesky");
  }
  SpdFactor f;
  f.llt_ = std::move(llt);
  f.dim_ = W.rows();

  // Eigen only flags negative pivots; exact zeros and NaN slip through.
  const SparseMatrix L = f.lower();
  for (Index i = 0; i < L.rows(); ++i) {
    const double d = L.coeff(i, i);
    if (!(d > 0.0) || !std::isfinite(d)) {
      fail(ErrorCode::NotPositiveDefinite, "nonpositive pivot in sparse Cholesky");
    }
  }

  if (f.dim_ > 0) {
    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector x(f.dim_);
    for (Index i = 0; i < x.size(); ++i) x(i) = dist(rng);
    const Vector b = W * x;
    const Vector y = f.apply_inverse(b);
    const double resid = (W * y - b).norm();
    const double scale = inf_norm(W) * y.norm() + b.norm();
    if (!(resid <= tol.factor_tol * scale * std::sqrt(static_cast<double>(f.dim_)))) {
      fail(ErrorCode::NotPositiveDefinite, "factorization probe failed");
    }
  }
  return f;
}

Vector SpdFactor::apply_inverse(const Vector& x) const {
  require_dim(x.size(), dim_, "apply_inverse");
  return llt_->solve(x);
}

Matrix SpdFactor::apply_inverse(const Matrix& x) const {
  require_dim(x.rows(), dim_, "apply_inverse");
  return llt_->solve(x);
}

Vector SpdFactor::whiten(const Vector& x) const {
  require_dim(x.size(), dim_, "whiten");
  Vector y = llt_->permutationP() * x;
  llt_->matrixL().solveInPlace(y);
  return y;
}

Matrix SpdFactor::whiten(const Matrix& x) const {
  require_dim(x.rows(), dim_, "whiten");
  Matrix y = llt_->permutationP() * x;
  llt_->matrixL().solveInPlace(y);
  return y;
}

Vector SpdFactor::unwhiten(const Vector& y) const {
  require_dim(y.size(), dim_, "unwhiten");
  Vector x = y;
  llt_->matrixU().solveInPlace(x);
  return llt_->permutationPinv() * x;
}

Matrix SpdFactor::unwhiten(const Matrix& y) const {
  require_dim(y.rows(), dim_, "unwhiten");
  Matrix x = y;
  llt_->matrixU().solveInPlace(x);
  return llt_->permutationPinv() * x;
}

Vector SpdFactor::mul_lower_transpose(const Vector& x) const {
  require_dim(x.size(), dim_, "mul_lower_transpose");
  const Vector px = llt_->permutationP() * x;
  return llt_->matrixU() * px;
}

Vector SpdFactor::mul_lower(const Vector& y) const {
  require_dim(y.size(), dim_, "mul_lower");
  const Vector ly = llt_->matrixL() * y;
  return llt_->permutationPinv() * ly;
}

SparseMatrix SpdFactor::lower() const { return SparseMatrix(llt_->matrixL()); }

const SpdFactor::Permutation& SpdFactor::permutation() const { return llt_->permutationP(); }

double w_inner(const SparseMatrix& W, const Vector& x, const Vector& y) {
  require_dim(x.size(), W.rows(), "w_inner");
  require_dim(y.size(), W.rows(), "w_inner");
  return x.dot(W * y);
}

double w_norm(const SparseMatrix& W, const Vector& x) {
  return std::sqrt(std::max(0.0, w_inner(W, x, x)));
}

double orthonormality_defect(const Matrix& V) {
  if (V.cols() == 0) return 0.0;
  return (V.transpose() * V - Matrix::Identity(V.cols(), V.cols())).cwiseAbs().maxCoeff();
}

double w_orthonormality_defect(const SparseMatrix& W, const Matrix& U) {
  if (U.cols() == 0) return 0.0;
  const Matrix WU = W * U;
  return (U.transpose() * WU - Matrix::Identity(U.cols(), U.cols())).cwiseAbs().maxCoeff();
}

}  // namespace gkd
