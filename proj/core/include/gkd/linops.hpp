#pragma once

#include "gkd/common.hpp"

#include <Eigen/SparseCholesky>

#include <memory>

namespace gkd {

/// Sparse Cholesky factor of an SPD matrix W with a fill-reducing ordering.
///
/// Internally P W P^T = L L^T. Callers see the unpermuted factor
/// W = Lw Lw^T with Lw = P^T L through whiten()/whiten_transpose() and never
/// touch the permutation. Immutable after construction and cheap to copy;
/// copies share the numeric factor.
class SpdFactor {
public:
  using Permutation = Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int>;

  static SpdFactor factorize(const SparseMatrix& W, const Tolerances& tol = {});

  Index dim() const noexcept { return dim_; }

  /// y = W^{-1} x.
  Vector apply_inverse(const Vector& x) const;
  Matrix apply_inverse(const Matrix& x) const;

  /// Lw^{-1} x.
  Vector whiten(const Vector& x) const;
  Matrix whiten(const Matrix& x) const;
  /// Lw^{-T} y.
  Vector unwhiten(const Vector& y) const;
  Matrix unwhiten(const Matrix& y) const;
  /// Lw^T x.
  Vector mul_lower_transpose(const Vector& x) const;
  /// Lw y.
  Vector mul_lower(const Vector& y) const;

  /// Lower-triangular factor of the permuted matrix.
  SparseMatrix lower() const;
  const Permutation& permutation() const;

private:
  using Llt = Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;

  std::shared_ptr<const Llt> llt_;
  Index dim_ = 0;
};

/// max |W_ij - W_ji| <= rel_tol * max |W_ij|.
bool is_symmetric(const SparseMatrix& W, double rel_tol = 1e-12);

double w_inner(const SparseMatrix& W, const Vector& x, const Vector& y);
double w_norm(const SparseMatrix& W, const Vector& x);

/// Euclidean orthonormality defect max |V^T V - I|.
double orthonormality_defect(const Matrix& V);
/// W-orthonormality defect max |U^T W U - I|.
double w_orthonormality_defect(const SparseMatrix& W, const Matrix& U);

}  // namespace gkd
