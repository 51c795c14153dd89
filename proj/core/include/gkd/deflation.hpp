#pragma once

#include "gkd/common.hpp"
#include "gkd/linops.hpp"
#include "gkd/problems.hpp"
#include "gkd/solver.hpp"

#include <memory>
#include <utility>

namespace gkd {

/// Partial elliptic SVD A V = W U diag(sigma), U^T W U = I, V^T V = I.
struct EllipticTriplets {
  Matrix U;      ///< m x k
  Vector sigma;  ///< k values, descending
  Matrix V;      ///< n x k
  bool exact = true;
  /// Declared per-triplet residuals for approximate triplets (may be empty).
  Vector residuals;

  Index k() const noexcept { return sigma.size(); }
  /// Throws DimensionMismatch unless U is m x k and V is n x k.
  void check_shapes(Index m, Index n) const;
  /// Columns [first, first + count).
  EllipticTriplets slice(Index first, Index count) const;
  /// The `count` smallest values (last columns).
  EllipticTriplets smallest(Index count) const;
  EllipticTriplets largest(Index count) const;
};

enum class DeflationMode {
  /// M = V S^{-1} U^T, P = I - A M, Q = I - M A.
  General,
  /// Q = I - V V^T in the forward product; M is only used by the correction.
  Simplified,
};

enum class Augmentation {
  /// Only A is replaced by A Q; A^T products are left alone. Matches the
  /// two-sided variant for exact triplets but drifts along span(V) for
  /// approximate ones, which can make the iteration diverge after it converges.
  OneSided,
  /// Q^T is applied after every A^T product as well.
  TwoSided,
};

/// Implicit deflation operators. Every application is a chain of thin
/// products with U, V, S^{-1}, A and W; nothing of size m x m or n x n is
/// formed.
class DeflationOperators {
public:
  DeflationOperators(const SaddlePointSystem& sys, const EllipticTriplets& t, DeflationMode mode);
  /// General basis: A V = W U S with an invertible k x k coupling S.
  DeflationOperators(const SaddlePointSystem& sys, Matrix U, Matrix S, Matrix V, DeflationMode mode);

  Index k() const noexcept { return U_.cols(); }
  Index m() const noexcept { return A_.rows(); }
  Index n() const noexcept { return A_.cols(); }
  DeflationMode mode() const noexcept { return mode_; }

  Vector apply_M(const Vector& x) const;   ///< m -> n
  Vector apply_Mt(const Vector& y) const;  ///< n -> m
  Vector apply_P(const Vector& x) const;   ///< m -> m
  Vector apply_Pt(const Vector& x) const;  ///< m -> m
  Vector apply_Q(const Vector& y) const;   ///< n -> n
  Vector apply_Qt(const Vector& y) const;  ///< n -> n

  /// A Q x; in simplified mode A x - A V V^T x.
  Vector deflated_matvec(const Vector& x) const;

  const SparseMatrix& A() const noexcept { return A_; }
  const SparseMatrix& W() const noexcept { return W_; }

private:
  void require_invertible() const;

  SparseMatrix A_;
  SparseMatrix W_;
  Matrix U_;
  Matrix V_;
  Matrix S_inv_;
  bool singular_ = false;
  DeflationMode mode_;
};

/// Throws SingularTriplet when mode is General and some sigma_i <= 1e-14 sigma_max.
DeflationOperators make_deflation(const SaddlePointSystem& sys, const EllipticTriplets& t,
                                  DeflationMode mode = DeflationMode::General);

/// p = Q p_hat + M g - M W M^T r, u = P^T u_hat + M^T r.
std::pair<Vector, Vector> correct_solution(const DeflationOperators& defl, const SaddlePointSystem& sys,
                                           const Vector& u_hat, const Vector& p_hat);

/// CRAIG on [[W, A Q], [Q^T A^T, 0]] [u_hat; p_hat] = [g; Q^T r]. The
/// returned (u, p) and every history entry refer to the corrected solution
/// of the original system.
SolveReport deflated_solve(const SaddlePointSystem& sys, const SpdFactor& F, const DeflationOperators& defl,
                           const CraigOptions& opts, Augmentation aug = Augmentation::TwoSided);

}  // namespace gkd
