#pragma once

#include "gkd/common.hpp"
#include "gkd/deflation.hpp"
#include "gkd/linops.hpp"
#include "gkd/problems.hpp"
#include "gkd/solver.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace gkd {

/// x -> K~ x with K~ = [[I, A~], [A~^T, 0]], A~ = L^{-1} A. Acts on
/// stacked vectors [y; p] of length m + n.
class MonolithicOperator {
public:
  MonolithicOperator(const SaddlePointSystem& sys, const SpdFactor& F);

  Index size() const noexcept { return m_ + n_; }
  Index m() const noexcept { return m_; }
  Index n() const noexcept { return n_; }

  Vector apply(const Vector& x) const;
  /// [L^{-1} g; r].
  Vector rhs() const;
  /// [L^T u; p].
  Vector to_whitened(const Vector& u, const Vector& p) const;
  /// (L^{-T} y, p).
  std::pair<Vector, Vector> to_original(const Vector& x) const;

private:
  const SaddlePointSystem& sys_;
  const SpdFactor& F_;
  Index m_;
  Index n_;
};

enum class MinresStop {
  /// ||r_k|| <= tol ||rhs||.
  Residual,
  /// Relative error against `reference` (matched-accuracy runs).
  Reference,
};

struct MinresOptions {
  Index max_iter = 10000;
  double tol = 1e-8;
  MinresStop stop = MinresStop::Residual;
  std::optional<ReferenceSolution> reference;

  void validate() const;
};

struct MinresReport {
  Index iterations = 0;
  /// Norm of the starting residual of the (projected) whitened system.
  double initial_residual = 0.0;
  /// Residual norm of the (projected) whitened system after each iteration.
  std::vector<double> resid_precond;
  /// ||u - u*||_W per iteration; empty without reference.
  std::vector<double> err_true;
  /// Same metric as IterationRecord::rel_error; empty without reference.
  std::vector<double> rel_error;
  Vector u;
  Vector p;
  bool converged = false;
};

/// MINRES on K~ [L^T u; p] = [L^{-1} g; r] started from [L^{-1} g; 0], the
/// same point as CRAIG. Hitting max_iter returns the partial report with
/// converged = false.
MinresReport minres_preconditioned(const SaddlePointSystem& sys, const SpdFactor& F, const MinresOptions& opts);

/// Eigenvalues 1/2 + sqrt(sigma^2 + 1/4) and 1/2 - sqrt(sigma^2 + 1/4).
std::pair<double, double> saddle_eig_from_sigma(double sigma);

struct SaddleEigenBasis {
  Matrix Y;       ///< (m + n) x 2k, unit columns
  Vector lambda;  ///< matching eigenvalues
};

/// Columns [L^T u_i; c v_i] / norm with c = sigma_i / lambda for both
/// branches. Throws SingularTriplet for sigma_i = 0.
SaddleEigenBasis saddle_eigvecs_from_triplets(const SaddlePointSystem& sys, const SpdFactor& F,
                                              const EllipticTriplets& t);

/// MINRES on (I - K~Y E^{-1} Y^T) K~ with E = Y^T K~ Y, followed by the
/// coarse correction. Throws IllConditionedCoarse when cond(E) > 1e12.
MinresReport minres_deflated(const SaddlePointSystem& sys, const SpdFactor& F, const Matrix& Y,
                             const MinresOptions& opts);

}  // namespace gkd
