#pragma once

#include "gkd/common.hpp"
#include "gkd/linops.hpp"
#include "gkd/problems.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace gkd {

enum class Reorthogonalization { None, Full };

/// Output of a (partial) generalized Golub-Kahan bidiagonalization:
/// A V = W U B, A^T U = V B^T + residual e_eta^T, U^T W U = I, V^T V = I.
struct BidiagFactors {
  Matrix U;  ///< m x eta, W-orthonormal
  Matrix V;  ///< n x eta, orthonormal
  /// Diagonal of B.
  Vector alpha;
  /// beta(0) is the norm of the start vector; beta(j) = B(j-1, j) for j >= 1.
  Vector beta;
  /// Continuation vector r_eta (not normalized).
  Vector residual;
  double beta_next = 0.0;
  bool breakdown = false;

  Index steps() const noexcept { return alpha.size(); }
  /// eta x eta upper bidiagonal matrix.
  Matrix bidiagonal() const;
};

/// Optional extras for the bidiagonalization used by the restarted solver.
struct GkbExtras {
  /// Augmentation vector: the first left vector is W-orthogonalized as
  /// u -= ||start|| * u0.
  const Vector* u0 = nullptr;
  /// Previously converged directions to reorthogonalize against.
  const Matrix* U_ext = nullptr;
  const Matrix* V_ext = nullptr;
};

/// `steps` steps of the generalized bidiagonalization started from `start`.
/// Breakdown (alpha or beta below 1e-14 relative) truncates the factors and
/// sets `breakdown`.
BidiagFactors gkb_run(const SaddlePointSystem& sys, const SpdFactor& F, const Vector& start, Index steps,
                      Reorthogonalization reorth, const GkbExtras& extras = {});

/// One step of the bidiagonalization as seen by an observer: beta is the
/// coupling of v_index to u_{index-1} (beta_1 = ||b||).
struct GkbStep {
  Index index;
  double alpha;
  double beta;
  const Vector& u;
  const Vector& v;
};

/// Receives every bidiagonalization step of a CRAIG run. Observers must not
/// modify solver state; the solver never waits on them.
class GkbObserver {
public:
  virtual ~GkbObserver() = default;
  virtual void on_step(const GkbStep& step) = 0;
};

struct ReferenceSolution {
  Vector u;
  Vector p;
};

enum class StopRule {
  /// Delayed lower-bound estimate of the W-energy error of u.
  ErrorEstimate,
  /// Relative error against `CraigOptions::reference` (matched-accuracy runs).
  Reference,
};

struct CraigOptions {
  Index max_iter = 1000;
  double tol = 1e-8;
  Index estimate_delay = 5;
  bool keep_trace = false;
  Reorthogonalization reorth = Reorthogonalization::None;
  StopRule stop_rule = StopRule::ErrorEstimate;
  std::optional<ReferenceSolution> reference;
  GkbObserver* observer = nullptr;

  void validate() const;
};

struct IterationRecord {
  Index iter = 0;
  double alpha = 0.0;
  double beta = 0.0;
  double zeta = 0.0;
  /// Lower bound on ||u* - u^(iter)||_W; NaN until `estimate_delay` more steps exist.
  double err_estimate = std::numeric_limits<double>::quiet_NaN();
  /// ||u* - u^(iter)||_W against the reference; NaN without one.
  double err_true = std::numeric_limits<double>::quiet_NaN();
  /// max(||u - u*||_W / ||u*||_W, ||p - p*|| / ||p*||); NaN without reference.
  double rel_error = std::numeric_limits<double>::quiet_NaN();
};

enum class SolveStatus { Converged, MaxIterations, ZeroRhs, Breakdown };

struct SolveReport {
  Vector u;
  Vector p;
  Index iterations = 0;
  std::vector<IterationRecord> history;
  bool converged = false;
  SolveStatus status = SolveStatus::MaxIterations;
  std::optional<BidiagFactors> trace;

  std::vector<double> true_errors() const;
};

/// Generalized CRAIG. The start vector is b = r - A^T W^{-1} g and the
/// iterates are u^(k) = W^{-1} g + U_k z_k, p^(k) = V_k y_k, realized by
/// short recurrences. Hitting max_iter returns the partial report with
/// status MaxIterations.
SolveReport craig_solve(const SaddlePointSystem& sys, const SpdFactor& F, const CraigOptions& opts);

/// Delayed error estimates from the recurrence scalars zeta_1..zeta_K:
/// entry i (iterate i, 0-based from the start point) is
/// sqrt(zeta_{i+1}^2 + ... + zeta_{i+d}^2). Empty when K < d.
std::vector<double> craig_error_estimate(std::span<const double> zetas, Index d);

namespace detail {

using IterateMap = std::function<std::pair<Vector, Vector>(const Vector&, const Vector&)>;

/// CRAIG with replaceable forward and transposed products.
struct CraigProblem {
  const SparseMatrix& A;
  const SparseMatrix& W;
  const SpdFactor& F;
  std::function<Vector(const Vector&)> forward;
  /// Transposed product; A^T u when empty.
  std::function<Vector(const Vector&)> backward;
  Vector u0;
  Vector b;
  /// ||b|| <= 1e-14 * rhs_scale is treated as a zero right-hand side.
  double rhs_scale = 0.0;
  /// Maps raw iterates to the quantity compared with the reference.
  IterateMap map_iterate;
};

SolveReport craig_iterate(const CraigProblem& problem, const CraigOptions& opts);

double relative_error(const SparseMatrix& W, const ReferenceSolution& ref, const Vector& u, const Vector& p,
                      double* abs_energy_error = nullptr);

}  // namespace detail

}  // namespace gkd
