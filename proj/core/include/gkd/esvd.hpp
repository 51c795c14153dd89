#pragma once

#include "gkd/common.hpp"
#include "gkd/deflation.hpp"
#include "gkd/linops.hpp"
#include "gkd/problems.hpp"
#include "gkd/solver.hpp"

#include <cstdint>
#include <vector>

namespace gkd {

enum class Target { Smallest, Largest };

/// Reorthogonalization inside the restarted bidiagonalization: against
/// nothing, against the vectors of the current call, or additionally against
/// the current approximate singular vectors.
enum class EsvdReorth { None, Local, Full };

struct EsvdOptions {
  Index k = 10;
  Target target = Target::Smallest;
  /// Search subspace dimension.
  Index eta = 28;
  double tol = 1e-10;
  Index max_iter = 100;
  EsvdReorth reorth = EsvdReorth::Full;
  /// Require (beta mu_i) / sigma < tol for every targeted triplet instead of
  /// the extreme one only.
  bool all_k_criterion = false;
  std::uint64_t seed = 0;

  /// Throws InvalidSpec unless 1 <= k < eta <= n and the restart leaves at
  /// least one new step (eta >= k + 2).
  void validate(Index n) const;
};

struct TripletResiduals {
  /// ||A^T u_i - sigma_i v_i|| / sigma_ref; equals beta |mu_i| / sigma_ref for
  /// Ritz triplets of a bidiagonalization.
  Vector scalar;
  /// ||W^{-1} A v_i - sigma_i u_i||_W / sigma_ref.
  Vector vector_residual;
  double sigma_ref = 0.0;

  double max_scalar() const;
  double max_vector() const;
};

/// Dense SVD of L^{-1} A, U = L^{-T} U~. Refuses n > dense_limit with
/// SizeExceeded. Values descending; near-ties are ordered by the position of
/// the first dominant entry of v and every v has a positive dominant entry.
EllipticTriplets esvd_direct(const SaddlePointSystem& sys, const SpdFactor& F, Index k, Target target,
                             Index dense_limit = 4096);

/// Bidiagonalization started from v_start with the augmentation
/// u_1 = W^{-1} A v_1 - ||v_start|| u0 and optional reorthogonalization
/// against (U, V).
BidiagFactors gkb_restarted(const SaddlePointSystem& sys, const SpdFactor& F, const Vector& v_start,
                            const Vector* u0, Index steps, EsvdReorth reorth, const Matrix* U = nullptr,
                            const Matrix* V = nullptr);

struct EsvdResult {
  EllipticTriplets triplets;
  TripletResiduals residuals;
  /// Number of SVDs of B computed.
  Index restarts = 0;
  bool converged = false;
  /// Stopping scalar after each SVD.
  std::vector<double> criterion;
};

/// Restarted augmented bidiagonalization. On convergence the triplets of the
/// previous SVD are returned; otherwise those of the last one.
EsvdResult esvd_restarted(const SaddlePointSystem& sys, const SpdFactor& F, const EsvdOptions& opts);

struct RecycleResult {
  EllipticTriplets triplets;
  /// Completed windows.
  Index windows = 0;
  /// No window completed; the triplets come from the partial trace.
  bool insufficient = false;
};

/// Ritz extraction from the bidiagonalization inside a CRAIG run. Attach as
/// CraigOptions::observer; only the current window is kept.
class RitzRecycler : public GkbObserver {
public:
  RitzRecycler(const SparseMatrix& A, Index k, Target target, Index eta);

  void on_step(const GkbStep& step) override;

  Index windows() const noexcept { return windows_; }
  /// Throws InsufficientTrace when fewer than 2k steps were observed.
  RecycleResult finish() const;

private:
  struct State {
    bool first = true;
    Matrix U, V;
    Vector sigma;
    Vector r;
  };

  Index window_size() const noexcept { return state_.first ? eta_ : eta_ - 2 * k_; }
  void process(State& st, Index s, const Vector* v_next) const;

  const SparseMatrix& A_;
  Index k_;
  Target target_;
  Index eta_;
  std::vector<double> alpha_, beta_;
  std::vector<Vector> U_, V_;
  State state_;
  Index windows_ = 0;
};

/// Replays a retained trace through a RitzRecycler.
RecycleResult esvd_recycled(const SaddlePointSystem& sys, const BidiagFactors& trace, const EsvdOptions& opts);

/// sigma_ref <= 0 uses an estimate of the largest elliptic singular value.
TripletResiduals triplet_residuals(const SaddlePointSystem& sys, const SpdFactor& F, const EllipticTriplets& t,
                                   double sigma_ref = 0.0);

/// Largest elliptic singular value by power iteration on A^T W^{-1} A.
double estimate_sigma_max(const SaddlePointSystem& sys, const SpdFactor& F, Index iterations = 50);

}  // namespace gkd
