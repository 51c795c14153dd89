#include "gkd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace gkd {

namespace {

constexpr double kBreakdownTol = 1e-14;
// Constraint residual |beta_{k+1} zeta_k| at rounding level relative to beta_1.
// Iterating further only feeds noise into the recurrence.
constexpr double kResidualFloor = 1e-14;

Matrix stack_columns(const std::vector<Vector>& cols, Index rows) {
  Matrix M(rows, static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) M.col(static_cast<Index>(j)) = cols[j];
  return M;
}

// Two-pass classical Gram-Schmidt against a column list.
void orthogonalize(Vector& x, const std::vector<Vector>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const Vector& q : basis) x -= q.dot(x) * q;
  }
}

void w_orthogonalize(Vector& x, const std::vector<Vector>& basis, const SparseMatrix& W) {
  for (int pass = 0; pass < 2; ++pass) {
    const Vector Wx = W * x;
    for (const Vector& q : basis) x -= q.dot(Wx) * q;
  }
}

void orthogonalize(Vector& x, const Matrix& Q) {
  if (Q.cols() == 0) return;
  for (int pass = 0; pass < 2; ++pass) x -= Q * (Q.transpose() * x);
}

void w_orthogonalize(Vector& x, const Matrix& Q, const SparseMatrix& W) {
  if (Q.cols() == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    const Vector Wx = W * x;
    x -= Q * (Q.transpose() * Wx);
  }
}

}  // namespace

Matrix BidiagFactors::bidiagonal() const {
  const Index eta = steps();
  Matrix B = Matrix::Zero(eta, eta);
  for (Index j = 0; j < eta; ++j) {
    B(j, j) = alpha(j);
    if (j > 0) B(j - 1, j) = beta(j);
  }
  return B;
}

BidiagFactors gkb_run(const SaddlePointSystem& sys, const SpdFactor& F, const Vector& start, Index steps,
                      Reorthogonalization reorth, const GkbExtras& extras) {
  const SparseMatrix& A = sys.A;
  const SparseMatrix& W = sys.W;
  const Index m = A.rows();
  const Index n = A.cols();
  require_dim(start.size(), n, "gkb_run start");
  require_dim(F.dim(), m, "gkb_run factor");
  if (steps < 1 || steps > n) fail(ErrorCode::InvalidSpec, "gkb_run steps must be in [1, n]");
  if (extras.u0 != nullptr) require_dim(extras.u0->size(), m, "gkb_run u0");

  const double beta1 = start.norm();
  if (!(beta1 > 0.0)) fail(ErrorCode::InvalidSpec, "gkb_run start vector is zero");

  const bool full = reorth == Reorthogonalization::Full;
  std::vector<Vector> Us, Vs;
  std::vector<double> alphas, betas;
  Us.reserve(static_cast<std::size_t>(steps));
  Vs.reserve(static_cast<std::size_t>(steps));

  Vs.push_back(start / beta1);
  betas.push_back(beta1);
  Vector u = F.apply_inverse(Vector(A * Vs.back()));
  if (extras.u0 != nullptr) u -= beta1 * (*extras.u0);
  if (extras.U_ext != nullptr) w_orthogonalize(u, *extras.U_ext, W);
  double alpha = w_norm(W, u);

  BidiagFactors out;
  double scale = std::max(alpha, beta1);
  if (!(alpha > kBreakdownTol * scale)) {
    out.breakdown = true;
    out.U = Matrix(m, 0);
    out.V = Matrix(n, 0);
    out.alpha = Vector(0);
    out.beta = Vector(0);
    out.residual = Vector::Zero(n);
    return out;
  }
  Us.push_back(u / alpha);
  alphas.push_back(alpha);

  Vector v_res;
  for (Index j = 0; j < steps; ++j) {
    Vector v = A.transpose() * Us[static_cast<std::size_t>(j)] - alphas.back() * Vs.back();
    if (full) orthogonalize(v, Vs);
    if (extras.V_ext != nullptr) orthogonalize(v, *extras.V_ext);
    if (j + 1 == steps) {
      v_res = std::move(v);
      break;
    }
    const double beta = v.norm();
    scale = std::max(scale, beta);
    if (!(beta > kBreakdownTol * scale)) {
      out.breakdown = true;
      v_res = std::move(v);
      break;
    }
    Vs.push_back(v / beta);
    betas.push_back(beta);

    u = F.apply_inverse(Vector(A * Vs.back())) - beta * Us.back();
    if (full) w_orthogonalize(u, Us, W);
    if (extras.U_ext != nullptr) w_orthogonalize(u, *extras.U_ext, W);
    alpha = w_norm(W, u);
    scale = std::max(scale, alpha);
    if (!(alpha > kBreakdownTol * scale)) {
      // Drop the unmatched v so that U and V keep equal width.
      Vs.pop_back();
      betas.pop_back();
      out.breakdown = true;
      v_res = Vector::Zero(n);
      break;
    }
    Us.push_back(u / alpha);
    alphas.push_back(alpha);
  }

  out.U = stack_columns(Us, m);
  out.V = stack_columns(Vs, n);
  out.alpha = Eigen::Map<const Vector>(alphas.data(), static_cast<Index>(alphas.size()));
  out.beta = Eigen::Map<const Vector>(betas.data(), static_cast<Index>(betas.size()));
  out.residual = std::move(v_res);
  out.beta_next = out.residual.norm();
  return out;
}

void CraigOptions::validate() const {
  if (max_iter < 1) fail(ErrorCode::InvalidSpec, "max_iter must be >= 1");
  if (!(tol > 0.0)) fail(ErrorCode::InvalidSpec, "tol must be > 0");
  if (estimate_delay < 1) fail(ErrorCode::InvalidSpec, "estimate_delay must be >= 1");
  if (stop_rule == StopRule::Reference && !reference) {
    fail(ErrorCode::InvalidSpec, "StopRule::Reference needs a reference solution");
  }
}

std::vector<double> SolveReport::true_errors() const {
  std::vector<double> out;
  out.reserve(history.size());
  for (const auto& rec : history) out.push_back(rec.err_true);
  return out;
}

std::vector<double> craig_error_estimate(std::span<const double> zetas, Index d) {
  if (d < 1) fail(ErrorCode::InvalidSpec, "estimate delay must be >= 1");
  const auto K = static_cast<Index>(zetas.size());
  std::vector<double> out;
  if (K < d) return out;
  out.reserve(static_cast<std::size_t>(K - d + 1));
  double window = 0.0;
  for (Index j = 0; j < d; ++j) window += zetas[static_cast<std::size_t>(j)] * zetas[static_cast<std::size_t>(j)];
  for (Index i = 0; i + d <= K; ++i) {
    out.push_back(std::sqrt(std::max(0.0, window)));
    if (i + d < K) {
      const double add = zetas[static_cast<std::size_t>(i + d)];
      const double drop = zetas[static_cast<std::size_t>(i)];
      window += add * add - drop * drop;
    }
  }
  return out;
}

namespace detail {

double relative_error(const SparseMatrix& W, const ReferenceSolution& ref, const Vector& u, const Vector& p,
                      double* abs_energy_error) {
  const double eu = w_norm(W, u - ref.u);
  if (abs_energy_error != nullptr) *abs_energy_error = eu;
  const double nu = w_norm(W, ref.u);
  const double np = ref.p.norm();
  const double ru = nu > 0.0 ? eu / nu : eu;
  const double rp = np > 0.0 ? (p - ref.p).norm() / np : (p - ref.p).norm();
  return std::max(ru, rp);
}

SolveReport craig_iterate(const CraigProblem& pb, const CraigOptions& opts) {
  opts.validate();
  const SparseMatrix& A = pb.A;
  const SparseMatrix& W = pb.W;
  const Index m = A.rows();
  const Index n = A.cols();
  require_dim(pb.u0.size(), m, "craig u0");
  require_dim(pb.b.size(), n, "craig start vector");
  if (opts.reference) {
    require_dim(opts.reference->u.size(), m, "reference u");
    require_dim(opts.reference->p.size(), n, "reference p");
  }

  SolveReport rep;
  Vector u_k = pb.u0;
  Vector p_k = Vector::Zero(n);

  auto mapped = [&](const Vector& u, const Vector& p) {
    return pb.map_iterate ? pb.map_iterate(u, p) : std::make_pair(u, p);
  };

  const double beta1 = pb.b.norm();
  if (!(beta1 > kBreakdownTol * pb.rhs_scale)) {
    auto [u, p] = mapped(u_k, p_k);
    rep.u = std::move(u);
    rep.p = std::move(p);
    rep.converged = true;
    rep.status = SolveStatus::ZeroRhs;
    return rep;
  }

  const bool full = opts.reorth == Reorthogonalization::Full;
  const bool store = opts.keep_trace || full;
  std::vector<Vector> Us, Vs;
  std::vector<double> zetas, alphas, betas;
  const Index d = opts.estimate_delay;

  Vector v = pb.b / beta1;
  Vector u = pb.F.apply_inverse(pb.forward(v));
  double alpha = w_norm(W, u);
  if (!(alpha > kBreakdownTol * beta1)) {
    auto [uu, pp] = mapped(u_k, p_k);
    rep.u = std::move(uu);
    rep.p = std::move(pp);
    rep.status = SolveStatus::Breakdown;
    return rep;
  }
  u /= alpha;
  double beta = beta1;
  double zeta = beta1 / alpha;
  Vector dvec = v / alpha;
  u_k += zeta * u;
  p_k -= zeta * dvec;
  double znorm2 = zeta * zeta;
  double scale = std::max(alpha, beta1);
  Vector vnext;

  for (Index k = 1;; ++k) {
    IterationRecord rec;
    rec.iter = k;
    rec.alpha = alpha;
    rec.beta = beta;
    rec.zeta = zeta;
    zetas.push_back(zeta);
    alphas.push_back(alpha);
    betas.push_back(beta);
    if (store) {
      Us.push_back(u);
      Vs.push_back(v);
    }
    if (opts.observer != nullptr) opts.observer->on_step(GkbStep{k, alpha, beta, u, v});

    double rel = std::numeric_limits<double>::quiet_NaN();
    if (opts.reference) {
      auto [mu, mp] = mapped(u_k, p_k);
      double abs_err = 0.0;
      rel = relative_error(W, *opts.reference, mu, mp, &abs_err);
      rec.err_true = abs_err;
      rec.rel_error = rel;
    }
    rep.history.push_back(rec);
    if (k > d) {
      // The window zeta_{k-d+1..k} bounds the error of iterate k-d.
      double win = 0.0;
      for (Index j = k - d; j < k; ++j) win += zetas[static_cast<std::size_t>(j)] * zetas[static_cast<std::size_t>(j)];
      rep.history[static_cast<std::size_t>(k - d - 1)].err_estimate = std::sqrt(win);
    }

    vnext = (pb.backward ? pb.backward(u) : Vector(A.transpose() * u)) - alpha * v;
    if (full) orthogonalize(vnext, Vs);
    const double beta_next = vnext.norm();

    bool done = false;
    if (opts.stop_rule == StopRule::Reference) {
      done = rel <= opts.tol;
    } else if (k > d) {
      const double est = rep.history[static_cast<std::size_t>(k - d - 1)].err_estimate;
      done = est <= opts.tol * std::sqrt(znorm2);
    } else {
      done = std::abs(beta_next * zeta) <= opts.tol * beta1;
    }
    scale = std::max(scale, beta_next);
    const bool exhausted = !(beta_next > kBreakdownTol * scale);
    const bool at_floor = std::abs(beta_next * zeta) <= kResidualFloor * beta1;
    if (done || exhausted || at_floor) {
      rep.converged = true;
      rep.status = SolveStatus::Converged;
      break;
    }
    if (k >= opts.max_iter) {
      rep.status = SolveStatus::MaxIterations;
      break;
    }

    beta = beta_next;
    v = vnext / beta;
    Vector w = pb.F.apply_inverse(pb.forward(v)) - beta * u;
    if (full) w_orthogonalize(w, Us, W);
    alpha = w_norm(W, w);
    scale = std::max(scale, alpha);
    if (!(alpha > kBreakdownTol * scale)) {
      // v_{k+1} is annihilated by the forward operator: the Krylov space is
      // exhausted and iterate k is final.
      rep.converged = true;
      rep.status = SolveStatus::Converged;
      break;
    }
    u = w / alpha;
    zeta = -(beta / alpha) * zeta;
    dvec = (v - beta * dvec) / alpha;
    u_k += zeta * u;
    p_k -= zeta * dvec;
    znorm2 += zeta * zeta;
  }

  rep.iterations = static_cast<Index>(rep.history.size());
  if (opts.keep_trace) {
    BidiagFactors tr;
    tr.U = stack_columns(Us, m);
    tr.V = stack_columns(Vs, n);
    tr.alpha = Eigen::Map<const Vector>(alphas.data(), static_cast<Index>(alphas.size()));
    tr.beta = Eigen::Map<const Vector>(betas.data(), static_cast<Index>(betas.size()));
    tr.residual = vnext;
    tr.beta_next = vnext.norm();
    tr.breakdown = rep.status == SolveStatus::Breakdown;
    rep.trace = std::move(tr);
  }
  auto [uu, pp] = mapped(u_k, p_k);
  rep.u = std::move(uu);
  rep.p = std::move(pp);
  return rep;
}

}  // namespace detail

SolveReport craig_solve(const SaddlePointSystem& sys, const SpdFactor& F, const CraigOptions& opts) {
  sys.check_shapes();
  require_dim(F.dim(), sys.m(), "craig factor");
  detail::CraigProblem pb{sys.A, sys.W, F, [&sys](const Vector& x) { return Vector(sys.A * x); }, {}, {}, {}, {}, {}};
  pb.u0 = F.apply_inverse(sys.g);
  const Vector Atu0 = sys.A.transpose() * pb.u0;
  pb.b = sys.r - Atu0;
  pb.rhs_scale = sys.r.norm() + Atu0.norm();
  return detail::craig_iterate(pb, opts);
}

}  // namespace gkd
