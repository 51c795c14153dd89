#include "gkd/esvd.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace gkd {

namespace {

struct SmallTriplets {
  Matrix U;
  Vector s;
  Matrix V;
};

// k target triplets of a small dense matrix, extreme value first.
SmallTriplets small_targets(const Matrix& B, Index k, Target target) {
  Eigen::JacobiSVD<Matrix> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Index r = std::min(B.rows(), B.cols());
  if (k > r) fail(ErrorCode::InvalidSpec, "more targets than singular values");
  SmallTriplets out{Matrix(B.rows(), k), Vector(k), Matrix(B.cols(), k)};
  for (Index j = 0; j < k; ++j) {
    const Index src = target == Target::Smallest ? r - 1 - j : j;
    out.U.col(j) = svd.matrixU().col(src);
    out.V.col(j) = svd.matrixV().col(src);
    out.s(j) = svd.singularValues()(src);
  }
  return out;
}

// Reorders extreme-first columns into descending values.
EllipticTriplets to_descending(const Matrix& U, const Vector& s, const Matrix& V) {
  std::vector<Index> order(static_cast<std::size_t>(s.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return s(a) > s(b); });
  EllipticTriplets t;
  t.U.resize(U.rows(), s.size());
  t.V.resize(V.rows(), s.size());
  t.sigma.resize(s.size());
  for (Index j = 0; j < s.size(); ++j) {
    const Index src = order[static_cast<std::size_t>(j)];
    t.U.col(j) = U.col(src);
    t.V.col(j) = V.col(src);
    t.sigma(j) = s(src);
  }
  t.exact = false;
  return t;
}

Index dominant_index(const Vector& v) {
  const double vmax = v.cwiseAbs().maxCoeff();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= 0.5 * vmax) return i;
  }
  return 0;
}

Matrix hcat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

}  // namespace

void EsvdOptions::validate(Index n) const {
  if (k < 1) fail(ErrorCode::InvalidSpec, "k must be >= 1");
  if (eta <= k || eta > n) fail(ErrorCode::InvalidSpec, "need k < eta <= n");
  if (eta < k + 2) fail(ErrorCode::InvalidSpec, "eta must be at least k + 2");
  if (!(tol > 0.0)) fail(ErrorCode::InvalidSpec, "tol must be > 0");
  if (max_iter < 1) fail(ErrorCode::InvalidSpec, "max_iter must be >= 1");
}

double TripletResiduals::max_scalar() const { return scalar.size() ? scalar.maxCoeff() : 0.0; }

double TripletResiduals::max_vector() const { return vector_residual.size() ? vector_residual.maxCoeff() : 0.0; }

EllipticTriplets esvd_direct(const SaddlePointSystem& sys, const SpdFactor& F, Index k, Target target,
                             Index dense_limit) {
  sys.check_shapes();
  require_dim(F.dim(), sys.m(), "esvd_direct factor");
  const Index n = sys.n();
  if (k < 0 || k > n) fail(ErrorCode::InvalidSpec, "k must be in [0, n]");
  if (n > dense_limit) {
    fail(ErrorCode::SizeExceeded, "dense elliptic SVD refused for n = " + std::to_string(n) +
                                      "; use the restarted solver");
  }

  const Matrix At = F.whiten(Matrix(sys.A));
  Eigen::BDCSVD<Matrix> svd(At, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) fail(ErrorCode::FactorizationFailed, "dense SVD failed");
  const Vector& s = svd.singularValues();
  Matrix Ut = svd.matrixU();
  Matrix V = svd.matrixV();

  // Deterministic order and sign inside groups of numerically equal values.
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  const double tie = 1e-12 * (n > 0 ? s(0) : 0.0);
  for (Index i = 0; i < n;) {
    Index j = i + 1;
    while (j < n && s(j - 1) - s(j) <= tie) ++j;
    std::stable_sort(order.begin() + i, order.begin() + j,
                     [&](Index a, Index b) { return dominant_index(V.col(a)) < dominant_index(V.col(b)); });
    i = j;
  }

  const Index first = target == Target::Smallest ? n - k : 0;
  EllipticTriplets t;
  t.U.resize(sys.m(), k);
  t.V.resize(n, k);
  t.sigma.resize(k);
  for (Index j = 0; j < k; ++j) {
    const Index src = order[static_cast<std::size_t>(first + j)];
    Vector v = V.col(src);
    Vector ut = Ut.col(src);
    if (v(dominant_index(v)) < 0.0) {
      v = -v;
      ut = -ut;
    }
    t.V.col(j) = v;
    t.U.col(j) = F.unwhiten(ut);
    t.sigma(j) = s(src);
  }
  t.exact = true;

  if (k > 0) {
    const Matrix R = sys.A * t.V - sys.W * t.U * t.sigma.asDiagonal();
    const double scale = std::max(Matrix(sys.A).cwiseAbs().maxCoeff(), 1.0);
    if (!(R.cwiseAbs().maxCoeff() <= 1e-9 * scale)) {
      fail(ErrorCode::FactorizationFailed, "elliptic SVD identity check failed");
    }
  }
  return t;
}

BidiagFactors gkb_restarted(const SaddlePointSystem& sys, const SpdFactor& F, const Vector& v_start,
                            const Vector* u0, Index steps, EsvdReorth reorth, const Matrix* U, const Matrix* V) {
  GkbExtras extras{u0, U, V};
  const auto local = reorth == EsvdReorth::None ? Reorthogonalization::None : Reorthogonalization::Full;
  return gkb_run(sys, F, v_start, steps, local, extras);
}

EsvdResult esvd_restarted(const SaddlePointSystem& sys, const SpdFactor& F, const EsvdOptions& opts) {
  sys.check_shapes();
  require_dim(F.dim(), sys.m(), "esvd_restarted factor");
  const Index n = sys.n();
  opts.validate(n);
  const Index k = opts.k;
  const Index eta = opts.eta;

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);

  BidiagFactors fac = gkb_restarted(sys, F, v, nullptr, eta, opts.reorth);
  Matrix Ub = fac.U;
  Matrix Vb = fac.V;
  Matrix B = fac.bidiagonal();
  Vector r = fac.residual;

  EsvdResult res;
  EllipticTriplets prev;
  bool have_prev = false;
  double sigma_ref = 0.0;

  for (Index i = 1; i <= opts.max_iter; ++i) {
    if (B.cols() < k) fail(ErrorCode::Breakdown, "bidiagonalization broke down before k steps");
    Eigen::JacobiSVD<Matrix> svdB(B);
    sigma_ref = svdB.singularValues()(0);
    const SmallTriplets st = small_targets(B, k, opts.target);
    const Matrix Ui = Ub * st.U;
    const Matrix Vi = Vb * st.V;
    const double beta = r.norm();

    double crit = beta * std::abs(st.U(st.U.rows() - 1, 0)) / sigma_ref;
    if (opts.all_k_criterion) {
      for (Index j = 1; j < k; ++j) crit = std::max(crit, beta * std::abs(st.U(st.U.rows() - 1, j)) / sigma_ref);
    }
    res.criterion.push_back(crit);
    res.restarts = i;
    EllipticTriplets cur = to_descending(Ui, st.s, Vi);

    if (crit < opts.tol) {
      res.converged = true;
      res.triplets = have_prev ? std::move(prev) : std::move(cur);
      break;
    }
    if (i == opts.max_iter) {
      res.triplets = std::move(cur);
      break;
    }
    prev = std::move(cur);
    have_prev = true;

    // Restart: augment with the current approximations.
    v = r / beta;
    const Matrix Vaug = hcat(Vi, v);
    const Vector Av = sys.A * v;
    Vector d = Ui.transpose() * Av;
    Vector u = F.apply_inverse(Av) - Ui * d;
    if (opts.reorth != EsvdReorth::None) {
      const Vector c = Ui.transpose() * (sys.W * u);
      u -= Ui * c;
      d += c;
    }
    const double alpha = w_norm(sys.W, u);
    if (!(alpha > 1e-14 * sigma_ref)) fail(ErrorCode::Breakdown, "restart vector vanished");
    u /= alpha;
    const Matrix Uaug = hcat(Ui, u);

    Vector vv = sys.A.transpose() * u - alpha * v;
    for (int pass = 0; pass < 2; ++pass) vv -= Vaug * (Vaug.transpose() * vv);
    const double beta2 = vv.norm();

    Matrix S = Matrix::Zero(k + 1, k + 1);
    S.topLeftCorner(k, k) = st.s.asDiagonal();
    S.col(k).head(k) = d;
    S(k, k) = alpha;

    if (!(beta2 > 1e-14 * sigma_ref)) {
      Ub = Uaug;
      Vb = Vaug;
      B = S;
      r = Vector::Zero(n);
      continue;
    }
    const bool ext = opts.reorth == EsvdReorth::Full;
    fac = gkb_restarted(sys, F, vv, &u, eta - k - 1, opts.reorth, ext ? &Uaug : nullptr, ext ? &Vaug : nullptr);
    const Index q = fac.steps();
    Ub = hcat(Uaug, fac.U);
    Vb = hcat(Vaug, fac.V);
    B = Matrix::Zero(k + 1 + q, k + 1 + q);
    B.topLeftCorner(k + 1, k + 1) = S;
    if (q > 0) {
      B.bottomRightCorner(q, q) = fac.bidiagonal();
      B(k, k + 1) = beta2;
      r = fac.residual;
    } else {
      r = Vector::Zero(n);
    }
  }

  res.residuals = triplet_residuals(sys, F, res.triplets, sigma_ref);
  res.triplets.residuals = res.residuals.vector_residual;
  return res;
}

RitzRecycler::RitzRecycler(const SparseMatrix& A, Index k, Target target, Index eta)
    : A_(A), k_(k), target_(target), eta_(eta) {
  if (k < 1) fail(ErrorCode::InvalidSpec, "k must be >= 1");
  if (eta < 2 * k + 1) fail(ErrorCode::InvalidSpec, "recycling needs eta >= 2k + 1");
}

void RitzRecycler::on_step(const GkbStep& step) {
  alpha_.push_back(step.alpha);
  beta_.push_back(step.beta);
  U_.push_back(step.u);
  V_.push_back(step.v);
  const Index s = window_size();
  if (static_cast<Index>(alpha_.size()) == s + 1) {
    process(state_, s, &V_.back());
    alpha_.erase(alpha_.begin(), alpha_.begin() + s);
    beta_.erase(beta_.begin(), beta_.begin() + s);
    U_.erase(U_.begin(), U_.begin() + s);
    V_.erase(V_.begin(), V_.begin() + s);
    ++windows_;
  }
}

void RitzRecycler::process(State& st, Index s, const Vector* v_next) const {
  const Index m = U_.front().size();
  const Index n = V_.front().size();
  Matrix Bn = Matrix::Zero(s, s);
  Matrix Uw(m, s), Vw(n, s);
  for (Index j = 0; j < s; ++j) {
    const auto sj = static_cast<std::size_t>(j);
    Bn(j, j) = alpha_[sj];
    if (j > 0) Bn(j - 1, j) = beta_[sj];
    Uw.col(j) = U_[sj];
    Vw.col(j) = V_[sj];
  }

  Matrix B, Ub, Vb;
  if (st.first) {
    B = std::move(Bn);
    Ub = std::move(Uw);
    Vb = std::move(Vw);
  } else {
    const Index q = st.sigma.size();
    B = Matrix::Zero(q + s, q + s);
    B.topLeftCorner(q, q) = st.sigma.asDiagonal();
    B.bottomRightCorner(s, s) = Bn;
    B.col(q).head(q) = st.r;
    Ub = hcat(st.U, Uw);
    Vb = hcat(st.V, Vw);
  }

  const Index dim = B.rows();
  const Index kk = k_;
  if (dim < 2 * kk) fail(ErrorCode::InsufficientTrace, "window too short for recycling");
  const SmallTriplets s1 = small_targets(B, kk, target_);
  const SmallTriplets s2 = small_targets(B.topLeftCorner(dim - 1, dim - 1), kk, target_);

  Matrix CU = Matrix::Zero(dim, 2 * kk);
  Matrix CV = Matrix::Zero(dim, 2 * kk);
  CU.leftCols(kk) = s1.U;
  CV.leftCols(kk) = s1.V;
  CU.block(0, kk, dim - 1, kk) = s2.U;
  CV.block(0, kk, dim - 1, kk) = s2.V;
  Eigen::HouseholderQR<Matrix> qu(CU), qv(CV);
  const Matrix Uso = qu.householderQ() * Matrix::Identity(dim, 2 * kk);
  const Matrix Vso = qv.householderQ() * Matrix::Identity(dim, 2 * kk);

  const Matrix H = Uso.transpose() * B * Vso;
  Eigen::JacobiSVD<Matrix> svdH(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  st.U = Ub * (Uso * svdH.matrixU());
  st.V = Vb * (Vso * svdH.matrixV());
  st.sigma = svdH.singularValues();
  if (v_next != nullptr) st.r = st.U.transpose() * (A_ * (*v_next));
  st.first = false;
}

RecycleResult RitzRecycler::finish() const {
  RecycleResult out;
  State st = state_;
  if (windows_ == 0) {
    const auto s = static_cast<Index>(alpha_.size());
    if (s < 2 * k_) {
      fail(ErrorCode::InsufficientTrace, "trace of " + std::to_string(s) + " steps is too short for " +
                                             std::to_string(k_) + " recycled triplets");
    }
    process(st, s, nullptr);
    out.insufficient = true;
  }
  const Index q = st.sigma.size();
  const Index first = target_ == Target::Smallest ? q - k_ : 0;
  out.triplets = to_descending(st.U.middleCols(first, k_), st.sigma.segment(first, k_), st.V.middleCols(first, k_));
  out.windows = windows_;
  return out;
}

RecycleResult esvd_recycled(const SaddlePointSystem& sys, const BidiagFactors& trace, const EsvdOptions& opts) {
  sys.check_shapes();
  require_dim(trace.U.rows(), sys.m(), "trace U rows");
  require_dim(trace.V.rows(), sys.n(), "trace V rows");
  RitzRecycler rec(sys.A, opts.k, opts.target, opts.eta);
  for (Index j = 0; j < trace.steps(); ++j) {
    const Vector u = trace.U.col(j);
    const Vector v = trace.V.col(j);
    rec.on_step(GkbStep{j + 1, trace.alpha(j), trace.beta(j), u, v});
  }
  return rec.finish();
}

double estimate_sigma_max(const SaddlePointSystem& sys, const SpdFactor& F, Index iterations) {
  const Index n = sys.n();
  Vector x(n);
  for (Index i = 0; i < n; ++i) x(i) = 1.0 + 0.5 * std::sin(1.0 + 3.7 * static_cast<double>(i));
  x.normalize();
  double lambda = 0.0;
  for (Index it = 0; it < iterations; ++it) {
    const Vector y = sys.A.transpose() * F.apply_inverse(Vector(sys.A * x));
    lambda = x.dot(y);
    const double ny = y.norm();
    if (!(ny > 0.0)) return 0.0;
    x = y / ny;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

TripletResiduals triplet_residuals(const SaddlePointSystem& sys, const SpdFactor& F, const EllipticTriplets& t,
                                   double sigma_ref) {
  sys.check_shapes();
  t.check_shapes(sys.m(), sys.n());
  TripletResiduals out;
  out.sigma_ref = sigma_ref > 0.0 ? sigma_ref : estimate_sigma_max(sys, F);
  const double scale = out.sigma_ref > 0.0 ? out.sigma_ref : 1.0;
  out.scalar.resize(t.k());
  out.vector_residual.resize(t.k());
  for (Index i = 0; i < t.k(); ++i) {
    const Vector u = t.U.col(i);
    const Vector v = t.V.col(i);
    out.scalar(i) = (sys.A.transpose() * u - t.sigma(i) * v).norm() / scale;
    out.vector_residual(i) = w_norm(sys.W, F.apply_inverse(Vector(sys.A * v)) - t.sigma(i) * u) / scale;
  }
  return out;
}

}  // namespace gkd
