#include "gkd/minres.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <limits>

namespace gkd {

MonolithicOperator::MonolithicOperator(const SaddlePointSystem& sys, const SpdFactor& F)
    : sys_(sys), F_(F), m_(sys.m()), n_(sys.n()) {
  sys.check_shapes();
  require_dim(F.dim(), m_, "monolithic factor");
}

Vector MonolithicOperator::apply(const Vector& x) const {
  require_dim(x.size(), size(), "monolithic apply");
  Vector out(size());
  const Vector a = x.head(m_);
  const Vector b = x.tail(n_);
  out.head(m_) = a + F_.whiten(Vector(sys_.A * b));
  out.tail(n_) = sys_.A.transpose() * F_.unwhiten(a);
  return out;
}

Vector MonolithicOperator::rhs() const {
  Vector out(size());
  out.head(m_) = F_.whiten(sys_.g);
  out.tail(n_) = sys_.r;
  return out;
}

Vector MonolithicOperator::to_whitened(const Vector& u, const Vector& p) const {
  require_dim(u.size(), m_, "u");
  require_dim(p.size(), n_, "p");
  Vector out(size());
  out.head(m_) = F_.mul_lower_transpose(u);
  out.tail(n_) = p;
  return out;
}

std::pair<Vector, Vector> MonolithicOperator::to_original(const Vector& x) const {
  require_dim(x.size(), size(), "monolithic vector");
  return {F_.unwhiten(Vector(x.head(m_))), Vector(x.tail(n_))};
}

void MinresOptions::validate() const {
  if (max_iter < 1) fail(ErrorCode::InvalidSpec, "max_iter must be >= 1");
  if (!(tol > 0.0)) fail(ErrorCode::InvalidSpec, "tol must be > 0");
  if (stop == MinresStop::Reference && !reference) {
    fail(ErrorCode::InvalidSpec, "MinresStop::Reference needs a reference solution");
  }
}

namespace {

using Op = std::function<Vector(const Vector&)>;
using Map = std::function<Vector(const Vector&)>;

// Paige-Saunders MINRES for a symmetric operator, x = x0 + correction where
// the correction solves op(x) = b0. `full` maps a raw iterate to the
// whitened solution of the original system.
MinresReport run_minres(const SaddlePointSystem& sys, const MonolithicOperator& K, const Op& op, const Vector& b0,
                        const Map& full, double rhs_norm, const MinresOptions& opts) {
  opts.validate();
  const Index N = b0.size();
  MinresReport rep;
  Vector x = Vector::Zero(N);

  auto finish = [&](const Vector& xx) {
    auto [u, p] = K.to_original(full(xx));
    rep.u = std::move(u);
    rep.p = std::move(p);
    rep.iterations = static_cast<Index>(rep.resid_precond.size());
  };

  const double beta1 = b0.norm();
  rep.initial_residual = beta1;
  if (!(beta1 > 0.0)) {
    rep.converged = true;
    finish(x);
    return rep;
  }

  Vector v_old = Vector::Zero(N);
  Vector v = b0 / beta1;
  Vector w1 = Vector::Zero(N), w2 = Vector::Zero(N);
  double beta_old = 0.0;
  double cs = -1.0, sn = 0.0, dbar = 0.0, epsln = 0.0;
  double phibar = beta1;
  const double thresh = opts.tol * (rhs_norm > 0.0 ? rhs_norm : beta1);

  for (Index it = 1; it <= opts.max_iter; ++it) {
    Vector pv = op(v);
    const double alpha = v.dot(pv);
    pv -= alpha * v;
    if (it > 1) pv -= beta_old * v_old;
    const double betan = pv.norm();

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alpha;
    const double gbar = sn * dbar - cs * alpha;
    epsln = sn * betan;
    dbar = -cs * betan;
    const double gamma = std::hypot(gbar, betan);
    if (!(gamma > 0.0)) break;
    cs = gbar / gamma;
    sn = betan / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    Vector w0 = std::move(w1);
    w1 = std::move(w2);
    w2 = (v - oldeps * w0 - delta * w1) / gamma;
    x += phi * w2;
    rep.resid_precond.push_back(std::abs(phibar));

    double rel = std::numeric_limits<double>::quiet_NaN();
    if (opts.reference) {
      auto [u, p] = K.to_original(full(x));
      double abs_err = 0.0;
      rel = detail::relative_error(sys.W, *opts.reference, u, p, &abs_err);
      rep.err_true.push_back(abs_err);
      rep.rel_error.push_back(rel);
    }
    const bool done = opts.stop == MinresStop::Reference ? rel <= opts.tol : std::abs(phibar) <= thresh;
    if (done || !(betan > 1e-14 * beta1)) {
      rep.converged = done || std::abs(phibar) <= thresh;
      break;
    }
    v_old = std::move(v);
    v = pv / betan;
    beta_old = betan;
  }
  finish(x);
  return rep;
}

}  // namespace

MinresReport minres_preconditioned(const SaddlePointSystem& sys, const SpdFactor& F, const MinresOptions& opts) {
  const MonolithicOperator K(sys, F);
  const Vector rhs = K.rhs();
  Vector x0 = Vector::Zero(K.size());
  x0.head(K.m()) = rhs.head(K.m());
  const Vector b0 = rhs - K.apply(x0);
  return run_minres(
      sys, K, [&K](const Vector& x) { return K.apply(x); }, b0, [&x0](const Vector& x) { return Vector(x0 + x); },
      rhs.norm(), opts);
}

std::pair<double, double> saddle_eig_from_sigma(double sigma) {
  if (!(sigma >= 0.0)) fail(ErrorCode::InvalidSpec, "sigma must be >= 0");
  const double root = std::sqrt(sigma * sigma + 0.25);
  return {0.5 + root, 0.5 - root};
}

SaddleEigenBasis saddle_eigvecs_from_triplets(const SaddlePointSystem& sys, const SpdFactor& F,
                                              const EllipticTriplets& t) {
  sys.check_shapes();
  t.check_shapes(sys.m(), sys.n());
  const Index m = sys.m();
  const Index n = sys.n();
  const Index k = t.k();
  SaddleEigenBasis out{Matrix(m + n, 2 * k), Vector(2 * k)};
  for (Index i = 0; i < k; ++i) {
    const double s = t.sigma(i);
    if (!(s > 0.0)) fail(ErrorCode::SingularTriplet, "zero elliptic singular value has no minus-branch eigenvector");
    const Vector ut = F.mul_lower_transpose(Vector(t.U.col(i)));
    const auto [lp, lm] = saddle_eig_from_sigma(s);
    const double lams[2] = {lp, lm};
    for (int b = 0; b < 2; ++b) {
      Vector y(m + n);
      y.head(m) = ut;
      y.tail(n) = (s / lams[b]) * t.V.col(i);
      out.Y.col(2 * i + b) = y.normalized();
      out.lambda(2 * i + b) = lams[b];
    }
  }
  return out;
}

MinresReport minres_deflated(const SaddlePointSystem& sys, const SpdFactor& F, const Matrix& Y,
                             const MinresOptions& opts) {
  const MonolithicOperator K(sys, F);
  require_dim(Y.rows(), K.size(), "deflation basis rows");
  if (Y.cols() == 0) return minres_preconditioned(sys, F, opts);

  const Vector rhs = K.rhs();
  Vector x0 = Vector::Zero(K.size());
  x0.head(K.m()) = rhs.head(K.m());
  const Vector b0 = rhs - K.apply(x0);

  Matrix KY(K.size(), Y.cols());
  for (Index j = 0; j < Y.cols(); ++j) KY.col(j) = K.apply(Vector(Y.col(j)));
  Matrix E = Y.transpose() * KY;
  E = 0.5 * (E + E.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(E);
  const Vector ev = es.eigenvalues().cwiseAbs();
  const double cond = ev.minCoeff() > 0.0 ? ev.maxCoeff() / ev.minCoeff() : std::numeric_limits<double>::infinity();
  if (!(cond <= 1e12)) {
    fail(ErrorCode::IllConditionedCoarse, "coarse matrix condition " + std::to_string(cond) + " exceeds 1e12");
  }
  const Matrix& Q = es.eigenvectors();
  const Vector inv = es.eigenvalues().cwiseInverse();
  auto solve_E = [&](const Vector& y) { return Vector(Q * (inv.asDiagonal() * (Q.transpose() * y))); };

  // P_D x = x - K Y E^{-1} Y^T x.
  auto project = [&](const Vector& x) { return Vector(x - KY * solve_E(Y.transpose() * x)); };
  const Vector coarse = Y * solve_E(Y.transpose() * b0);
  return run_minres(
      sys, K, [&](const Vector& x) { return project(K.apply(x)); }, project(b0),
      [&](const Vector& xh) { return Vector(x0 + coarse + xh - Y * solve_E(KY.transpose() * xh)); }, rhs.norm(),
      opts);
}

}  // namespace gkd
