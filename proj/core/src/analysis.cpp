#include "gkd/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseLU>

#include <cmath>
#include <string>

namespace gkd {

namespace {

void require_dense(Index n, Index limit) {
  if (n > limit) fail(ErrorCode::SizeExceeded, "dense spectrum refused for n = " + std::to_string(n));
}

Vector sorted_singular_values(const Matrix& M) {
  Eigen::BDCSVD<Matrix> svd(M);
  return svd.singularValues();
}

}  // namespace

SpectrumReport schur_spectrum_dense(const SaddlePointSystem& sys, const SpdFactor& F, Index dense_limit) {
  sys.check_shapes();
  require_dense(sys.n(), dense_limit);
  const Matrix Ad(sys.A);
  Matrix S = Ad.transpose() * F.apply_inverse(Ad);
  S = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  SpectrumReport out;
  out.values = es.eigenvalues().reverse();
  out.source = SpectrumSource::SchurEigen;
  const Index n = out.values.size();
  out.effective_condition = n > 0 ? out.values(0) / out.values(n - 1) : 0.0;
  return out;
}

SpectrumReport elliptic_spectrum_dense(const SaddlePointSystem& sys, const SpdFactor& F, Index dense_limit) {
  sys.check_shapes();
  require_dense(sys.n(), dense_limit);
  SpectrumReport out;
  out.values = sorted_singular_values(F.whiten(Matrix(sys.A)));
  out.source = SpectrumSource::EllipticSv;
  out.effective_condition = effective_condition(out.values, 0);
  return out;
}

SpectrumReport deflated_spectrum_dense(const SaddlePointSystem& sys, const SpdFactor& F,
                                       const DeflationOperators& defl, Index dense_limit) {
  sys.check_shapes();
  require_dense(sys.n(), dense_limit);
  const Index n = sys.n();
  Matrix AQ(sys.m(), n);
  Vector e = Vector::Zero(n);
  for (Index j = 0; j < n; ++j) {
    e(j) = 1.0;
    AQ.col(j) = defl.deflated_matvec(e);
    e(j) = 0.0;
  }
  SpectrumReport out;
  out.values = sorted_singular_values(F.whiten(AQ));
  out.source = SpectrumSource::Deflated;
  out.effective_condition = defl.k() < n ? effective_condition(out.values, defl.k()) : 0.0;
  return out;
}

double effective_condition(std::span<const double> values, Index deflated_count) {
  const auto n = static_cast<Index>(values.size());
  if (deflated_count < 0 || deflated_count >= n) fail(ErrorCode::InvalidSpec, "need 0 <= k < number of values");
  const double ratio = values[0] / values[static_cast<std::size_t>(n - 1 - deflated_count)];
  return ratio * ratio;
}

double effective_condition(const Vector& values, Index deflated_count) {
  return effective_condition(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())),
                             deflated_count);
}

ErrorCoefficients error_coefficients(const SaddlePointSystem& sys, const EllipticTriplets& t,
                                     const Vector& u_reference, const Vector& u_initial, double threshold) {
  require_dim(u_reference.size(), sys.m(), "u_reference");
  require_dim(u_initial.size(), sys.m(), "u_initial");
  require_dim(t.U.rows(), sys.m(), "triplets U rows");
  ErrorCoefficients out;
  out.threshold = threshold;
  out.z = t.U.transpose() * (sys.W * (u_reference - u_initial));
  for (Index i = 0; i < out.z.size(); ++i) {
    if (std::abs(out.z(i)) > threshold) out.above.push_back(i);
  }
  return out;
}

Vector craig_first_iterate(const SaddlePointSystem& sys, const SpdFactor& F) {
  CraigOptions opts;
  opts.max_iter = 1;
  return craig_solve(sys, F, opts).u;
}

Index plateau_length(std::span<const double> errors, double drop_factor) {
  if (errors.empty()) return 0;
  const double target = drop_factor * errors[0];
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i] < target) return static_cast<Index>(i);
  }
  return static_cast<Index>(errors.size());
}

Index iterations_to(std::span<const double> rel_errors, double tol) {
  for (std::size_t i = 0; i < rel_errors.size(); ++i) {
    if (rel_errors[i] <= tol) return static_cast<Index>(i + 1);
  }
  return 0;
}

double redundant_fraction(std::span<const double> residuals, double min_reduction) {
  if (residuals.size() < 2) return 0.0;
  std::size_t count = 0;
  for (std::size_t i = 1; i < residuals.size(); ++i) {
    if (residuals[i] > (1.0 - min_reduction) * residuals[i - 1]) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(residuals.size() - 1);
}

SparseMatrix assemble_kkt(const SaddlePointSystem& sys) {
  sys.check_shapes();
  const Index m = sys.m();
  const Index n = sys.n();
  std::vector<Eigen::Triplet<double, int>> trip;
  trip.reserve(static_cast<std::size_t>(sys.W.nonZeros() + 2 * sys.A.nonZeros()));
  for (int c = 0; c < sys.W.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(sys.W, c); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  }
  for (int c = 0; c < sys.A.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(sys.A, c); it; ++it) {
      trip.emplace_back(it.row(), static_cast<int>(m) + it.col(), it.value());
      trip.emplace_back(static_cast<int>(m) + it.col(), it.row(), it.value());
    }
  }
  SparseMatrix K(m + n, m + n);
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

ReferenceSolution direct_solve(const SaddlePointSystem& sys) {
  const SparseMatrix K = assemble_kkt(sys);
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success) fail(ErrorCode::FactorizationFailed, "KKT factorization failed");
  Vector rhs(sys.m() + sys.n());
  rhs << sys.g, sys.r;
  Vector x = lu.solve(rhs);
  // One step of iterative refinement.
  const Vector res = rhs - K * x;
  x += lu.solve(res);
  return {x.head(sys.m()), x.tail(sys.n())};
}

}  // namespace gkd
