#pragma once

#include "gkd/common.hpp"
#include "gkd/deflation.hpp"
#include "gkd/linops.hpp"
#include "gkd/problems.hpp"
#include "gkd/solver.hpp"

#include <span>
#include <vector>

namespace gkd {

enum class SpectrumSource { SchurEigen, EllipticSv, Deflated };

struct SpectrumReport {
  Vector values;  ///< descending
  SpectrumSource source = SpectrumSource::SchurEigen;
  double effective_condition = 0.0;
};

/// Eigenvalues of S = A^T W^{-1} A. SizeExceeded above dense_limit columns.
SpectrumReport schur_spectrum_dense(const SaddlePointSystem& sys, const SpdFactor& F, Index dense_limit = 4096);

/// Singular values of L^{-1} A.
SpectrumReport elliptic_spectrum_dense(const SaddlePointSystem& sys, const SpdFactor& F, Index dense_limit = 4096);

/// Singular values of L^{-1} A Q (k of them are zero for exact triplets);
/// the effective condition skips the k smallest.
SpectrumReport deflated_spectrum_dense(const SaddlePointSystem& sys, const SpdFactor& F,
                                       const DeflationOperators& defl, Index dense_limit = 4096);

/// (values[0] / values[size - 1 - k])^2.
double effective_condition(std::span<const double> values, Index deflated_count);
double effective_condition(const Vector& values, Index deflated_count);

struct ErrorCoefficients {
  Vector z;
  std::vector<Index> above;  ///< indices with |z_i| > threshold
  double threshold = 1e-7;
};

/// z = U^T W (u_reference - u_initial).
ErrorCoefficients error_coefficients(const SaddlePointSystem& sys, const EllipticTriplets& t,
                                     const Vector& u_reference, const Vector& u_initial, double threshold = 1e-7);

/// u^(1) of CRAIG.
Vector craig_first_iterate(const SaddlePointSystem& sys, const SpdFactor& F);

/// Leading iterations before errors[i] < drop_factor * errors[0]; size() if never.
Index plateau_length(std::span<const double> errors, double drop_factor = 0.1);

/// First 1-based iteration with rel_errors[i] <= tol; 0 if never.
Index iterations_to(std::span<const double> rel_errors, double tol);

/// Fraction of consecutive residual pairs with r_{i+1} > (1 - min_reduction) r_i.
double redundant_fraction(std::span<const double> residuals, double min_reduction = 0.01);

/// Sparse LU on the assembled KKT matrix; reference for error histories.
ReferenceSolution direct_solve(const SaddlePointSystem& sys);

/// [[W, A], [A^T, 0]] as a sparse matrix.
SparseMatrix assemble_kkt(const SaddlePointSystem& sys);

}  // namespace gkd
