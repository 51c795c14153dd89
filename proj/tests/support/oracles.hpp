#pragma once

// Dense reference computations used only by the tests. They go through
// Eigen's dense LLT, JacobiSVD and LU so they do not share code paths with
// the sparse library routines they check.

#include "gkd/deflation.hpp"
#include "gkd/problems.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace gkd::oracle {

Matrix dense(const SparseMatrix& M);
SparseMatrix sparse(const Matrix& M);

struct DenseEsvd {
  Matrix L;  ///< W = L L^T
  Matrix U;  ///< m x n, W-orthonormal
  Vector s;  ///< descending
  Matrix V;  ///< n x n
};

/// SVD of L^{-1} A through dense LLT and JacobiSVD.
DenseEsvd dense_esvd(const SaddlePointSystem& sys);

/// Triplets with the given column indices of the dense ESVD.
EllipticTriplets triplets_from(const DenseEsvd& e, const std::vector<Index>& idx);

struct DenseSolution {
  Vector u;
  Vector p;
};

/// Dense LU solve of the full KKT system.
DenseSolution kkt_solve(const SaddlePointSystem& sys);

/// Random SPD W (m x m), full-column-rank A (m x n), random g and r.
SaddlePointSystem random_system(Index m, Index n, std::uint64_t seed);

/// Columns f(e_j) for j < n_in.
Matrix assemble(Index n_in, const std::function<Vector(const Vector&)>& f);

/// Dense Schur complement A^T W^{-1} A.
Matrix schur(const SaddlePointSystem& sys);

/// Sorted eigenvalues of [[I, A~], [A~^T, 0]].
Vector monolithic_spectrum(const SaddlePointSystem& sys);

/// ||v - V V^T v||.
double subspace_distance(const Matrix& V, const Vector& v);

double rel_diff(const Vector& a, const Vector& b);

}  // namespace gkd::oracle
