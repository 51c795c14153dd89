#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>
#include <string_view>

namespace gkd {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Failure categories shared by every module. Conditions that still produce a
/// usable result (max iterations, zero right-hand side) are reported through
/// status fields instead.
enum class ErrorCode {
  InvalidSpec,
  DimensionMismatch,
  NotSymmetric,
  NotPositiveDefinite,
  ParseError,
  ShapeError,
  IoError,
  Breakdown,
  NoConvergence,
  SingularTriplet,
  SizeExceeded,
  InsufficientTrace,
  IllConditionedCoarse,
  FactorizationFailed,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require_dim(Index got, Index expected, const char* what) {
  if (got != expected) {
    fail(ErrorCode::DimensionMismatch, std::string(what) + ": expected length " +
                                           std::to_string(expected) + ", got " +
                                           std::to_string(got));
  }
}

struct Tolerances {
  double factor_tol = 1e-12;
  double ortho_tol = 1e-10;
  double solve_tol = 1e-8;

  void validate() const;
};

}  // namespace gkd
