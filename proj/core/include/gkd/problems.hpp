#pragma once

#include "gkd/common.hpp"

#include <array>
#include <filesystem>
#include <string>

namespace gkd {

/// [[W, A], [A^T, 0]] [u; p] = [g; r] with W SPD (m x m) and A (m x n), n < m.
struct SaddlePointSystem {
  SparseMatrix W;
  SparseMatrix A;
  Vector g;
  Vector r;
  std::string label;

  Index m() const noexcept { return A.rows(); }
  Index n() const noexcept { return A.cols(); }

  /// Block sizes only; throws ShapeError.
  void check_shapes() const;
};

/// How the first constraint is combined with the dropped last one.
enum class ConstraintBlend {
  /// 0.5*c_1 - 0.5*c_n: full column rank, constraint rhs (1, 0, ..., 0).
  Difference,
  /// 0.5*c_1 + 0.5*c_n with the signs of the printed matrix; A is rank-deficient.
  Displayed,
};

enum class RhsMode {
  /// r assembled with the same blend as A.
  Consistent,
  /// r = (inflow_top, 0, ..., 0) regardless of the blend.
  PaperDisplay,
};

/// Two-cell-high channel of `length_n` cells, MAC velocities on the
/// horizontal mid-edges, inflow through the top-left edge and outflow through
/// the bottom-right edge.
struct ChannelSpec {
  Index length_n = 128;
  double inflow_top = 1.0;
  double outflow_bottom = 1.0;
  ConstraintBlend blend = ConstraintBlend::Difference;
  RhsMode rhs_mode = RhsMode::Consistent;
};

/// Unknowns ordered v_1^t..v_{n-1}^t, v_1^b..v_{n-1}^b; pressures p_1..p_{n-1}.
SaddlePointSystem build_1d_channel(const ChannelSpec& spec);

/// Dense rank test of A; refused (returns true) above `max_cols`.
bool has_full_column_rank(const SparseMatrix& A, Index max_cols = 1000);

/// Shape checks, W symmetry and SPD factorization, and full column rank of A
/// (dense, only when n <= 1000). Throws ShapeError / NotSymmetric /
/// NotPositiveDefinite.
void verify_system(const SaddlePointSystem& sys);

struct SystemPaths {
  std::filesystem::path W, A, g, r;
};

SystemPaths system_paths(const std::filesystem::path& directory, const std::string& label);

/// Writes `<label>_{W,A,g,r}.mtx`.
SystemPaths save_system(const SaddlePointSystem& sys, const std::filesystem::path& directory);

SaddlePointSystem load_system(const SystemPaths& paths, const std::string& label = "loaded");
/// Loads `<label>_{W,A,g,r}.mtx` from a directory.
SaddlePointSystem load_system(const std::filesystem::path& directory, const std::string& label);

}  // namespace gkd
