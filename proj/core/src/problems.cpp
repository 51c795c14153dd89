#include "gkd/problems.hpp"

#include "gkd/linops.hpp"
#include "gkd/matrix_market.hpp"

#include <Eigen/QR>

#include <vector>

namespace gkd {

void SaddlePointSystem::check_shapes() const {
  if (W.rows() != W.cols()) fail(ErrorCode::ShapeError, "W must be square");
  if (A.rows() != W.rows()) fail(ErrorCode::ShapeError, "A must have as many rows as W");
  if (A.cols() >= A.rows()) fail(ErrorCode::ShapeError, "A must have fewer columns than rows");
  if (g.size() != A.rows()) fail(ErrorCode::ShapeError, "g must have length m");
  if (r.size() != A.cols()) fail(ErrorCode::ShapeError, "r must have length n");
}

SaddlePointSystem build_1d_channel(const ChannelSpec& spec) {
  if (spec.length_n < 2) fail(ErrorCode::InvalidSpec, "channel needs at least 2 cells");
  const Index cells = spec.length_n;
  const Index nv = cells - 1;  // interior velocities per row of cells
  const Index m = 2 * nv;
  const auto top = [](Index i) { return i; };
  const auto bot = [nv](Index i) { return nv + i; };

  std::vector<Eigen::Triplet<double>> w;
  w.reserve(static_cast<std::size_t>(4 * m));
  for (Index i = 0; i < nv; ++i) {
    for (const Index row : {top(i), bot(i)}) {
      w.emplace_back(row, row, 4.0);
      if (i > 0) w.emplace_back(row, row - 1, -1.0);
      if (i + 1 < nv) w.emplace_back(row, row + 1, -1.0);
    }
    w.emplace_back(top(i), bot(i), -1.0);
    w.emplace_back(bot(i), top(i), -1.0);
  }

  // Constraint j (column j of A) is v_j - v_{j-1} summed over both rows. The
  // first column blends c_1 = +v_1 with c_n = -v_{n-1}.
  const double last_sign = spec.blend == ConstraintBlend::Difference ? 0.5 : -0.5;
  std::vector<Eigen::Triplet<double>> a;
  a.reserve(static_cast<std::size_t>(2 * m));
  for (int half = 0; half < 2; ++half) {
    const Index off = half == 0 ? 0 : nv;
    a.emplace_back(off, 0, 0.5);
    a.emplace_back(off + nv - 1, 0, last_sign);
    for (Index j = 1; j < nv; ++j) {
      a.emplace_back(off + j, j, 1.0);
      a.emplace_back(off + j - 1, j, -1.0);
    }
  }

  // Dirichlet data: v_0^t = inflow, v_0^b = 0, v_n^t = 0, v_n^b = outflow.
  const double v0t = spec.inflow_top, v0b = 0.0, vnt = 0.0, vnb = spec.outflow_bottom;

  SaddlePointSystem sys;
  sys.W.resize(m, m);
  sys.W.setFromTriplets(w.begin(), w.end());
  sys.W.makeCompressed();
  sys.A.resize(m, nv);
  sys.A.setFromTriplets(a.begin(), a.end());  // n = 2 sums both halves of the blend
  sys.A.prune(0.0);
  sys.A.makeCompressed();

  sys.g = Vector::Zero(m);
  sys.g(top(0)) += v0t;
  sys.g(bot(0)) += v0b;
  sys.g(top(nv - 1)) += vnt;
  sys.g(bot(nv - 1)) += vnb;

  sys.r = Vector::Zero(nv);
  // c_1 rhs: v_0^t + v_0^b; c_n rhs: -(v_n^t + v_n^b).
  const double rhs_first = v0t + v0b;
  const double rhs_last = -(vnt + vnb);
  if (spec.rhs_mode == RhsMode::PaperDisplay) {
    sys.r(0) = spec.inflow_top;
  } else if (spec.blend == ConstraintBlend::Difference) {
    sys.r(0) = 0.5 * rhs_first - 0.5 * rhs_last;
  } else {
    sys.r(0) = 0.5 * rhs_first + 0.5 * rhs_last;
  }
  sys.label = "channel" + std::to_string(cells);
  return sys;
}

bool has_full_column_rank(const SparseMatrix& A, Index max_cols) {
  if (A.cols() > max_cols) return true;
  if (A.cols() == 0) return true;
  Eigen::ColPivHouseholderQR<Matrix> qr{Matrix(A)};
  qr.setThreshold(1e-12);
  return qr.rank() == A.cols();
}

void verify_system(const SaddlePointSystem& sys) {
  sys.check_shapes();
  (void)SpdFactor::factorize(sys.W);
  if (!has_full_column_rank(sys.A)) fail(ErrorCode::ShapeError, "A does not have full column rank");
}

SystemPaths system_paths(const std::filesystem::path& directory, const std::string& label) {
  return {directory / (label + "_W.mtx"), directory / (label + "_A.mtx"), directory / (label + "_g.mtx"),
          directory / (label + "_r.mtx")};
}

SystemPaths save_system(const SaddlePointSystem& sys, const std::filesystem::path& directory) {
  sys.check_shapes();
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + directory.string() + ": " + ec.message());
  const std::string label = sys.label.empty() ? "system" : sys.label;
  const SystemPaths paths = system_paths(directory, label);
  mm::write_coordinate(paths.W, sys.W, /*symmetric=*/true);
  mm::write_coordinate(paths.A, sys.A, /*symmetric=*/false);
  mm::write_vector(paths.g, sys.g);
  mm::write_vector(paths.r, sys.r);
  return paths;
}

SaddlePointSystem load_system(const SystemPaths& paths, const std::string& label) {
  SaddlePointSystem sys;
  sys.W = mm::read_coordinate(paths.W);
  sys.A = mm::read_coordinate(paths.A);
  sys.g = mm::read_vector(paths.g);
  sys.r = mm::read_vector(paths.r);
  sys.label = label;
  sys.check_shapes();
  try {
    verify_system(sys);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotSymmetric || e.code() == ErrorCode::NotPositiveDefinite) {
      fail(e.code(), std::string("loaded W is not SPD (") + e.what() + ")");
    }
    throw;
  }
  return sys;
}

SaddlePointSystem load_system(const std::filesystem::path& directory, const std::string& label) {
  return load_system(system_paths(directory, label), label);
}

}  // namespace gkd
