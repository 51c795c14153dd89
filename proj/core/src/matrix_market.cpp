#include "gkd/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace gkd::mm {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// 17 significant digits round-trip doubles exactly.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot open for writing: " + path.string());
  return out;
}

struct Header {
  std::string format;    // coordinate | array
  std::string field;     // real | integer | pattern
  std::string symmetry;  // general | symmetric
};

Header read_header(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::ParseError, "empty file: " + path.string());
  std::istringstream hs(line);
  std::string banner, object;
  Header h;
  hs >> banner >> object >> h.format >> h.field >> h.symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix") {
    fail(ErrorCode::ParseError, "missing MatrixMarket banner: " + path.string());
  }
  h.format = lower(h.format);
  h.field = lower(h.field);
  h.symmetry = lower(h.symmetry);
  if (h.format != "coordinate" && h.format != "array") {
    fail(ErrorCode::ParseError, "unsupported format '" + h.format + "': " + path.string());
  }
  if (h.field != "real" && h.field != "integer" && h.field != "double") {
    fail(ErrorCode::ParseError, "unsupported field '" + h.field + "': " + path.string());
  }
  if (h.symmetry != "general" && h.symmetry != "symmetric") {
    fail(ErrorCode::ParseError, "unsupported symmetry '" + h.symmetry + "': " + path.string());
  }
  return h;
}

// Next non-comment, non-blank line.
bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    return true;
  }
  return false;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open for reading: " + path.string());
  return in;
}

}  // namespace

void write_coordinate(const std::filesystem::path& path, const SparseMatrix& M, bool symmetric) {
  std::vector<Eigen::Triplet<double>> entries;
  for (int k = 0; k < M.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(M, k); it; ++it) {
      if (symmetric && it.row() < it.col()) continue;
      entries.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  auto out = open_out(path);
  out << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << '\n';
  out << M.rows() << ' ' << M.cols() << ' ' << entries.size() << '\n';
  for (const auto& e : entries) {
    out << e.row() + 1 << ' ' << e.col() + 1 << ' ' << fmt(e.value()) << '\n';
  }
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

SparseMatrix read_coordinate(const std::filesystem::path& path) {
  auto in = open_in(path);
  const Header h = read_header(in, path);
  if (h.format != "coordinate") fail(ErrorCode::ParseError, "expected coordinate format: " + path.string());

  std::string line;
  if (!next_data_line(in, line)) fail(ErrorCode::ParseError, "missing size line: " + path.string());
  long rows = 0, cols = 0, nnz = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) {
      fail(ErrorCode::ParseError, "bad size line: " + path.string());
    }
  }
  const bool symmetric = h.symmetry == "symmetric";
  if (symmetric && rows != cols) fail(ErrorCode::ShapeError, "symmetric matrix must be square: " + path.string());

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
  for (long e = 0; e < nnz; ++e) {
    if (!next_data_line(in, line)) fail(ErrorCode::ParseError, "truncated entry list: " + path.string());
    std::istringstream ss(line);
    long i = 0, j = 0;
    double v = 0.0;
    if (!(ss >> i >> j >> v)) fail(ErrorCode::ParseError, "malformed entry '" + line + "': " + path.string());
    if (i < 1 || i > rows || j < 1 || j > cols) {
      fail(ErrorCode::ParseError, "index out of range in '" + line + "': " + path.string());
    }
    entries.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
    if (symmetric && i != j) entries.emplace_back(static_cast<int>(j - 1), static_cast<int>(i - 1), v);
  }

  SparseMatrix M(rows, cols);
  bool duplicate = false;
  M.setFromTriplets(entries.begin(), entries.end(), [&duplicate](double a, double b) {
    duplicate = true;
    return a + b;
  });
  if (duplicate) fail(ErrorCode::ParseError, "duplicate (row, col) entries: " + path.string());
  M.makeCompressed();
  return M;
}

void write_array(const std::filesystem::path& path, const Matrix& M) {
  auto out = open_out(path);
  out << "%%MatrixMarket matrix array real general\n";
  out << M.rows() << ' ' << M.cols() << '\n';
  for (Index j = 0; j < M.cols(); ++j) {
    for (Index i = 0; i < M.rows(); ++i) out << fmt(M(i, j)) << '\n';
  }
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

Matrix read_array(const std::filesystem::path& path) {
  auto in = open_in(path);
  const Header h = read_header(in, path);
  if (h.format != "array") fail(ErrorCode::ParseError, "expected array format: " + path.string());
  if (h.symmetry != "general") fail(ErrorCode::ParseError, "only general arrays are supported: " + path.string());

  std::string line;
  if (!next_data_line(in, line)) fail(ErrorCode::ParseError, "missing size line: " + path.string());
  long rows = 0, cols = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> rows >> cols) || rows < 0 || cols < 0) fail(ErrorCode::ParseError, "bad size line: " + path.string());
  }
  Matrix M(rows, cols);
  for (long j = 0; j < cols; ++j) {
    for (long i = 0; i < rows; ++i) {
      if (!next_data_line(in, line)) fail(ErrorCode::ParseError, "truncated array: " + path.string());
      std::istringstream ss(line);
      double v = 0.0;
      if (!(ss >> v)) fail(ErrorCode::ParseError, "malformed value '" + line + "': " + path.string());
      M(i, j) = v;
    }
  }
  if (next_data_line(in, line)) fail(ErrorCode::ParseError, "trailing data: " + path.string());
  return M;
}

void write_vector(const std::filesystem::path& path, const Vector& v) { write_array(path, Matrix(v)); }

Vector read_vector(const std::filesystem::path& path) {
  const Matrix M = read_array(path);
  if (M.cols() != 1) fail(ErrorCode::ShapeError, "expected a single column: " + path.string());
  return M.col(0);
}

}  // namespace gkd::mm
