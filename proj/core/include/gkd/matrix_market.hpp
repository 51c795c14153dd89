#pragma once

#include "gkd/common.hpp"

#include <filesystem>

namespace gkd::mm {

/// Coordinate format. With `symmetric` only the lower triangle is written and
/// the header carries the `symmetric` qualifier.
void write_coordinate(const std::filesystem::path& path, const SparseMatrix& M, bool symmetric);
SparseMatrix read_coordinate(const std::filesystem::path& path);

/// Dense array format, column-major, used for vectors and thin column sets.
void write_array(const std::filesystem::path& path, const Matrix& M);
Matrix read_array(const std::filesystem::path& path);

void write_vector(const std::filesystem::path& path, const Vector& v);
Vector read_vector(const std::filesystem::path& path);

}  // namespace gkd::mm
