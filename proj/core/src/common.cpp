#include "gkd/common.hpp"

namespace gkd {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::Breakdown: return "Breakdown";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularTriplet: return "SingularTriplet";
    case ErrorCode::SizeExceeded: return "SizeExceeded";
    case ErrorCode::InsufficientTrace: return "InsufficientTrace";
    case ErrorCode::IllConditionedCoarse: return "IllConditionedCoarse";
    case ErrorCode::FactorizationFailed: return "FactorizationFailed";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

void Tolerances::validate() const {
  if (!(factor_tol > 0.0) || !(ortho_tol > 0.0) || !(solve_tol > 0.0)) {
    fail(ErrorCode::InvalidSpec, "tolerances must be strictly positive");
  }
}

}  // namespace gkd
