#pragma once

#include "gkd/esvd.hpp"
#include "gkd/problems.hpp"
#include "gkd_cli/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace gkd::cli {

enum ExitCode : int { kOk = 0, kInvalidConfig = 2, kNumericalFailure = 3 };

/// Maps library error categories to process exit codes.
int exit_code_for(ErrorCode code);

struct CommandResult {
  int exit_code = kOk;
  std::vector<std::filesystem::path> files;
  std::string message;
};

SaddlePointSystem make_problem(const ProblemConfig& p);

/// Triplets requested by the deflation config (empty for None).
struct TripletSource {
  EllipticTriplets triplets;
  bool converged = true;
  std::string note;
};
TripletSource compute_triplets(const SaddlePointSystem& sys, const SpdFactor& F, const ExperimentConfig& cfg);

CommandResult cmd_generate(Index n, const std::filesystem::path& out_dir);
CommandResult cmd_solve(const ExperimentConfig& cfg);
CommandResult cmd_compare(const ExperimentConfig& cfg);
CommandResult cmd_coeffs(const ExperimentConfig& cfg);
CommandResult cmd_esvd(const ExperimentConfig& cfg);
CommandResult cmd_spectrum(const ExperimentConfig& cfg);

}  // namespace gkd::cli
