#pragma once

#include "gkd/common.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace gkd::cli {

enum class ProblemKind { Channel, Files };
enum class SolverKind { Craig, Minres };
enum class DeflationKind { None, Exact, Esvd2, Recycled };

struct ProblemConfig {
  ProblemKind kind = ProblemKind::Channel;
  Index n = 128;
  std::filesystem::path dir;
  std::string label = "system";
};

struct DeflationConfig {
  DeflationKind kind = DeflationKind::None;
  Index k = 10;
  Index eta = 28;
  double tol = 1e-10;
  Index max_iter = 30;
};

/// One experiment. Every field has a default so that partial config files
/// and bare command lines both work.
struct ExperimentConfig {
  ProblemConfig problem;
  SolverKind solver = SolverKind::Craig;
  DeflationConfig deflation;
  bool simplified = false;
  bool one_sided = false;
  double tol = 1e-8;
  Index max_iter = 5000;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  /// Dense spectra and references are skipped above this many columns.
  Index dense_limit = 1024;

  /// Throws InvalidSpec.
  void validate() const;
};

/// Reads a JSON object; unknown keys are rejected. Throws ParseError on
/// malformed JSON and InvalidSpec on bad values.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& json_text);
std::string to_json(const ExperimentConfig& cfg);

/// Command-line values; set fields replace the corresponding config entries.
struct FlagOverrides {
  std::optional<Index> n;
  std::optional<std::string> problem_dir, label;
  std::optional<std::string> solver, deflation, mode, augmentation;
  std::optional<Index> k, eta, esvd_iters;
  std::optional<double> esvd_tol, tol;
  std::optional<Index> max_iter;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<Index> dense_limit;
};

void apply_overrides(ExperimentConfig& cfg, const FlagOverrides& o);

/// Explicit directory, else $GKD_OUTPUT_DIR, else ./gkd_out.
std::filesystem::path resolve_output_dir(const std::filesystem::path& explicit_dir);

std::string to_string(SolverKind s);
std::string to_string(DeflationKind d);
SolverKind parse_solver(const std::string& s);
DeflationKind parse_deflation(const std::string& s);

}  // namespace gkd::cli
