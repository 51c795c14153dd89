#include "gkd_cli/config.hpp"

#include "json.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace gkd::cli {

namespace {

using nlohmann::json;

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) fail(ErrorCode::InvalidSpec, "unknown key '" + key + "' in " + where);
  }
}

template <class T>
void take(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidSpec, std::string("bad value for '") + key + "': " + e.what());
  }
}

void read_problem(const json& j, ProblemConfig& p) {
  if (!j.is_object()) fail(ErrorCode::InvalidSpec, "'problem' must be an object");
  only_keys(j, {"type", "n", "dir", "label"}, "problem");
  std::string type = "channel";
  take(j, "type", type);
  if (type == "channel") {
    p.kind = ProblemKind::Channel;
  } else if (type == "files") {
    p.kind = ProblemKind::Files;
  } else {
    fail(ErrorCode::InvalidSpec, "problem.type must be 'channel' or 'files'");
  }
  take(j, "n", p.n);
  std::string dir;
  take(j, "dir", dir);
  if (!dir.empty()) p.dir = dir;
  take(j, "label", p.label);
}

void read_deflation(const json& j, DeflationConfig& d) {
  if (!j.is_object()) fail(ErrorCode::InvalidSpec, "'deflation' must be an object");
  only_keys(j, {"type", "k", "eta", "tol", "max_iter"}, "deflation");
  std::string type = to_string(d.kind);
  take(j, "type", type);
  d.kind = parse_deflation(type);
  take(j, "k", d.k);
  take(j, "eta", d.eta);
  take(j, "tol", d.tol);
  take(j, "max_iter", d.max_iter);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (problem.kind == ProblemKind::Channel && problem.n < 2) fail(ErrorCode::InvalidSpec, "channel length must be >= 2");
  if (problem.kind == ProblemKind::Files && problem.dir.empty()) fail(ErrorCode::InvalidSpec, "problem.dir is required");
  if (!(tol > 0.0)) fail(ErrorCode::InvalidSpec, "tol must be > 0");
  if (max_iter < 1) fail(ErrorCode::InvalidSpec, "max_iter must be >= 1");
  if (dense_limit < 1) fail(ErrorCode::InvalidSpec, "dense_limit must be >= 1");
  if (deflation.kind != DeflationKind::None) {
    if (deflation.k < 0) fail(ErrorCode::InvalidSpec, "deflation.k must be >= 0");
    if (!(deflation.tol > 0.0)) fail(ErrorCode::InvalidSpec, "deflation.tol must be > 0");
    if (deflation.max_iter < 1) fail(ErrorCode::InvalidSpec, "deflation.max_iter must be >= 1");
  }
  if (deflation.kind == DeflationKind::Esvd2 && deflation.eta < deflation.k + 2) {
    fail(ErrorCode::InvalidSpec, "deflation.eta must be >= k + 2");
  }
  if (deflation.kind == DeflationKind::Recycled && deflation.eta < 2 * deflation.k + 1) {
    fail(ErrorCode::InvalidSpec, "deflation.eta must be >= 2k + 1 for recycling");
  }
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::InvalidSpec, "config must be a JSON object");
  only_keys(j,
            {"problem", "solver", "deflation", "mode", "augmentation", "tol", "max_iter", "seed", "output_dir",
             "dense_limit"},
            "config");
  ExperimentConfig cfg;
  if (j.contains("problem")) read_problem(j["problem"], cfg.problem);
  if (j.contains("deflation")) read_deflation(j["deflation"], cfg.deflation);
  std::string s;
  if (j.contains("solver")) {
    take(j, "solver", s);
    cfg.solver = parse_solver(s);
  }
  if (j.contains("mode")) {
    take(j, "mode", s);
    if (s != "general" && s != "simplified") fail(ErrorCode::InvalidSpec, "mode must be 'general' or 'simplified'");
    cfg.simplified = s == "simplified";
  }
  if (j.contains("augmentation")) {
    take(j, "augmentation", s);
    if (s != "one_sided" && s != "two_sided") fail(ErrorCode::InvalidSpec, "augmentation must be 'one_sided' or 'two_sided'");
    cfg.one_sided = s == "one_sided";
  }
  take(j, "tol", cfg.tol);
  take(j, "max_iter", cfg.max_iter);
  take(j, "seed", cfg.seed);
  take(j, "dense_limit", cfg.dense_limit);
  std::string out;
  take(j, "output_dir", out);
  if (!out.empty()) cfg.output_dir = out;
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const ExperimentConfig& cfg) {
  json j;
  if (cfg.problem.kind == ProblemKind::Channel) {
    j["problem"] = {{"type", "channel"}, {"n", cfg.problem.n}};
  } else {
    j["problem"] = {{"type", "files"}, {"dir", cfg.problem.dir.string()}, {"label", cfg.problem.label}};
  }
  j["solver"] = to_string(cfg.solver);
  j["deflation"] = {{"type", to_string(cfg.deflation.kind)},
                    {"k", cfg.deflation.k},
                    {"eta", cfg.deflation.eta},
                    {"tol", cfg.deflation.tol},
                    {"max_iter", cfg.deflation.max_iter}};
  j["mode"] = cfg.simplified ? "simplified" : "general";
  j["augmentation"] = cfg.one_sided ? "one_sided" : "two_sided";
  j["tol"] = cfg.tol;
  j["max_iter"] = cfg.max_iter;
  j["seed"] = cfg.seed;
  j["dense_limit"] = cfg.dense_limit;
  if (!cfg.output_dir.empty()) j["output_dir"] = cfg.output_dir.string();
  return j.dump(2);
}

void apply_overrides(ExperimentConfig& cfg, const FlagOverrides& o) {
  if (o.problem_dir) {
    cfg.problem.kind = ProblemKind::Files;
    cfg.problem.dir = *o.problem_dir;
  }
  if (o.label) cfg.problem.label = *o.label;
  if (o.n) {
    cfg.problem.kind = ProblemKind::Channel;
    cfg.problem.n = *o.n;
  }
  if (o.solver) cfg.solver = parse_solver(*o.solver);
  if (o.deflation) cfg.deflation.kind = parse_deflation(*o.deflation);
  if (o.k) cfg.deflation.k = *o.k;
  if (o.eta) cfg.deflation.eta = *o.eta;
  if (o.esvd_tol) cfg.deflation.tol = *o.esvd_tol;
  if (o.esvd_iters) cfg.deflation.max_iter = *o.esvd_iters;
  if (o.mode) {
    if (*o.mode != "general" && *o.mode != "simplified") fail(ErrorCode::InvalidSpec, "mode must be general or simplified");
    cfg.simplified = *o.mode == "simplified";
  }
  if (o.augmentation) {
    if (*o.augmentation != "one_sided" && *o.augmentation != "two_sided")
      fail(ErrorCode::InvalidSpec, "augmentation must be one_sided or two_sided");
    cfg.one_sided = *o.augmentation == "one_sided";
  }
  if (o.tol) cfg.tol = *o.tol;
  if (o.max_iter) cfg.max_iter = *o.max_iter;
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.output_dir = *o.out;
  if (o.dense_limit) cfg.dense_limit = *o.dense_limit;
}

std::filesystem::path resolve_output_dir(const std::filesystem::path& explicit_dir) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (const char* env = std::getenv("GKD_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return "gkd_out";
}

std::string to_string(SolverKind s) { return s == SolverKind::Craig ? "craig" : "minres"; }

std::string to_string(DeflationKind d) {
  switch (d) {
    case DeflationKind::None: return "none";
    case DeflationKind::Exact: return "exact";
    case DeflationKind::Esvd2: return "esvd2";
    case DeflationKind::Recycled: return "recycled";
  }
  return "none";
}

SolverKind parse_solver(const std::string& s) {
  if (s == "craig") return SolverKind::Craig;
  if (s == "minres") return SolverKind::Minres;
  fail(ErrorCode::InvalidSpec, "solver must be 'craig' or 'minres', got '" + s + "'");
}

DeflationKind parse_deflation(const std::string& s) {
  if (s == "none") return DeflationKind::None;
  if (s == "exact") return DeflationKind::Exact;
  if (s == "esvd2") return DeflationKind::Esvd2;
  if (s == "recycled") return DeflationKind::Recycled;
  fail(ErrorCode::InvalidSpec, "deflation must be none, exact, esvd2 or recycled, got '" + s + "'");
}

}  // namespace gkd::cli
