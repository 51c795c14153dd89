#include "gkd_cli/commands.hpp"
#include "gkd_cli/config.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <functional>
#include <iostream>

using namespace gkd;
using namespace gkd::cli;

namespace {

void add_experiment_flags(CLI::App* sub, std::string& config, FlagOverrides& o) {
  sub->add_option("-c,--config", config, "JSON experiment file; flags override it")->check(CLI::ExistingFile);
  sub->add_option("-n,--length", o.n, "channel length");
  sub->add_option("--problem-dir", o.problem_dir, "load <label>_{W,A,g,r}.mtx from this directory");
  sub->add_option("--label", o.label, "file label for --problem-dir");
  sub->add_option("--solver", o.solver, "craig or minres");
  sub->add_option("--deflation", o.deflation, "none, exact, esvd2 or recycled");
  sub->add_option("-k", o.k, "number of deflated triplets");
  sub->add_option("--eta", o.eta, "search subspace / window size");
  sub->add_option("--esvd-tol", o.esvd_tol, "restarted solver tolerance");
  sub->add_option("--esvd-iters", o.esvd_iters, "restarted solver outer iterations");
  sub->add_option("--mode", o.mode, "general or simplified");
  sub->add_option("--augmentation", o.augmentation, "two_sided or one_sided");
  sub->add_option("--tol", o.tol, "solver tolerance");
  sub->add_option("--max-iter", o.max_iter, "solver iteration limit");
  sub->add_option("--seed", o.seed, "seed for random start vectors");
  sub->add_option("-o,--out", o.out, "output directory (default $GKD_OUTPUT_DIR or ./gkd_out)");
  sub->add_option("--dense-limit", o.dense_limit, "largest n for dense spectra");
}

int report(const CommandResult& r) {
  if (!r.message.empty()) std::cout << r.message << (r.message.back() == '\n' ? "" : "\n");
  for (const auto& f : r.files) std::cout << "  " << f.string() << '\n';
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deflated generalized Golub-Kahan solvers for saddle-point systems"};
  app.require_subcommand(1);

  Index gen_n = 128;
  std::string gen_out;
  auto* gen = app.add_subcommand("generate", "write a channel system as MatrixMarket files");
  gen->add_option("-n,--length", gen_n, "channel length")->required();
  gen->add_option("-o,--out", gen_out, "output directory");

  std::string config;
  FlagOverrides o;
  std::function<CommandResult(const ExperimentConfig&)> action;
  auto experiment = [&](const char* name, const char* help, CommandResult (*fn)(const ExperimentConfig&)) {
    auto* sub = app.add_subcommand(name, help);
    add_experiment_flags(sub, config, o);
    sub->callback([&action, fn] { action = fn; });
  };
  experiment("solve", "run CRAIG or MINRES, optionally deflated", cmd_solve);
  experiment("compare", "CRAIG vs MINRES iterations at matched accuracy", cmd_compare);
  experiment("coeffs", "initial error in the elliptic singular basis", cmd_coeffs);
  experiment("esvd", "compute approximate or exact elliptic singular triplets", cmd_esvd);
  experiment("spectrum", "dense Schur, elliptic and deflated spectra", cmd_spectrum);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalidConfig;
  }

  try {
    if (gen->parsed()) {
      if (gen_n < 2) fail(ErrorCode::InvalidSpec, "channel length must be >= 2");
      return report(cmd_generate(gen_n, gen_out));
    }
    ExperimentConfig cfg = config.empty() ? ExperimentConfig{} : load_config(config);
    apply_overrides(cfg, o);
    return report(action(cfg));
  } catch (const Error& e) {
    std::cerr << "gkd: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "gkd: " << e.what() << '\n';
    return kNumericalFailure;
  }
}
