#include "gkd_cli/commands.hpp"

#include "gkd/analysis.hpp"
#include "gkd/deflation.hpp"
#include "gkd/minres.hpp"
#include "gkd/report_io.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gkd::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path prepare(const ExperimentConfig& cfg) {
  const fs::path dir = resolve_output_dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

std::string status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::ZeroRhs: return "zero_rhs";
    case SolveStatus::Breakdown: return "breakdown";
  }
  return "unknown";
}

bool solved(SolveStatus s) { return s == SolveStatus::Converged || s == SolveStatus::ZeroRhs; }

DeflationMode mode_of(const ExperimentConfig& cfg) {
  return cfg.simplified ? DeflationMode::Simplified : DeflationMode::General;
}

// Fixed-precision text for console summaries; files use format_value.
std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double last_finite(const std::vector<double>& v) {
  for (auto it = v.rbegin(); it != v.rend(); ++it)
    if (std::isfinite(*it)) return *it;
  return std::nan("");
}

void write_filtered_coefficients(const fs::path& path, const ErrorCoefficients& c, const Vector& sigma) {
  std::ofstream out(path);
  out << "index,sigma,z\n";
  for (Index i : c.above) {
    out << i + 1 << ',' << report::format_value(sigma(i)) << ',' << report::format_value(c.z(i)) << '\n';
  }
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

SolveReport run_craig(const SaddlePointSystem& sys, const SpdFactor& F, const ExperimentConfig& cfg,
                      const EllipticTriplets& t, const CraigOptions& opts) {
  if (t.k() == 0) return craig_solve(sys, F, opts);
  const auto defl = make_deflation(sys, t, mode_of(cfg));
  return deflated_solve(sys, F, defl, opts, cfg.one_sided ? Augmentation::OneSided : Augmentation::TwoSided);
}

MinresReport run_minres(const SaddlePointSystem& sys, const SpdFactor& F, const EllipticTriplets& t,
                        const MinresOptions& opts) {
  if (t.k() == 0) return minres_preconditioned(sys, F, opts);
  return minres_deflated(sys, F, saddle_eigvecs_from_triplets(sys, F, t).Y, opts);
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Breakdown:
    case ErrorCode::NoConvergence:
    case ErrorCode::SingularTriplet:
    case ErrorCode::InsufficientTrace:
    case ErrorCode::IllConditionedCoarse:
    case ErrorCode::FactorizationFailed:
      return kNumericalFailure;
    default:
      return kInvalidConfig;
  }
}

SaddlePointSystem make_problem(const ProblemConfig& p) {
  if (p.kind == ProblemKind::Files) {
    auto sys = load_system(p.dir, p.label);
    sys.label = p.label;
    return sys;
  }
  ChannelSpec spec;
  spec.length_n = p.n;
  auto sys = build_1d_channel(spec);
  sys.label = "channel" + std::to_string(p.n);
  return sys;
}

TripletSource compute_triplets(const SaddlePointSystem& sys, const SpdFactor& F, const ExperimentConfig& cfg) {
  TripletSource out;
  const auto& d = cfg.deflation;
  if (d.kind == DeflationKind::None || d.k == 0) {
    out.triplets.U = Matrix(sys.m(), 0);
    out.triplets.V = Matrix(sys.n(), 0);
    out.triplets.sigma = Vector(0);
    out.note = "no deflation";
    return out;
  }
  if (d.k > sys.n()) fail(ErrorCode::InvalidSpec, "deflation.k exceeds the number of constraints");
  switch (d.kind) {
    case DeflationKind::Exact:
      out.triplets = esvd_direct(sys, F, d.k, Target::Smallest);
      out.note = "exact";
      break;
    case DeflationKind::Esvd2: {
      EsvdOptions o;
      o.k = d.k;
      o.eta = d.eta;
      o.tol = d.tol;
      o.max_iter = d.max_iter;
      o.seed = cfg.seed;
      auto r = esvd_restarted(sys, F, o);
      out.triplets = std::move(r.triplets);
      out.converged = r.converged;
      out.note = "restarted, " + std::to_string(r.restarts) + " outer iterations" + (r.converged ? "" : ", not converged");
      break;
    }
    case DeflationKind::Recycled: {
      RitzRecycler rec(sys.A, d.k, Target::Smallest, d.eta);
      CraigOptions o;
      o.tol = cfg.tol;
      o.max_iter = cfg.max_iter;
      o.observer = &rec;
      craig_solve(sys, F, o);
      auto r = rec.finish();
      out.triplets = std::move(r.triplets);
      out.converged = !r.insufficient;
      out.note = "recycled from " + std::to_string(r.windows) + " windows";
      break;
    }
    case DeflationKind::None:
      break;
  }
  return out;
}

CommandResult cmd_generate(Index n, const fs::path& out_dir) {
  ChannelSpec spec;
  spec.length_n = n;
  auto sys = build_1d_channel(spec);
  sys.label = "channel" + std::to_string(n);
  const fs::path dir = resolve_output_dir(out_dir);
  const auto paths = save_system(sys, dir);
  CommandResult res;
  res.files = {paths.W, paths.A, paths.g, paths.r};
  res.message = "wrote " + sys.label + " (m=" + std::to_string(sys.m()) + ", n=" + std::to_string(sys.n()) + ") to " +
                dir.string();
  return res;
}

CommandResult cmd_solve(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path dir = prepare(cfg);
  const auto sys = make_problem(cfg.problem);
  const auto F = SpdFactor::factorize(sys.W);
  const auto ref = direct_solve(sys);
  CommandResult res;
  write_text(dir / "config.json", to_json(cfg) + "\n");
  res.files.push_back(dir / "config.json");

  const auto src = compute_triplets(sys, F, cfg);
  if (src.triplets.k() > 0) {
    report::save_triplets(dir / "triplets", src.triplets);
    report::write_residuals_csv(dir / "residuals.csv", src.triplets, triplet_residuals(sys, F, src.triplets));
    res.files.push_back(dir / "residuals.csv");
  }

  json summary;
  summary["problem"] = sys.label;
  summary["m"] = sys.m();
  summary["n"] = sys.n();
  summary["deflated"] = src.triplets.k();
  summary["triplets"] = src.note;
  bool ok = true;
  std::ostringstream msg;
  if (cfg.solver == SolverKind::Craig) {
    CraigOptions o;
    o.tol = cfg.tol;
    o.max_iter = cfg.max_iter;
    o.reference = ref;
    const auto rep = run_craig(sys, F, cfg, src.triplets, o);
    report::write_solve_csv(dir / "solve.csv", rep);
    report::write_gnuplot_script(dir / "solve.gp", {{"solve.csv", 1, 5, "error"}, {"solve.csv", 1, 4, "estimate"}},
                                 "energy error of u", true);
    res.files.push_back(dir / "solve.csv");
    const auto errs = rep.true_errors();
    std::vector<double> rel;
    for (const auto& h : rep.history) rel.push_back(h.rel_error);
    summary["solver"] = "craig";
    summary["iterations"] = rep.iterations;
    summary["status"] = status_name(rep.status);
    summary["plateau_length"] = plateau_length(errs);
    summary["final_rel_error"] = last_finite(rel);
    ok = solved(rep.status);
    msg << "craig: " << rep.iterations << " iterations, " << status_name(rep.status) << ", plateau "
        << plateau_length(errs) << ", final relative error " << sci(last_finite(rel));
  } else {
    MinresOptions o;
    o.tol = cfg.tol;
    o.max_iter = cfg.max_iter;
    o.reference = ref;
    const auto rep = run_minres(sys, F, src.triplets, o);
    report::write_minres_csv(dir / "minres.csv", rep);
    report::write_gnuplot_script(dir / "minres.gp", {{"minres.csv", 1, 2, "residual"}}, "residual", true);
    res.files.push_back(dir / "minres.csv");
    summary["solver"] = "minres";
    summary["iterations"] = rep.iterations;
    summary["status"] = rep.converged ? "converged" : "max_iterations";
    summary["redundant_fraction"] = redundant_fraction(rep.resid_precond);
    summary["final_rel_error"] = last_finite(rep.rel_error);
    ok = rep.converged;
    msg << "minres: " << rep.iterations << " iterations, " << (rep.converged ? "converged" : "max_iterations")
        << ", redundant fraction " << redundant_fraction(rep.resid_precond);
  }

  if (sys.n() <= cfg.dense_limit) {
    const auto spec = src.triplets.k() > 0
                          ? deflated_spectrum_dense(sys, F, make_deflation(sys, src.triplets, mode_of(cfg)))
                          : elliptic_spectrum_dense(sys, F);
    report::write_spectrum_csv(dir / "spectrum.csv", spec);
    res.files.push_back(dir / "spectrum.csv");
    summary["effective_condition"] = spec.effective_condition;
  }
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  res.files.push_back(dir / "summary.json");
  res.exit_code = ok ? kOk : kNumericalFailure;
  res.message = msg.str();
  return res;
}

CommandResult cmd_compare(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path dir = prepare(cfg);
  const auto sys = make_problem(cfg.problem);
  const auto F = SpdFactor::factorize(sys.W);
  const auto ref = direct_solve(sys);
  const auto src = compute_triplets(sys, F, cfg);

  std::vector<EllipticTriplets> cases{src.triplets.slice(0, 0)};
  if (src.triplets.k() > 0) cases.push_back(src.triplets);

  CommandResult res;
  std::ofstream out(dir / "compare.csv");
  out << "k,craig_iterations,minres_iterations,ratio\n";
  std::ostringstream msg;
  msg << "     k   craig  minres  ratio\n";
  bool ok = true;
  for (const auto& t : cases) {
    CraigOptions co;
    co.stop_rule = StopRule::Reference;
    co.reference = ref;
    co.tol = cfg.tol;
    co.max_iter = cfg.max_iter;
    const auto c = run_craig(sys, F, cfg, t, co);
    MinresOptions mo;
    mo.stop = MinresStop::Reference;
    mo.reference = ref;
    mo.tol = cfg.tol;
    mo.max_iter = 2 * cfg.max_iter;
    const auto m = run_minres(sys, F, t, mo);
    ok = ok && solved(c.status) && m.converged;
    const double ratio = c.iterations > 0 ? double(m.iterations) / double(c.iterations) : std::nan("");
    out << t.k() << ',' << c.iterations << ',' << m.iterations << ',' << report::format_value(ratio) << '\n';
    char line[96];
    std::snprintf(line, sizeof line, "%6ld %7ld %7ld %6.3f\n", long(t.k()), long(c.iterations), long(m.iterations), ratio);
    msg << line;
  }
  if (!out) fail(ErrorCode::IoError, "write failed: " + (dir / "compare.csv").string());
  res.files.push_back(dir / "compare.csv");
  res.exit_code = ok ? kOk : kNumericalFailure;
  res.message = msg.str();
  return res;
}

CommandResult cmd_coeffs(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path dir = prepare(cfg);
  const auto sys = make_problem(cfg.problem);
  const auto F = SpdFactor::factorize(sys.W);
  const auto all = esvd_direct(sys, F, sys.n(), Target::Largest);
  const auto ref = direct_solve(sys);
  const auto c = error_coefficients(sys, all, ref.u, craig_first_iterate(sys, F));
  report::write_coefficients_csv(dir / "coeffs.csv", c, all.sigma);
  write_filtered_coefficients(dir / "coeffs_filtered.csv", c, all.sigma);
  CommandResult res;
  res.files = {dir / "coeffs.csv", dir / "coeffs_filtered.csv"};
  res.message = std::to_string(c.above.size()) + " of " + std::to_string(c.z.size()) + " coefficients above " +
                sci(c.threshold);
  return res;
}

CommandResult cmd_esvd(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.deflation.kind == DeflationKind::None) fail(ErrorCode::InvalidSpec, "esvd needs a deflation type other than none");
  const fs::path dir = prepare(cfg);
  const auto sys = make_problem(cfg.problem);
  const auto F = SpdFactor::factorize(sys.W);
  const auto src = compute_triplets(sys, F, cfg);
  CommandResult res;
  report::save_triplets(dir / "triplets", src.triplets);
  const auto r = triplet_residuals(sys, F, src.triplets);
  report::write_residuals_csv(dir / "residuals.csv", src.triplets, r);
  res.files = {dir / "triplets" / "U.mtx", dir / "triplets" / "sigma.mtx", dir / "triplets" / "V.mtx",
               dir / "residuals.csv"};
  res.exit_code = src.converged ? kOk : kNumericalFailure;
  res.message = std::to_string(src.triplets.k()) + " triplets (" + src.note + "), max residual " +
                sci(std::max(r.max_scalar(), r.max_vector()));
  return res;
}

CommandResult cmd_spectrum(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path dir = prepare(cfg);
  const auto sys = make_problem(cfg.problem);
  const auto F = SpdFactor::factorize(sys.W);
  if (sys.n() > cfg.dense_limit) fail(ErrorCode::SizeExceeded, "problem exceeds dense_limit for spectra");
  CommandResult res;
  const auto schur = schur_spectrum_dense(sys, F);
  report::write_spectrum_csv(dir / "schur.csv", schur);
  const auto ell = elliptic_spectrum_dense(sys, F);
  report::write_spectrum_csv(dir / "elliptic.csv", ell);
  res.files = {dir / "schur.csv", dir / "elliptic.csv"};
  std::ostringstream msg;
  msg << "effective condition " << sci(schur.effective_condition);
  const auto src = compute_triplets(sys, F, cfg);
  if (src.triplets.k() > 0) {
    const auto d = deflated_spectrum_dense(sys, F, make_deflation(sys, src.triplets, mode_of(cfg)));
    report::write_spectrum_csv(dir / "deflated.csv", d);
    res.files.push_back(dir / "deflated.csv");
    msg << ", after deflating " << src.triplets.k() << ": " << sci(d.effective_condition);
  }
  res.message = msg.str();
  return res;
}

}  // namespace gkd::cli
