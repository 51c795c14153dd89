#include "gkd/report_io.hpp"

#include "gkd/matrix_market.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace gkd::report {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot open for writing: " + path.string());
  return out;
}

void close_checked(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace

std::string format_value(double v) {
  if (std::isnan(v)) return {};
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_solve_csv(const std::filesystem::path& path, const SolveReport& rep) {
  auto out = open_out(path);
  out << "iter,alpha,beta,err_estimate,err_true\n";
  for (const auto& r : rep.history) {
    out << r.iter << ',' << format_value(r.alpha) << ',' << format_value(r.beta) << ','
        << format_value(r.err_estimate) << ',' << format_value(r.err_true) << '\n';
  }
  close_checked(out, path);
}

void write_minres_csv(const std::filesystem::path& path, const MinresReport& rep) {
  auto out = open_out(path);
  out << "iter,resid_precond,err_true\n";
  for (std::size_t i = 0; i < rep.resid_precond.size(); ++i) {
    const double e = i < rep.err_true.size() ? rep.err_true[i] : std::nan("");
    out << i + 1 << ',' << format_value(rep.resid_precond[i]) << ',' << format_value(e) << '\n';
  }
  close_checked(out, path);
}

void write_spectrum_csv(const std::filesystem::path& path, const SpectrumReport& rep) {
  auto out = open_out(path);
  out << "index,value\n";
  for (Index i = 0; i < rep.values.size(); ++i) out << i + 1 << ',' << format_value(rep.values(i)) << '\n';
  close_checked(out, path);
}

void write_coefficients_csv(const std::filesystem::path& path, const ErrorCoefficients& c, const Vector& sigma) {
  auto out = open_out(path);
  out << "index,sigma,z,abs_z,above_threshold\n";
  for (Index i = 0; i < c.z.size(); ++i) {
    const double s = i < sigma.size() ? sigma(i) : std::nan("");
    out << i + 1 << ',' << format_value(s) << ',' << format_value(c.z(i)) << ',' << format_value(std::abs(c.z(i)))
        << ',' << (std::abs(c.z(i)) > c.threshold ? 1 : 0) << '\n';
  }
  close_checked(out, path);
}

void write_residuals_csv(const std::filesystem::path& path, const EllipticTriplets& t, const TripletResiduals& r) {
  auto out = open_out(path);
  out << "index,sigma,scalar,vector_residual\n";
  for (Index i = 0; i < t.k(); ++i) {
    const double sc = i < r.scalar.size() ? r.scalar(i) : std::nan("");
    const double vr = i < r.vector_residual.size() ? r.vector_residual(i) : std::nan("");
    out << i + 1 << ',' << format_value(t.sigma(i)) << ',' << format_value(sc) << ',' << format_value(vr) << '\n';
  }
  close_checked(out, path);
}

void save_triplets(const std::filesystem::path& directory, const EllipticTriplets& t) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  mm::write_array(directory / "U.mtx", t.U);
  mm::write_vector(directory / "sigma.mtx", t.sigma);
  mm::write_array(directory / "V.mtx", t.V);
}

EllipticTriplets load_triplets(const std::filesystem::path& directory) {
  EllipticTriplets t;
  t.U = mm::read_array(directory / "U.mtx");
  t.sigma = mm::read_vector(directory / "sigma.mtx");
  t.V = mm::read_array(directory / "V.mtx");
  if (t.U.cols() != t.k() || t.V.cols() != t.k()) fail(ErrorCode::ShapeError, "triplet files disagree on k");
  t.exact = false;
  return t;
}

void write_gnuplot_script(const std::filesystem::path& path, const std::vector<PlotSeries>& series,
                          const std::string& ylabel, bool log_y) {
  auto out = open_out(path);
  out << "set datafile separator ','\n";
  out << "set key autotitle columnhead\n";
  out << "set xlabel 'iteration'\n";
  out << "set ylabel '" << ylabel << "'\n";
  if (log_y) out << "set logscale y\n";
  out << "plot ";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    if (i > 0) out << ", \\\n     ";
    out << "'" << s.csv.generic_string() << "' using " << s.x_column << ':' << s.y_column << " with lines";
    if (!s.title.empty()) out << " title '" << s.title << "'";
  }
  out << '\n';
  close_checked(out, path);
}

}  // namespace gkd::report
