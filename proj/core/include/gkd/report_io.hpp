#pragma once

#include "gkd/analysis.hpp"
#include "gkd/deflation.hpp"
#include "gkd/esvd.hpp"
#include "gkd/minres.hpp"
#include "gkd/solver.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace gkd::report {

/// iter,alpha,beta,err_estimate,err_true. Unknown values are left blank.
void write_solve_csv(const std::filesystem::path& path, const SolveReport& rep);
/// iter,resid_precond,err_true.
void write_minres_csv(const std::filesystem::path& path, const MinresReport& rep);
/// index,value.
void write_spectrum_csv(const std::filesystem::path& path, const SpectrumReport& rep);
/// index,sigma,z,abs_z,above_threshold. sigma may be empty.
void write_coefficients_csv(const std::filesystem::path& path, const ErrorCoefficients& c, const Vector& sigma);
/// index,sigma,scalar,vector_residual.
void write_residuals_csv(const std::filesystem::path& path, const EllipticTriplets& t, const TripletResiduals& r);

/// U.mtx, sigma.mtx, V.mtx in `directory`.
void save_triplets(const std::filesystem::path& directory, const EllipticTriplets& t);
EllipticTriplets load_triplets(const std::filesystem::path& directory);

struct PlotSeries {
  std::filesystem::path csv;
  int x_column = 1;
  int y_column = 2;
  std::string title;
};

/// Minimal gnuplot script plotting the given CSV columns.
void write_gnuplot_script(const std::filesystem::path& path, const std::vector<PlotSeries>& series,
                          const std::string& ylabel, bool log_y);

/// "%.17g", or "" for NaN.
std::string format_value(double v);

}  // namespace gkd::report
