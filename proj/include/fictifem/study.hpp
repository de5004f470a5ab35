#pragma once

#include "fictifem/estimator.hpp"

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fictifem {

/// One row of an adaptive study.
struct StudyRecord {
  int cycle = 0;
  int n1 = 0, n2 = 0, m = 0;
  double h_max1 = 0.0, h_max2 = 0.0;
  double eta1 = 0.0, eta2 = 0.0;
  std::optional<double> err_l2_u, err_h1_u, err_l2_u2, err_h1_u2, eff_index;
  int gmres_iters = 0;
  double wall_time = 0.0;

  // Diagnostics outside the CSV schema.
  double osc1 = 0.0, osc2 = 0.0;
  double constraint_defect = 0.0;  // max over immersed cells of |mean(u_h - u_2h)|
  double max_abs_u = 0.0;
  ResidualNorms residual;
  std::optional<double> lambda_diag;

  int total_dofs() const { return n1 + n2 + m; }
};

/// Column names in CSV order.
const std::vector<std::string>& csv_columns();
/// Header plus one line per record; absent values are empty fields.
void write_csv(std::ostream& os, const std::vector<StudyRecord>& records);
void write_csv(const std::string& path, const std::vector<StudyRecord>& records);

/// Least-squares slope of log(err) against log(N^{1/2}) over the last k entries.
/// Throws Error when fewer than 3 entries are given.
double eoc(const std::vector<double>& n_dofs, const std::vector<double>& errors, int k = 4);
/// eoc over records, using total DoFs and the selected quantity.
double eoc(const std::vector<StudyRecord>& records, const std::function<double(const StudyRecord&)>& select, int k = 4);

/// sqrt(sum over immersed cells away from the boundary of h_K^2 |K| (lambda_K - density)^2).
double lambda_diagnostic(const StateView& s, double density);

/// Largest |mean over K2 of (u_h - u_2h)| over the immersed cells.
double constraint_defect(const StateView& s);

/// Human-readable table of the records with rate estimates.
std::string format_summary(const std::string& title, const std::vector<StudyRecord>& records);

}  // namespace fictifem
