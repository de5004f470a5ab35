#include "fictifem/study.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace fictifem {

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "cycle", "n1", "n2", "m", "h_max1", "h_max2", "eta1", "eta2", "err_l2_u", "err_h1_u",
      "err_l2_u2", "err_h1_u2", "eff_index", "gmres_iters", "wall_time"};
  return cols;
}

void write_csv(std::ostream& os, const std::vector<StudyRecord>& records) {
  for (std::size_t i = 0; i < csv_columns().size(); ++i) os << (i ? "," : "") << csv_columns()[i];
  os << '\n';
  auto opt = [&](const std::optional<double>& v) {
    os << ',';
    if (v) os << *v;
  };
  os << std::setprecision(12);
  for (const auto& r : records) {
    os << r.cycle << ',' << r.n1 << ',' << r.n2 << ',' << r.m << ',' << r.h_max1 << ',' << r.h_max2 << ','
       << r.eta1 << ',' << r.eta2;
    opt(r.err_l2_u);
    opt(r.err_h1_u);
    opt(r.err_l2_u2);
    opt(r.err_h1_u2);
    opt(r.eff_index);
    os << ',' << r.gmres_iters << ',' << r.wall_time << '\n';
  }
}

void write_csv(const std::string& path, const std::vector<StudyRecord>& records) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_csv(out, records);
}

double eoc(const std::vector<double>& n_dofs, const std::vector<double>& errors, int k) {
  if (n_dofs.size() != errors.size()) throw Error("eoc: size mismatch");
  if (n_dofs.size() < 3) throw Error("eoc: at least 3 records are required");
  if (k < 2) throw Error("eoc: k must be at least 2");
  const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(k), n_dofs.size());
  const std::size_t start = n_dofs.size() - count;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = start; i < n_dofs.size(); ++i) {
    const double x = 0.5 * std::log(n_dofs[i]);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(count);
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw Error("eoc: DoF counts do not vary");
  return (n * sxy - sx * sy) / denom;
}

double eoc(const std::vector<StudyRecord>& records, const std::function<double(const StudyRecord&)>& select, int k) {
  std::vector<double> n, e;
  for (const auto& r : records) {
    n.push_back(r.total_dofs());
    e.push_back(select(r));
  }
  return eoc(n, e, k);
}

double lambda_diagnostic(const StateView& s, double density) {
  const auto& forest = s.disc.forest2;
  std::set<int> boundary_vertices;
  for (int c : forest.active_cells()) {
    const Cell& cell = forest.cell(c);
    for (int k = 0; k < 4; ++k) {
      if (cell.on_boundary[k]) {
        boundary_vertices.insert(cell.vertex_ids[k]);
        boundary_vertices.insert(cell.vertex_ids[(k + 1) % 4]);
      }
    }
  }
  double sum = 0.0;
  for (int c : forest.active_cells()) {
    const Cell& cell = forest.cell(c);
    bool touches = false;
    for (int v : cell.vertex_ids) touches = touches || boundary_vertices.contains(v);
    if (touches) continue;
    const double d = s.solution.lambda[s.disc.layout_lambda.dofs(c)[0]] - density;
    sum += cell.diameter * cell.diameter * forest.cell_area(c) * d * d;
  }
  return std::sqrt(sum);
}

double constraint_defect(const StateView& s) {
  const auto& d = s.disc;
  double worst = 0.0;
  for (int c2 : d.forest2.active_cells()) {
    double diff = 0.0, area = 0.0;
    for (const CouplingPoint& p : coupling_quadrature(d.cache, c2)) {
      const double a = eval_at(d.forest1, d.layout1, s.solution.u, p.cell1, p.ref1).value;
      const double b = eval_at(d.forest2, d.layout2, s.solution.u2, c2, p.ref2).value;
      diff += (a - b) * p.JxW;
      area += p.JxW;
    }
    worst = std::max(worst, std::abs(diff / area));
  }
  return worst;
}

std::string format_summary(const std::string& title, const std::vector<StudyRecord>& records) {
  std::ostringstream os;
  os << title << '\n';
  os << std::setw(5) << "cycle" << std::setw(9) << "N" << std::setw(12) << "eta1+eta2" << std::setw(12) << "|e|_1"
     << std::setw(12) << "||e2||_1" << std::setw(12) << "||e||_0" << std::setw(10) << "eff" << std::setw(9)
     << "time[s]" << '\n';
  os << std::scientific << std::setprecision(3);
  for (const auto& r : records) {
    os << std::setw(5) << r.cycle << std::setw(9) << r.total_dofs() << std::setw(12) << r.eta1 + r.eta2;
    auto col = [&](const std::optional<double>& v, int w) {
      if (v) os << std::setw(w) << *v; else os << std::setw(w) << "-";
    };
    col(r.err_h1_u, 12);
    col(r.err_h1_u2, 12);
    col(r.err_l2_u, 12);
    os << std::fixed << std::setprecision(3);
    col(r.eff_index, 10);
    os << std::setw(9) << r.wall_time << std::scientific << '\n';
  }
  if (records.size() >= 3) {
    os << std::fixed << std::setprecision(3);
    os << "rate (final " << std::min<std::size_t>(4, records.size()) << " cycles, slope vs N^{1/2}):";
    os << " eta " << eoc(records, [](const StudyRecord& r) { return r.eta1 + r.eta2; });
    if (records.back().err_h1_u) {
      os << ", H1 " << eoc(records, [](const StudyRecord& r) { return *r.err_h1_u + *r.err_h1_u2; });
      os << ", L2 " << eoc(records, [](const StudyRecord& r) { return *r.err_l2_u; });
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace fictifem
