#pragma once

// Dense reference assembly for the configuration background = 2x2 unit cells over [0,2]^2,
// immersed = the single cell [0.5,1.5]^2, with Q1 / (Q1 + bubble) / P0. Basis functions are
// written out in closed form and integrated with hard-coded Gauss rules, independently of
// the library's element and assembly code.

#include "fictifem/assembly.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>

namespace fictifem::oracle {

struct Rule1d {
  std::vector<double> x, w;  // on [0,1]
};

inline Rule1d gauss3() {
  const double a = std::sqrt(0.6) / 2;
  return {{0.5 - a, 0.5, 0.5 + a}, {5.0 / 18, 8.0 / 18, 5.0 / 18}};
}

inline Rule1d gauss5() {
  const double n1 = 0.5384693101056831, n2 = 0.9061798459386640;
  const double w0 = 0.5688888888888889, w1 = 0.4786286704993665, w2 = 0.2369268850561891;
  return {{0.5 - n2 / 2, 0.5 - n1 / 2, 0.5, 0.5 + n1 / 2, 0.5 + n2 / 2}, {w2 / 2, w1 / 2, w0 / 2, w1 / 2, w2 / 2}};
}

inline double tent(double s) { return std::max(0.0, 1.0 - std::abs(s)); }
inline double tent_d(double s) { return std::abs(s) >= 1.0 ? 0.0 : (s < 0 ? 1.0 : -1.0); }

/// Background hat function at node (a, b), unit spacing.
struct Hat {
  double a, b;
  double value(double x, double y) const { return tent(x - a) * tent(y - b); }
  Point grad(double x, double y) const {
    return {tent_d(x - a) * tent(y - b), tent(x - a) * tent_d(y - b)};
  }
};

/// Immersed basis on [0.5,1.5]^2: corner functions k = 0..3 then the bubble.
struct ImmersedBasis {
  static constexpr double x0 = 0.5;
  static double value(int k, double x, double y) {
    const double s = x - x0, t = y - x0;
    switch (k) {
      case 0: return (1 - s) * (1 - t);
      case 1: return s * (1 - t);
      case 2: return s * t;
      case 3: return (1 - s) * t;
      default: return 16 * s * (1 - s) * t * (1 - t);
    }
  }
  static Point grad(int k, double x, double y) {
    const double s = x - x0, t = y - x0;
    switch (k) {
      case 0: return {-(1 - t), -(1 - s)};
      case 1: return {1 - t, -s};
      case 2: return {t, s};
      case 3: return {-t, 1 - s};
      default: return {16 * (1 - 2 * s) * t * (1 - t), 16 * s * (1 - s) * (1 - 2 * t)};
    }
  }
  static Point node(int k) {
    switch (k) {
      case 0: return {0.5, 0.5};
      case 1: return {1.5, 0.5};
      case 2: return {1.5, 1.5};
      case 3: return {0.5, 1.5};
      default: return {1.0, 1.0};
    }
  }
};

struct Blocks {
  Eigen::MatrixXd A, A2, C, M;
  Eigen::VectorXd F, F2;
  std::vector<Point> nodes1;  // background node of each oracle row/column
};

/// Integrates g over the square [x0,x0+1] x [y0,y0+1] with a tensor rule.
inline double integrate(const Rule1d& r, double x0, double y0, const std::function<double(double, double)>& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    for (std::size_t j = 0; j < r.x.size(); ++j) s += r.w[i] * r.w[j] * g(x0 + r.x[i], y0 + r.x[j]);
  }
  return s;
}

inline Blocks blocks(const std::function<double(double, double)>& beta, const std::function<double(double, double)>& beta2,
                     const std::function<double(double, double)>& f, const std::function<double(double, double)>& f2) {
  Blocks b;
  std::vector<Hat> hats;
  for (int j = 0; j <= 2; ++j) {
    for (int i = 0; i <= 2; ++i) {
      hats.push_back({double(i), double(j)});
      b.nodes1.emplace_back(i, j);
    }
  }
  const int n1 = 9, n2 = 5;
  b.A = Eigen::MatrixXd::Zero(n1, n1);
  b.F = Eigen::VectorXd::Zero(n1);
  const Rule1d g3 = gauss3(), g5 = gauss5();
  for (int cy = 0; cy < 2; ++cy) {
    for (int cx = 0; cx < 2; ++cx) {
      for (int p = 0; p < n1; ++p) {
        b.F(p) += integrate(g3, cx, cy, [&](double x, double y) { return f(x, y) * hats[p].value(x, y); });
        for (int q = 0; q < n1; ++q) {
          // One-sided derivatives: evaluate strictly inside the cell.
          b.A(p, q) += integrate(g3, cx, cy, [&](double x, double y) {
            return beta(x, y) * hats[p].grad(x, y).dot(hats[q].grad(x, y));
          });
        }
      }
    }
  }
  b.A2 = Eigen::MatrixXd::Zero(n2, n2);
  b.F2 = Eigen::VectorXd::Zero(n2);
  b.C = Eigen::MatrixXd::Zero(1, n1);
  b.M = Eigen::MatrixXd::Zero(1, n2);
  auto beta3 = [&](double x, double y) { return beta2(x, y) - beta(x, y); };
  auto f3 = [&](double x, double y) { return f2(x, y) - f(x, y); };
  for (int k = 0; k < n2; ++k) {
    b.F2(k) = integrate(g5, 0.5, 0.5, [&](double x, double y) { return f3(x, y) * ImmersedBasis::value(k, x, y); });
    b.M(0, k) = integrate(g5, 0.5, 0.5, [&](double x, double y) { return ImmersedBasis::value(k, x, y); });
    for (int l = 0; l < n2; ++l) {
      b.A2(k, l) = integrate(g5, 0.5, 0.5, [&](double x, double y) {
        return beta3(x, y) * ImmersedBasis::grad(k, x, y).dot(ImmersedBasis::grad(l, x, y));
      });
    }
  }
  for (int p = 0; p < n1; ++p) {
    b.C(0, p) = integrate(g5, 0.5, 0.5, [&](double x, double y) { return hats[p].value(x, y); });
  }
  return b;
}

/// Library discretization of the oracle configuration (no Dirichlet elimination).
inline Discretization discretization() {
  return make_discretization(ElementPair::Q1_Q1B_P0, false, structured_forest({0, 0}, {2, 2}, 2, 2),
                             structured_forest({0.5, 0.5}, {1.5, 1.5}, 1, 1));
}

/// Largest entry-wise difference between the library blocks and the oracle, after mapping
/// DoFs by their support points. Returns +inf if a DoF cannot be matched.
inline double max_block_difference(const BlockSystem& sys, const Discretization& d, const Blocks& o) {
  auto find = [](const DofLayout& l, const Point& p, DofEntity e) {
    for (int i = 0; i < l.n_dofs; ++i) {
      if (l.entity[i] == e && (l.support_points[i] - p).norm() < 1e-12) return i;
    }
    return -1;
  };
  std::vector<int> map1(9), map2(5);
  for (int p = 0; p < 9; ++p) map1[p] = find(d.layout1, o.nodes1[p], DofEntity::vertex);
  for (int k = 0; k < 5; ++k) map2[k] = find(d.layout2, ImmersedBasis::node(k), k < 4 ? DofEntity::vertex : DofEntity::bubble);
  for (int v : map1) if (v < 0) return INFINITY;
  for (int v : map2) if (v < 0) return INFINITY;
  if (sys.n1 != 9 || sys.n2 != 5 || sys.m != 1) return INFINITY;

  const Eigen::MatrixXd A(sys.A), A2(sys.A2), C(sys.C), M(sys.M);
  double diff = 0.0;
  for (int p = 0; p < 9; ++p) {
    diff = std::max(diff, std::abs(sys.F(map1[p]) - o.F(p)));
    diff = std::max(diff, std::abs(C(0, map1[p]) - o.C(0, p)));
    for (int q = 0; q < 9; ++q) diff = std::max(diff, std::abs(A(map1[p], map1[q]) - o.A(p, q)));
  }
  for (int k = 0; k < 5; ++k) {
    diff = std::max(diff, std::abs(sys.F2(map2[k]) - o.F2(k)));
    diff = std::max(diff, std::abs(M(0, map2[k]) - o.M(0, k)));
    for (int l = 0; l < 5; ++l) diff = std::max(diff, std::abs(A2(map2[k], map2[l]) - o.A2(k, l)));
  }
  diff = std::max(diff, sys.G.cwiseAbs().maxCoeff());
  return diff;
}

}  // namespace fictifem::oracle
