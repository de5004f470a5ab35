#include "fictifem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fictifem {

namespace {

constexpr double boundary_tol = 1e-12;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool in_box(const Point& lo, const Point& hi, const Point& p, double tol) {
  return p.x() >= lo.x() - tol && p.x() <= hi.x() + tol && p.y() >= lo.y() - tol &&
         p.y() <= hi.y() + tol;
}

bool strictly_in_box(const Point& lo, const Point& hi, const Point& p, double tol) {
  return p.x() > lo.x() + tol && p.x() < hi.x() - tol && p.y() > lo.y() + tol && p.y() < hi.y() - tol;
}

double flower_radius(const Flower& f, double theta) {
  return f.r0 + f.amplitude * std::cos(f.petals * theta);
}

double segment_distance(const Point& p, const Point& a, const Point& b) {
  const Point d = b - a;
  const double t = std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

double box_boundary_distance(const Point& lo, const Point& hi, const Point& p) {
  const Point c[4] = {lo, {hi.x(), lo.y()}, hi, {lo.x(), hi.y()}};
  double d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 4; ++k) d = std::min(d, segment_distance(p, c[k], c[(k + 1) % 4]));
  return d;
}

std::vector<Point> lshape_polygon(const LShape& l) {
  // Walk the outer box counterclockwise, replacing the removed corner by its inner corner.
  const Point& lo = l.outer.lo;
  const Point& hi = l.outer.hi;
  const Point corners[4] = {lo, {hi.x(), lo.y()}, hi, {lo.x(), hi.y()}};
  std::vector<Point> poly;
  for (int k = 0; k < 4; ++k) {
    const Point& c = corners[k];
    if (in_box(l.removed.lo, l.removed.hi, c, 1e-14)) {
      // The removed box touches this corner; insert the three corners of the notch.
      const Point& prev = corners[(k + 3) % 4];
      const Point& next = corners[(k + 1) % 4];
      auto clip = [&](const Point& from) {
        Point q = c;
        if (std::abs(from.x() - c.x()) > 0) q.x() = (c.x() == l.removed.lo.x()) ? l.removed.hi.x() : l.removed.lo.x();
        if (std::abs(from.y() - c.y()) > 0) q.y() = (c.y() == l.removed.lo.y()) ? l.removed.hi.y() : l.removed.lo.y();
        return q;
      };
      const Point a = clip(prev);
      const Point b = clip(next);
      const Point inner((c.x() == l.removed.lo.x()) ? l.removed.hi.x() : l.removed.lo.x(),
                        (c.y() == l.removed.lo.y()) ? l.removed.hi.y() : l.removed.lo.y());
      poly.push_back(a);
      poly.push_back(inner);
      poly.push_back(b);
    } else {
      poly.push_back(c);
    }
  }
  return poly;
}

MeshForest radial_mesh(const DomainSpec& spec, const Point& center, double r0) {
  const double s = 0.4 * r0;
  std::vector<Point> v;
  const int sx[4] = {-1, 1, 1, -1};
  const int sy[4] = {-1, -1, 1, 1};
  for (int k = 0; k < 4; ++k) v.push_back(center + Point(sx[k] * s, sy[k] * s));
  for (int k = 0; k < 4; ++k) v.push_back(project_to_boundary(spec, center + Point(sx[k], sy[k])));
  // Inner square 0..3, outer ring 4..7.
  std::vector<std::array<int, 4>> roots = {
      {0, 1, 2, 3}, {4, 5, 1, 0}, {5, 6, 2, 1}, {6, 7, 3, 2}, {7, 4, 0, 3},
  };
  return MeshForest(std::move(v), roots, [spec](const Point& p) { return project_to_boundary(spec, p); });
}

MeshForest box_mesh(const Point& lo, const Point& hi) {
  std::vector<Point> v = {lo, {hi.x(), lo.y()}, hi, {lo.x(), hi.y()}};
  return MeshForest(std::move(v), {{0, 1, 2, 3}});
}

MeshForest lshape_mesh(const LShape& l) {
  const double cx = (l.removed.lo.x() > l.outer.lo.x()) ? l.removed.lo.x() : l.removed.hi.x();
  const double cy = (l.removed.lo.y() > l.outer.lo.y()) ? l.removed.lo.y() : l.removed.hi.y();
  const double xs[3] = {l.outer.lo.x(), cx, l.outer.hi.x()};
  const double ys[3] = {l.outer.lo.y(), cy, l.outer.hi.y()};
  std::vector<Point> v;
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 3; ++i) v.emplace_back(xs[i], ys[j]);
  }
  std::vector<std::array<int, 4>> roots;
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) {
      const Point mid(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1]));
      if (in_box(l.removed.lo, l.removed.hi, mid, 0.0)) continue;
      const int v0 = j * 3 + i;
      roots.push_back({v0, v0 + 1, v0 + 4, v0 + 3});
    }
  }
  return MeshForest(std::move(v), roots);
}

}  // namespace

std::string describe(const DomainSpec& spec) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Rectangle& r) { os << "rectangle [" << r.lo.transpose() << "]-[" << r.hi.transpose() << "]"; },
                 [&](const Circle& c) { os << "circle center (" << c.center.transpose() << ") r=" << c.radius; },
                 [&](const Flower& f) {
                   os << "flower center (" << f.center.transpose() << ") r0=" << f.r0 << " a=" << f.amplitude
                      << " k=" << f.petals;
                 },
                 [&](const Square& s) { os << "square [" << s.lo.transpose() << "]-[" << s.hi.transpose() << "]"; },
                 [&](const LShape& l) {
                   os << "lshape [" << l.outer.lo.transpose() << "]-[" << l.outer.hi.transpose() << "] minus ["
                      << l.removed.lo.transpose() << "]-[" << l.removed.hi.transpose() << "]";
                 },
             },
             spec.shape);
  return os.str();
}

bool inside(const DomainSpec& spec, const Point& p) {
  return std::visit(
      overloaded{
          [&](const Rectangle& r) { return in_box(r.lo, r.hi, p, boundary_tol); },
          [&](const Square& s) { return in_box(s.lo, s.hi, p, boundary_tol); },
          [&](const Circle& c) { return (p - c.center).norm() <= c.radius + boundary_tol; },
          [&](const Flower& f) {
            const Point d = p - f.center;
            const double r = d.norm();
            if (r == 0.0) return true;
            return r <= flower_radius(f, std::atan2(d.y(), d.x())) + boundary_tol;
          },
          [&](const LShape& l) {
            return in_box(l.outer.lo, l.outer.hi, p, boundary_tol) &&
                   !strictly_in_box(l.removed.lo, l.removed.hi, p, boundary_tol);
          },
      },
      spec.shape);
}

double boundary_radius(const DomainSpec& spec, double theta) {
  if (const auto* c = std::get_if<Circle>(&spec.shape)) return c->radius;
  if (const auto* f = std::get_if<Flower>(&spec.shape)) return flower_radius(*f, theta);
  throw GeometryError("boundary_radius: shape is not radial: " + describe(spec));
}

Point project_to_boundary(const DomainSpec& spec, const Point& p) {
  Point center;
  if (const auto* c = std::get_if<Circle>(&spec.shape)) {
    center = c->center;
  } else if (const auto* f = std::get_if<Flower>(&spec.shape)) {
    center = f->center;
  } else {
    throw GeometryError("project_to_boundary: shape is not radial: " + describe(spec));
  }
  const Point d = p - center;
  const double r = d.norm();
  if (r == 0.0) throw GeometryError("project_to_boundary: point coincides with the centre");
  const double theta = std::atan2(d.y(), d.x());
  return center + boundary_radius(spec, theta) * (d / r);
}

double analytic_area(const DomainSpec& spec) {
  return std::visit(
      overloaded{
          [](const Rectangle& r) { return (r.hi - r.lo).prod(); },
          [](const Square& s) { return (s.hi - s.lo).prod(); },
          [](const Circle& c) { return std::numbers::pi * c.radius * c.radius; },
          [](const Flower& f) { return std::numbers::pi * (f.r0 * f.r0 + 0.5 * f.amplitude * f.amplitude); },
          [](const LShape& l) { return (l.outer.hi - l.outer.lo).prod() - (l.removed.hi - l.removed.lo).prod(); },
      },
      spec.shape);
}

std::vector<Point> sample_boundary(const DomainSpec& spec, int n) {
  std::vector<Point> pts;
  pts.reserve(n);
  auto polygon = [&](const std::vector<Point>& poly) {
    double perimeter = 0.0;
    for (std::size_t k = 0; k < poly.size(); ++k) perimeter += (poly[(k + 1) % poly.size()] - poly[k]).norm();
    for (int i = 0; i < n; ++i) {
      double s = perimeter * i / n;
      for (std::size_t k = 0; k < poly.size(); ++k) {
        const Point a = poly[k], b = poly[(k + 1) % poly.size()];
        const double len = (b - a).norm();
        if (s <= len) {
          pts.push_back(a + (s / len) * (b - a));
          break;
        }
        s -= len;
      }
    }
  };
  auto box = [&](const Point& lo, const Point& hi) {
    polygon({lo, {hi.x(), lo.y()}, hi, {lo.x(), hi.y()}});
  };
  std::visit(overloaded{
                 [&](const Rectangle& r) { box(r.lo, r.hi); },
                 [&](const Square& s) { box(s.lo, s.hi); },
                 [&](const LShape& l) { polygon(lshape_polygon(l)); },
                 [&](const Circle& c) {
                   for (int i = 0; i < n; ++i) {
                     const double t = 2 * std::numbers::pi * i / n;
                     pts.push_back(c.center + c.radius * Point(std::cos(t), std::sin(t)));
                   }
                 },
                 [&](const Flower& f) {
                   for (int i = 0; i < n; ++i) {
                     const double t = 2 * std::numbers::pi * i / n;
                     pts.push_back(f.center + flower_radius(f, t) * Point(std::cos(t), std::sin(t)));
                   }
                 },
             },
             spec.shape);
  return pts;
}

double distance_to_boundary(const DomainSpec& spec, const Point& p) {
  return std::visit(
      overloaded{
          [&](const Rectangle& r) { return box_boundary_distance(r.lo, r.hi, p); },
          [&](const Square& s) { return box_boundary_distance(s.lo, s.hi, p); },
          [&](const Circle& c) { return std::abs((p - c.center).norm() - c.radius); },
          [&](const LShape& l) {
            const auto poly = lshape_polygon(l);
            double d = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < poly.size(); ++k) d = std::min(d, segment_distance(p, poly[k], poly[(k + 1) % poly.size()]));
            return d;
          },
          [&](const Flower& f) {
            // Coarse scan of the closed curve followed by golden-section refinement.
            constexpr int n = 2048;
            auto curve = [&](double t) -> Point { return f.center + flower_radius(f, t) * Point(std::cos(t), std::sin(t)); };
            int best = 0;
            double dbest = std::numeric_limits<double>::infinity();
            for (int i = 0; i < n; ++i) {
              const double d = (curve(2 * std::numbers::pi * i / n) - p).norm();
              if (d < dbest) dbest = d, best = i;
            }
            double a = 2 * std::numbers::pi * (best - 1) / n, b = 2 * std::numbers::pi * (best + 1) / n;
            const double g = 0.5 * (std::sqrt(5.0) - 1.0);
            for (int it = 0; it < 60; ++it) {
              const double c1 = b - g * (b - a), c2 = a + g * (b - a);
              if ((curve(c1) - p).norm() < (curve(c2) - p).norm()) b = c2; else a = c1;
            }
            return std::min(dbest, (curve(0.5 * (a + b)) - p).norm());
          },
      },
      spec.shape);
}

void refine_globally(MeshForest& forest, int times) {
  for (int i = 0; i < times; ++i) {
    const std::vector<int> all = forest.active_cells();
    forest.refine(all);
  }
}

MeshForest initial_mesh(const DomainSpec& spec, int level) {
  if (level < 0 || level > 12) throw ConfigError("initial_mesh: level must be in [0, 12]");
  MeshForest forest = std::visit(
      overloaded{
          [&](const Rectangle& r) { return box_mesh(r.lo, r.hi); },
          [&](const Square& s) { return box_mesh(s.lo, s.hi); },
          [&](const LShape& l) { return lshape_mesh(l); },
          [&](const Circle& c) { return radial_mesh(spec, c.center, c.radius); },
          [&](const Flower& f) { return radial_mesh(spec, f.center, f.r0); },
      },
      spec.shape);
  refine_globally(forest, level);
  for (int c : forest.active_cells()) {
    if (!has_positive_jacobian(forest.cell_vertices(c))) {
      throw InvertedCellError("initial_mesh: cell " + std::to_string(c) + " of " + describe(spec) +
                              " has a non-positive Jacobian");
    }
  }
  return forest;
}

void validate_domains(const DomainSpec& background, const DomainSpec& immersed) {
  if (const auto* f = std::get_if<Flower>(&immersed.shape)) {
    if (!(f->r0 - std::abs(f->amplitude) > 0.0)) throw GeometryError("flower radius must stay positive");
  }
  const auto* box = std::get_if<Rectangle>(&background.shape);
  for (const Point& p : sample_boundary(immersed, 10000)) {
    const bool ok = box ? strictly_in_box(box->lo, box->hi, p, 0.0) : inside(background, p);
    if (!ok) {
      throw GeometryError("immersed domain " + describe(immersed) + " is not strictly inside " +
                          describe(background));
    }
  }
}

}  // namespace fictifem
