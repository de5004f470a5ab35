#pragma once

#include "fictifem/mesh.hpp"
#include "fictifem/types.hpp"

#include <string>
#include <variant>
#include <vector>

namespace fictifem {

struct Rectangle {
  Point lo, hi;
};

struct Circle {
  Point center;
  double radius = 1.0;
};

/// Star-shaped domain with radius r(theta) = r0 + amplitude * cos(petals * theta).
struct Flower {
  Point center;
  double r0 = 1.0;
  double amplitude = 0.1;
  int petals = 5;
};

struct Square {
  Point lo, hi;
};

/// Rectangle `outer` with the corner box `removed` cut away.
struct LShape {
  Rectangle outer;
  Rectangle removed;
};

enum class DomainRole { background, immersed };

struct DomainSpec {
  std::variant<Rectangle, Circle, Flower, Square, LShape> shape;
  DomainRole role = DomainRole::immersed;
};

std::string describe(const DomainSpec& spec);

/// Closed-domain membership; points within 1e-12 of the boundary count as inside.
bool inside(const DomainSpec& spec, const Point& p);

/// Radial projection onto the boundary of a circle or flower.
/// Throws GeometryError for other shapes or when p is the centre.
Point project_to_boundary(const DomainSpec& spec, const Point& p);

/// Boundary radius at polar angle theta (circle and flower only).
double boundary_radius(const DomainSpec& spec, double theta);

/// Exact area of the analytic domain.
double analytic_area(const DomainSpec& spec);

/// Distance from p to the boundary curve (unsigned).
double distance_to_boundary(const DomainSpec& spec, const Point& p);

/// n points distributed along the boundary.
std::vector<Point> sample_boundary(const DomainSpec& spec, int n);

/// Initial forest: structured quads for polygonal shapes, a five-root layout with
/// boundary snapping for circle/flower, followed by `level` uniform refinements.
MeshForest initial_mesh(const DomainSpec& spec, int level);

/// Checks that `immersed` lies strictly inside `background` by sampling 1e4 boundary points,
/// and that flower radii stay positive. Throws GeometryError otherwise.
void validate_domains(const DomainSpec& background, const DomainSpec& immersed);

/// Uniform refinement of every active cell.
void refine_globally(MeshForest& forest, int times = 1);

}  // namespace fictifem
