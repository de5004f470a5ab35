#include "fictifem/presets.hpp"

#include <numbers>

namespace fictifem {

namespace {

ScalarField constant(double v) {
  return [v](const Point&) { return v; };
}

VectorField zero_gradient() {
  return [](const Point&) { return Point(0.0, 0.0); };
}

ProblemSpec base_problem(const std::string& name, DomainSpec background, DomainSpec immersed, double beta,
                         double beta2, ElementPair pair) {
  ProblemSpec p;
  p.name = name;
  p.background = std::move(background);
  p.background.role = DomainRole::background;
  p.immersed = std::move(immersed);
  p.immersed.role = DomainRole::immersed;
  p.beta = constant(beta);
  p.beta2 = constant(beta2);
  p.grad_beta = zero_gradient();
  p.grad_beta2 = zero_gradient();
  p.f = constant(1.0);
  p.f2 = constant(1.0);
  p.pair = pair;
  return p;
}

Preset circle(const std::string& name, double beta, double beta2, const RadialExact& ex, ElementPair pair) {
  Preset p;
  p.name = name;
  p.description = "unit circle in [-1.4,1.4]^2, beta=" + std::to_string(beta) + ", beta2=" + std::to_string(beta2);
  p.problem = base_problem(name, {Rectangle{{-1.4, -1.4}, {1.4, 1.4}}}, {Circle{{0.0, 0.0}, 1.0}}, beta, beta2, pair);
  p.problem.exact = radial_exact(ex);
  p.problem.dirichlet = p.problem.exact->u;
  p.level1 = 3;
  p.level2 = 2;
  p.lambda_density = -(beta / beta2 * 1.0 - 1.0);
  return p;
}

}  // namespace

ExactSolution radial_exact(const RadialExact& k) {
  ExactSolution e;
  e.u = [k](const Point& x) { return (k.a - x.squaredNorm()) / k.b; };
  e.grad_u = [k](const Point& x) { return Point(-2.0 * x / k.b); };
  e.u2 = [k](const Point& x) { return (k.c - k.d * x.squaredNorm()) / k.e; };
  e.grad_u2 = [k](const Point& x) { return Point(-2.0 * k.d * x / k.e); };
  return e;
}

std::vector<std::string> preset_names() {
  return {"circle_10", "circle_1000", "circle_reversed", "square", "lshape", "flower"};
}

Preset make_preset(const std::string& name, ElementPair pair) {
  if (name == "circle_10") return circle(name, 1.0, 10.0, {4, 4, 31, 1, 40}, pair);
  if (name == "circle_1000") return circle(name, 1.0, 1000.0, {4, 4, 3001, 1, 4000}, pair);
  if (name == "circle_reversed") return circle(name, 10.0, 1.0, {4, 40, 13, 10, 40}, pair);

  Preset p;
  p.name = name;
  if (name == "square") {
    p.description = "square [e, 1+pi]^2 in [0,6]^2";
    p.problem = base_problem(name, {Rectangle{{0, 0}, {6, 6}}},
                             {Square{{std::numbers::e, std::numbers::e}, {1 + std::numbers::pi, 1 + std::numbers::pi}}},
                             1.0, 10.0, pair);
    p.level1 = 3;
    p.level2 = 2;
  } else if (name == "lshape") {
    p.description = "L-shape [1,3]^2 minus [2,3]^2 in [0,6]^2";
    p.problem = base_problem(name, {Rectangle{{0, 0}, {6, 6}}}, {LShape{Rectangle{{1, 1}, {3, 3}}, Rectangle{{2, 2}, {3, 3}}}},
                             1.0, 10.0, pair);
    p.level1 = 3;
    p.level2 = 2;
  } else if (name == "flower") {
    p.description = "flower r = 1 + 0.1 cos(5 theta) in [-2,3]^2";
    p.problem = base_problem(name, {Rectangle{{-2, -2}, {3, 3}}}, {Flower{{0, 0}, 1.0, 0.1, 5}}, 1.0, 10.0, pair);
    p.level1 = 4;
    p.level2 = 2;
  } else {
    std::string valid;
    for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "'; valid presets: " + valid);
  }
  return p;
}

}  // namespace fictifem
