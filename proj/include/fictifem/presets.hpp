#pragma once

#include "fictifem/assembly.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fictifem {

struct Preset {
  std::string name;
  std::string description;
  ProblemSpec problem;
  int level1 = 3;
  int level2 = 2;
  /// Volume density -(beta/beta2 * f2 - f) of the multiplier (circle presets).
  std::optional<double> lambda_density;
};

std::vector<std::string> preset_names();

/// Throws ConfigError naming the valid presets when `name` is unknown.
Preset make_preset(const std::string& name, ElementPair pair = ElementPair::Q1_Q1B_P0);

/// Exact (u, u2) of the circle presets: u = (a - r^2)/b outside, u2 = (c - d r^2)/e inside.
struct RadialExact {
  double a, b, c, d, e;
};
ExactSolution radial_exact(const RadialExact& coeffs);

}  // namespace fictifem
