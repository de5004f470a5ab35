#pragma once

#include <string>
#include <vector>

namespace fictifem {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast invariant suite behind `fictifem check`: mesh balance and area, point location,
/// shape function identities, quadrature exactness, the unit-cell stiffness, Dörfler
/// marking, exact-solution consistency of the circle presets and one small solve.
std::vector<CheckResult> run_checks();

}  // namespace fictifem
