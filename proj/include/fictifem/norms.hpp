#pragma once

#include "fictifem/assembly.hpp"
#include "fictifem/estimator.hpp"

namespace fictifem {

struct ErrorNorms {
  double l2_u = 0.0;    // ||u - u_h||_{0,Omega}
  double h1_u = 0.0;    // |u - u_h|_{1,Omega}
  double l2_u2 = 0.0;   // ||u2 - u_2h||_{0,Omega2}
  double h1_u2 = 0.0;   // ||u2 - u_2h||_{1,Omega2} (full norm)
  double h1semi_u2 = 0.0;
};

/// 5x5 Gauss errors. On the background mesh the exact u switches to the u2 formula at
/// points inside the analytic immersed domain.
ErrorNorms error_norms(const StateView& s, const ExactSolution& exact);

}  // namespace fictifem
