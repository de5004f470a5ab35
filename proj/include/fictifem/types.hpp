#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>

namespace fictifem {

using Point = Eigen::Vector2d;
using RefPoint = Eigen::Vector2d;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

/// Base class of all errors thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration file or invalid parameter value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Invalid problem geometry (immersed domain not inside the background, degenerate projection).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A cell mapping with non-positive Jacobian determinant.
class InvertedCellError : public Error {
 public:
  using Error::Error;
};

/// A point could not be located in a mesh.
class LocationError : public Error {
 public:
  using Error::Error;
};

/// Factorization breakdown or iterative solver non-convergence.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace fictifem
