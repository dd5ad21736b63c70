#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace jtvsp {

using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;
using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using Index = Eigen::Index;

// Bad input: malformed files, dimension mismatches, invalid parameters.
class input_error : public std::runtime_error {
 public:
  explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// An iterative solver exhausted its budget without reaching tolerance.
class convergence_error : public std::runtime_error {
 public:
  explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw input_error(message);
}

// vec(X)[k] = X(i, t) with k = N t + i: column-major flattening of an
// n_vertices x n_steps signal. All vectorized interfaces use this ordering.
inline Vector vec(const Matrix& x) {
  return Eigen::Map<const Vector>(x.data(), x.size());
}

inline Matrix unvec(const Vector& x, Index n_vertices, Index n_steps) {
  require(x.size() == n_vertices * n_steps, "unvec: size mismatch");
  return Eigen::Map<const Matrix>(x.data(), n_vertices, n_steps);
}

}  // namespace jtvsp
