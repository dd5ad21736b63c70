#pragma once

#include "jtvsp/common.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <concepts>
#include <type_traits>
#include <string>
#include <utility>

namespace jtvsp {

// Orthonormal eigenbasis of a graph Laplacian. Immutable once built; every
// spectral operation below works relative to this basis.
struct GraphSpectrum {
  Matrix eigenvectors;  // columns u_n, deterministic sign (see eigendecompose)
  Vector eigenvalues;   // ascending; eigenvalues[0] == 0 for connected graphs

  Index n_vertices() const { return eigenvectors.rows(); }
};

inline GraphSpectrum eigendecompose(const Matrix& laplacian) {
  const Index n = laplacian.rows();
  require(n >= 1 && laplacian.cols() == n, "eigendecompose: matrix must be square");
  require(laplacian.allFinite(), "eigendecompose: matrix must be finite");
  const double scale = std::max(1.0, laplacian.cwiseAbs().maxCoeff());
  require((laplacian - laplacian.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale,
          "eigendecompose: matrix must be symmetric");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (laplacian + laplacian.transpose()));
  require(solver.info() == Eigen::Success, "eigendecompose: solver failed");

  GraphSpectrum spec{solver.eigenvectors(), solver.eigenvalues()};

  // Laplacians are positive semidefinite; snap the tiny negatives a dense
  // solver leaves behind so downstream sqrt/filters stay real.
  for (Index i = 0; i < n; ++i)
    if (spec.eigenvalues(i) < 0.0 && spec.eigenvalues(i) >= -1e-10 * scale)
      spec.eigenvalues(i) = 0.0;

  // Deterministic sign: make the largest-magnitude entry of each eigenvector
  // positive, taking the first such entry on ties.
  for (Index c = 0; c < n; ++c) {
    Index arg = 0;
    double best = std::abs(spec.eigenvectors(0, c));
    for (Index r = 1; r < n; ++r) {
      const double a = std::abs(spec.eigenvectors(r, c));
      if (a > best) {
        best = a;
        arg = r;
      }
    }
    if (spec.eigenvectors(arg, c) < 0.0) spec.eigenvectors.col(c) = -spec.eigenvectors.col(c);
  }
  return spec;
}

inline Vector gft(const GraphSpectrum& spec, const Vector& x) {
  require(x.size() == spec.n_vertices(), "gft: signal length must match the vertex count");
  return spec.eigenvectors.transpose() * x;
}

inline Vector igft(const GraphSpectrum& spec, const Vector& xh) {
  require(xh.size() == spec.n_vertices(), "igft: spectrum length must match the vertex count");
  return spec.eigenvectors * xh;
}

// Sample a scalar response on the spectrum, rejecting non-finite values.
template <class Response>
  requires std::invocable<Response&, double> && (!std::is_convertible_v<Response, Vector>)
Vector sample_graph_response(const GraphSpectrum& spec, Response&& h) {
  Vector r(spec.eigenvalues.size());
  for (Index i = 0; i < r.size(); ++i) {
    r(i) = h(spec.eigenvalues(i));
    require(std::isfinite(r(i)), "graph response is not finite at eigenvalue " +
                                     std::to_string(spec.eigenvalues(i)));
  }
  return r;
}

// h(L) x = U diag(h) U^T x with h pre-sampled on the eigenvalues.
inline Vector graph_filter(const GraphSpectrum& spec, const Vector& response, const Vector& x) {
  require(response.size() == spec.n_vertices(), "graph_filter: response length mismatch");
  require(response.allFinite(), "graph_filter: response must be finite");
  require(x.size() == spec.n_vertices(), "graph_filter: signal length mismatch");
  return spec.eigenvectors * response.cwiseProduct(spec.eigenvectors.transpose() * x);
}

template <class Response>
  requires std::invocable<Response&, double> && (!std::is_convertible_v<Response, Vector>)
Vector graph_filter(const GraphSpectrum& spec, Response&& h, const Vector& x) {
  return graph_filter(spec, sample_graph_response(spec, std::forward<Response>(h)), x);
}

// h(L) delta_i: the filter kernel localized at a vertex.
inline Vector graph_localize(const GraphSpectrum& spec, const Vector& response, Index vertex) {
  require(vertex >= 0 && vertex < spec.n_vertices(), "graph_localize: vertex index out of range");
  require(response.size() == spec.n_vertices(), "graph_localize: response length mismatch");
  require(response.allFinite(), "graph_localize: response must be finite");
  return spec.eigenvectors * response.cwiseProduct(spec.eigenvectors.row(vertex).transpose());
}

template <class Response>
  requires std::invocable<Response&, double> && (!std::is_convertible_v<Response, Vector>)
Vector graph_localize(const GraphSpectrum& spec, Response&& h, Index vertex) {
  return graph_localize(spec, sample_graph_response(spec, std::forward<Response>(h)), vertex);
}

}  // namespace jtvsp
