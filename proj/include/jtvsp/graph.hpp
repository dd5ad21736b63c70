#pragma once

#include "jtvsp/common.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace jtvsp {

// Weighted undirected graph with optional vertex coordinates.
struct Graph {
  Matrix weights;  // symmetric, nonnegative, zero diagonal
  Matrix coords;   // n x d vertex positions; 0 x 0 when unknown

  Index n_vertices() const { return weights.rows(); }
};

inline void validate_graph(const Graph& g, double tol = 1e-12) {
  const Index n = g.weights.rows();
  require(n >= 1 && g.weights.cols() == n, "graph weight matrix must be square");
  require(g.weights.allFinite(), "graph weights must be finite");
  const double scale = std::max(1.0, g.weights.cwiseAbs().maxCoeff());
  require((g.weights - g.weights.transpose()).cwiseAbs().maxCoeff() <= tol * scale,
          "graph weights must be symmetric");
  require(g.weights.diagonal().cwiseAbs().maxCoeff() <= tol * scale,
          "graph weights must have a zero diagonal (no self-loops)");
  require(g.weights.minCoeff() >= 0.0, "graph weights must be nonnegative");
  if (g.coords.size() > 0)
    require(g.coords.rows() == n, "coordinate rows must match the vertex count");
}

// Gaussian-kernel radius graph: vertices within `radius` of each other are
// joined with weight exp(-kernel_scale * distance^2).
inline Graph build_gaussian_radius_graph(const Matrix& coords, double radius,
                                         double kernel_scale) {
  const Index n = coords.rows();
  require(n >= 2, "radius graph needs at least two vertices");
  require(coords.size() > 0 && coords.allFinite(), "coordinates must be finite");
  require(std::isfinite(radius) && radius > 0.0, "radius must be positive");
  require(std::isfinite(kernel_scale) && kernel_scale >= 0.0,
          "kernel scale must be nonnegative");

  Matrix w = Matrix::Zero(n, n);
  const double r2 = radius * radius;
  for (Index i = 0; i < n; ++i) {
    Index neighbours = 0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d2 = (coords.row(i) - coords.row(j)).squaredNorm();
      if (d2 > 0.0 && d2 <= r2) {
        w(i, j) = std::exp(-kernel_scale * d2);
        ++neighbours;
      }
    }
    // Distance-based check: a huge kernel_scale may underflow the weights to
    // zero, but the vertex is only isolated if nothing lies within the radius.
    if (neighbours == 0)
      throw input_error("vertex " + std::to_string(i) +
                        " is isolated: no neighbour within the radius");
  }
  w = ((w + w.transpose()) * 0.5).eval();  // exact symmetry despite fp noise
  return Graph{std::move(w), coords};
}

// Mean number of incident edges per vertex. A weight counts as an edge when it
// reaches `cutoff_ratio` times the largest weight in the graph.
inline double average_degree(const Graph& g, double cutoff_ratio = 1e-4) {
  validate_graph(g);
  const double wmax = g.weights.maxCoeff();
  if (wmax <= 0.0) return 0.0;
  const double cutoff = cutoff_ratio * wmax;
  const auto edge_ends = (g.weights.array() >= cutoff).count();  // ordered pairs
  return static_cast<double>(edge_ends) / static_cast<double>(g.n_vertices());
}

// Bisect the kernel scale until the measured average degree lands within
// `degree_tolerance` of the target. Degree is monotone non-increasing in the
// scale: scale 0 keeps every in-radius pair, a large scale keeps only the
// closest ones.
inline double calibrate_kernel_scale(const Matrix& coords, double radius,
                                     double target_avg_degree,
                                     double degree_tolerance = 0.5,
                                     double cutoff_ratio = 1e-4) {
  const Index n = coords.rows();
  require(n >= 2, "calibration needs at least two vertices");
  require(std::isfinite(target_avg_degree) && target_avg_degree > 0.0,
          "target average degree must be positive");
  if (target_avg_degree > static_cast<double>(n - 1))
    throw input_error("target average degree exceeds the n-1 bound");

  const auto degree_at = [&](double k) {
    return average_degree(build_gaussian_radius_graph(coords, radius, k), cutoff_ratio);
  };

  double lo = 1e-12;  // effectively unweighted: the largest degree achievable
  const double d_lo = degree_at(lo);
  if (std::abs(d_lo - target_avg_degree) <= degree_tolerance) return lo;
  if (d_lo < target_avg_degree - degree_tolerance)
    throw input_error("radius too small: the unweighted average degree " +
                      std::to_string(d_lo) + " is already below the target");

  double hi = 1.0;
  double d_hi = degree_at(hi);
  int expansions = 0;
  while (d_hi > target_avg_degree + degree_tolerance) {
    if (++expansions > 60)
      throw input_error("kernel scale calibration cannot bracket the target degree");
    hi *= 4.0;
    d_hi = degree_at(hi);
  }
  if (std::abs(d_hi - target_avg_degree) <= degree_tolerance) return hi;

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double d = degree_at(mid);
    if (std::abs(d - target_avg_degree) <= degree_tolerance) return mid;
    (d > target_avg_degree ? lo : hi) = mid;
  }
  throw input_error("kernel scale bisection failed to reach the target degree window");
}

// L = diag(W 1) - W.
inline Matrix combinatorial_laplacian(const Graph& g) {
  validate_graph(g);
  Matrix lap = -g.weights;
  lap.diagonal() = g.weights.rowwise().sum();
  return lap;
}

}  // namespace jtvsp
