#pragma once

#include "jtvsp/graph_spectrum.hpp"
#include "jtvsp/time_basis.hpp"

#include <string>
#include <utility>

namespace jtvsp {

// The joint Fourier context: a graph eigenbasis crossed with the time Fourier
// basis. Signals are n_vertices x n_steps matrices X; the joint transform is
// U_G^T X applied per column followed by a unitary DFT along every row, i.e.
// the (U_T kron U_G)^* rotation of vec(X).
struct JointBasis {
  GraphSpectrum graph;
  TimeBasis time;

  Index n_vertices() const { return graph.n_vertices(); }
  Index n_steps() const { return time.n_steps; }
  Index size() const { return n_vertices() * n_steps(); }

  // lambda_n + lambda_{T,tau} over the joint frequency grid: the spectrum of
  // the Cartesian-sum Laplacian (graph Laplacian plus time Laplacian).
  Matrix joint_laplacian_response() const {
    const Vector lg = graph.eigenvalues;
    const Vector lt = time.laplacian_eigenvalues();
    return lg.replicate(1, lt.size()) + lt.transpose().replicate(lg.size(), 1);
  }
};

namespace detail {

inline void check_signal_shape(const JointBasis& jb, Index rows, Index cols, const char* what) {
  require(rows == jb.n_vertices() && cols == jb.n_steps(),
          std::string(what) + ": signal must be " + std::to_string(jb.n_vertices()) + " x " +
              std::to_string(jb.n_steps()));
}

}  // namespace detail

inline CMatrix jft(const JointBasis& jb, const CMatrix& x) {
  detail::check_signal_shape(jb, x.rows(), x.cols(), "jft");
  CMatrix y = jb.graph.eigenvectors.transpose() * x;
  detail::dft_rows_inplace(y, /*inverse=*/false);
  return y;
}

inline CMatrix jft(const JointBasis& jb, const Matrix& x) {
  return jft(jb, CMatrix(x.cast<Complex>()));
}

inline CMatrix ijft(const JointBasis& jb, const CMatrix& xh) {
  detail::check_signal_shape(jb, xh.rows(), xh.cols(), "ijft");
  CMatrix y = xh;
  detail::dft_rows_inplace(y, /*inverse=*/true);
  return jb.graph.eigenvectors * y;
}

// Truncate a numerically-real matrix, rejecting responses whose output keeps a
// genuine imaginary part (i.e. responses not conjugate-symmetric in omega).
inline Matrix real_checked(const CMatrix& y, double reference_norm, const char* what) {
  const double residue = y.imag().norm();
  require(residue <= 1e-8 * std::max(reference_norm, 1e-300),
          std::string(what) + ": output has an imaginary residue (response must be "
                              "conjugate-symmetric in omega)");
  return y.real();
}

// Pointwise spectral multiplier: ijft(response .* jft(x)). The response is a
// real n_vertices x n_steps grid over (lambda_n, omega_tau).
inline CMatrix joint_filter_apply(const JointBasis& jb, const Matrix& response,
                                  const CMatrix& x) {
  detail::check_signal_shape(jb, response.rows(), response.cols(), "joint filter response");
  require(response.allFinite(), "joint filter response must be finite");
  CMatrix spectrum = jft(jb, x);
  spectrum.array() *= response.array().cast<Complex>();
  return ijft(jb, spectrum);
}

inline Matrix joint_filter_apply(const JointBasis& jb, const Matrix& response, const Matrix& x) {
  const CMatrix y = joint_filter_apply(jb, response, CMatrix(x.cast<Complex>()));
  return real_checked(y, x.norm(), "joint_filter_apply");
}

// The filter kernel localized at (vertex, t): the response applied to a
// Kronecker delta there. Atoms are complex in general.
inline CMatrix joint_localize(const JointBasis& jb, const Matrix& response, Index vertex,
                              Index t) {
  require(vertex >= 0 && vertex < jb.n_vertices(), "joint_localize: vertex index out of range");
  require(t >= 0 && t < jb.n_steps(), "joint_localize: time index out of range");
  CMatrix delta = CMatrix::Zero(jb.n_vertices(), jb.n_steps());
  delta(vertex, t) = 1.0;
  return joint_filter_apply(jb, response, delta);
}

// Product response h1(lambda) h2(omega), applied as a graph filter per column
// followed by a time filter per row.
inline Matrix separable_filter_apply(const JointBasis& jb, const Vector& graph_response,
                                     const Vector& time_response, const Matrix& x) {
  detail::check_signal_shape(jb, x.rows(), x.cols(), "separable_filter_apply");
  require(graph_response.size() == jb.n_vertices(),
          "separable_filter_apply: graph response length mismatch");
  require(time_response.size() == jb.n_steps(),
          "separable_filter_apply: time response length mismatch");
  require(graph_response.allFinite() && time_response.allFinite(),
          "separable_filter_apply: responses must be finite");

  const Matrix& u = jb.graph.eigenvectors;
  const Matrix graph_filtered = u * graph_response.asDiagonal() * (u.transpose() * x);
  CMatrix rows = graph_filtered.cast<Complex>();
  detail::dft_rows_inplace(rows, /*inverse=*/false);
  for (Index c = 0; c < rows.cols(); ++c) rows.col(c) *= time_response(c);
  detail::dft_rows_inplace(rows, /*inverse=*/true);
  return real_checked(rows, x.norm(), "separable_filter_apply");
}

// sum (lambda_n + lambda_{T,tau}) |X^hat(n, tau)|^2: the joint smoothness
// (Dirichlet) energy of the signal. Requires the laplacian eigenvalue mode.
inline double joint_quadratic_form(const JointBasis& jb, const Matrix& x) {
  detail::check_signal_shape(jb, x.rows(), x.cols(), "joint_quadratic_form");
  const Matrix response = jb.joint_laplacian_response();
  const CMatrix spectrum = jft(jb, x);
  return (response.array() * spectrum.array().abs2()).sum();
}

}  // namespace jtvsp
