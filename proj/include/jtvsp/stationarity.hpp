#pragma once

#include "jtvsp/joint.hpp"
#include "jtvsp/random.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace jtvsp {

// Second-order model of a joint wide-sense stationary process: a constant
// mean plus a nonnegative power density over the joint frequency grid.
struct JwssModel {
  double mean_coefficient = 0.0;
  Matrix jpsd;  // n_vertices x n_steps, entrywise >= 0
};

inline void validate_model(const JointBasis& jb, const JwssModel& model) {
  detail::check_signal_shape(jb, model.jpsd.rows(), model.jpsd.cols(), "jpsd");
  require(model.jpsd.allFinite(), "jpsd must be finite");
  require(model.jpsd.minCoeff() >= 0.0, "jpsd must be nonnegative");
  require(std::isfinite(model.mean_coefficient), "mean coefficient must be finite");
}

// Draw realizations by colouring white noise with the square-root response:
// X_r = c + filter(sqrt(jpsd), W_r). Realization r uses substream r of `seed`,
// so any prefix of the output is reproducible independently of n_realizations.
inline std::vector<Matrix> synthesize_jwss(const JointBasis& jb, const JwssModel& model,
                                           int n_realizations, std::uint64_t seed,
                                           NoiseKind kind = NoiseKind::gaussian) {
  validate_model(jb, model);
  require(n_realizations >= 1, "need at least one realization");
  const Matrix amplitude = model.jpsd.cwiseSqrt();
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(n_realizations));
  for (int r = 0; r < n_realizations; ++r) {
    RandomStream rng(seed, static_cast<std::uint64_t>(r));
    const Matrix w = white_noise_matrix(rng, jb.n_vertices(), jb.n_steps(), kind);
    Matrix x = joint_filter_apply(jb, amplitude, w);
    x.array() += model.mean_coefficient;
    out.push_back(std::move(x));
  }
  return out;
}

// Per-mode sample variance of the joint spectra: the diagonal of the sample
// covariance rotated into the joint basis (n-1 normalization).
inline Matrix empirical_jpsd(const JointBasis& jb, const std::vector<Matrix>& samples) {
  require(samples.size() >= 2, "empirical_jpsd needs at least two samples");
  Matrix mean = Matrix::Zero(jb.n_vertices(), jb.n_steps());
  for (const Matrix& x : samples) {
    detail::check_signal_shape(jb, x.rows(), x.cols(), "empirical_jpsd sample");
    mean += x;
  }
  mean /= static_cast<double>(samples.size());
  Matrix acc = Matrix::Zero(jb.n_vertices(), jb.n_steps());
  for (const Matrix& x : samples) acc += jft(jb, Matrix(x - mean)).cwiseAbs2();
  return acc / static_cast<double>(samples.size() - 1);
}

struct StationarityReport {
  double offdiag_ratio = 0.0;            // off-diagonal mass of the rotated covariance
  double mean_nullspace_residual = 0.0;  // how far the mean is from the Laplacian nullspace
  bool stationary = false;
};

// Test whether samples look jointly wide-sense stationary: the sample
// covariance should diagonalize in the joint basis and the sample mean should
// lie in the joint Laplacian nullspace (constant over vertices and time).
//
// Uses the unitary invariance of the Frobenius norm: the rotated covariance
// has diagonal equal to empirical_jpsd, so the off-diagonal mass is
// sqrt(|Sigma|_F^2 - |diag|^2) without forming the dense joint basis.
inline StationarityReport jwss_diagnostic(const JointBasis& jb,
                                          const std::vector<Matrix>& samples,
                                          double tol = 0.15) {
  require(samples.size() >= 2, "jwss_diagnostic needs at least two samples");
  require(jb.size() <= 4096, "jwss_diagnostic forms a dense covariance; limited to NT <= 4096");
  const Index nt = jb.size();
  const auto r = static_cast<Index>(samples.size());

  Matrix data(nt, r);
  for (Index c = 0; c < r; ++c) {
    const Matrix& x = samples[static_cast<std::size_t>(c)];
    detail::check_signal_shape(jb, x.rows(), x.cols(), "jwss_diagnostic sample");
    data.col(c) = vec(x);
  }
  const double rms = data.norm() / std::sqrt(static_cast<double>(r));
  const Vector mean = data.rowwise().mean();
  data.colwise() -= mean;
  const Matrix covariance = (data * data.transpose()) / static_cast<double>(r - 1);

  StationarityReport report;
  const double total = covariance.norm();
  if (total > 0.0) {
    const double diag_sq = empirical_jpsd(jb, samples).squaredNorm();
    report.offdiag_ratio = std::sqrt(std::max(0.0, total * total - diag_sq)) / total;
  }
  // Scale the mean test by the data magnitude as well, so the sampling noise
  // in a near-zero sample mean cannot masquerade as a nonstationary mean.
  const double scale = std::max(mean.norm(), rms);
  if (scale > 0.0) {
    const Matrix response = jb.joint_laplacian_response();
    const Matrix lap_mean = joint_filter_apply(jb, response, unvec(mean, jb.n_vertices(), jb.n_steps()));
    report.mean_nullspace_residual = lap_mean.norm() / scale;
  }
  report.stationary =
      report.offdiag_ratio <= tol && report.mean_nullspace_residual <= tol;
  return report;
}

// Time-only stationarity: every per-vertex row covariance should diagonalize
// in the DFT basis, and each row mean should be constant over time. Reports
// the worst vertex.
inline StationarityReport twss_diagnostic(const std::vector<Matrix>& samples,
                                          double tol = 0.15) {
  require(samples.size() >= 2, "twss_diagnostic needs at least two samples");
  const Index n = samples.front().rows();
  const Index t = samples.front().cols();
  require(t <= 2048, "twss_diagnostic forms dense T x T covariances; limited to T <= 2048");
  const auto r = static_cast<Index>(samples.size());

  StationarityReport report;
  for (Index i = 0; i < n; ++i) {
    Matrix rows(t, r);
    for (Index c = 0; c < r; ++c) {
      const Matrix& x = samples[static_cast<std::size_t>(c)];
      require(x.rows() == n && x.cols() == t, "twss_diagnostic: inconsistent sample shapes");
      rows.col(c) = x.row(i).transpose();
    }
    const double rms = rows.norm() / std::sqrt(static_cast<double>(r));
    const Vector mean = rows.rowwise().mean();
    rows.colwise() -= mean;
    const Matrix covariance = (rows * rows.transpose()) / static_cast<double>(r - 1);
    const double total = covariance.norm();
    if (total > 0.0) {
      Vector diag = Vector::Zero(t);
      for (Index c = 0; c < r; ++c) diag += dft(CVector(rows.col(c).cast<Complex>())).cwiseAbs2();
      diag /= static_cast<double>(r - 1);
      const double ratio = std::sqrt(std::max(0.0, total * total - diag.squaredNorm())) / total;
      report.offdiag_ratio = std::max(report.offdiag_ratio, ratio);
    }
    const double scale = std::max(mean.norm(), rms);
    if (scale > 0.0) {
      const Vector centered = (mean.array() - mean.mean()).matrix();
      report.mean_nullspace_residual =
          std::max(report.mean_nullspace_residual, centered.norm() / scale);
    }
  }
  report.stationary =
      report.offdiag_ratio <= tol && report.mean_nullspace_residual <= tol;
  return report;
}

// Vertex-only stationarity: every per-step column covariance should
// diagonalize in the graph basis, and each column mean should lie in the
// Laplacian nullspace. Reports the worst time step.
inline StationarityReport vwss_diagnostic(const GraphSpectrum& spec,
                                          const std::vector<Matrix>& samples,
                                          double tol = 0.15) {
  require(samples.size() >= 2, "vwss_diagnostic needs at least two samples");
  const Index n = samples.front().rows();
  const Index t = samples.front().cols();
  require(n == spec.n_vertices(), "vwss_diagnostic: sample rows must match the vertex count");
  const auto r = static_cast<Index>(samples.size());

  StationarityReport report;
  for (Index step = 0; step < t; ++step) {
    Matrix cols(n, r);
    for (Index c = 0; c < r; ++c) {
      const Matrix& x = samples[static_cast<std::size_t>(c)];
      require(x.rows() == n && x.cols() == t, "vwss_diagnostic: inconsistent sample shapes");
      cols.col(c) = x.col(step);
    }
    const double rms = cols.norm() / std::sqrt(static_cast<double>(r));
    const Vector mean = cols.rowwise().mean();
    cols.colwise() -= mean;
    const Matrix covariance = (cols * cols.transpose()) / static_cast<double>(r - 1);
    const double total = covariance.norm();
    if (total > 0.0) {
      const Matrix rotated = spec.eigenvectors.transpose() * cols;
      const Vector diag = rotated.cwiseAbs2().rowwise().sum() / static_cast<double>(r - 1);
      const double ratio = std::sqrt(std::max(0.0, total * total - diag.squaredNorm())) / total;
      report.offdiag_ratio = std::max(report.offdiag_ratio, ratio);
    }
    const double scale = std::max(mean.norm(), rms);
    if (scale > 0.0) {
      const Vector lap_mean = graph_filter(spec, Vector(spec.eigenvalues), mean);
      report.mean_nullspace_residual =
          std::max(report.mean_nullspace_residual, lap_mean.norm() / scale);
    }
  }
  report.stationary =
      report.offdiag_ratio <= tol && report.mean_nullspace_residual <= tol;
  return report;
}

// Passing a JWSS process through a joint filter scales the density by the
// squared response and the mean by the response at the DC grid point.
inline Matrix filter_psd_transform(const Matrix& filter_response, const Matrix& jpsd_in) {
  require(filter_response.rows() == jpsd_in.rows() && filter_response.cols() == jpsd_in.cols(),
          "filter_psd_transform: shape mismatch");
  require(filter_response.allFinite(), "filter_psd_transform: response must be finite");
  require(jpsd_in.allFinite() && jpsd_in.minCoeff() >= 0.0,
          "filter_psd_transform: input density must be nonnegative");
  return (filter_response.array().square() * jpsd_in.array()).matrix();
}

inline JwssModel filter_psd_transform(const Matrix& filter_response, const JwssModel& model) {
  JwssModel out;
  out.jpsd = filter_psd_transform(filter_response, model.jpsd);
  out.mean_coefficient = filter_response(0, 0) * model.mean_coefficient;
  return out;
}

// Temporal power density seen by one vertex: gamma_i(omega_tau) =
// sum_n jpsd(n, tau) u_n(i)^2.
inline Vector marginal_tpsd(const JointBasis& jb, const JwssModel& model, Index vertex) {
  validate_model(jb, model);
  require(vertex >= 0 && vertex < jb.n_vertices(), "marginal_tpsd: vertex index out of range");
  const Vector usq = jb.graph.eigenvectors.row(vertex).transpose().array().square();
  return model.jpsd.transpose() * usq;
}

// Vertex power density seen by one time step: (1/T) sum_tau jpsd(n, tau).
// A JWSS process has the same column density at every step; the index is
// validated and otherwise unused.
inline Vector marginal_vpsd(const JointBasis& jb, const JwssModel& model, Index t) {
  validate_model(jb, model);
  require(t >= 0 && t < jb.n_steps(), "marginal_vpsd: time index out of range");
  return model.jpsd.rowwise().mean();
}

}  // namespace jtvsp
