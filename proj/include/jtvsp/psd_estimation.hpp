#pragma once

#include "jtvsp/graph_spectrum.hpp"
#include "jtvsp/time_basis.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace jtvsp {

enum class JpsdInterpolation { linear_circular, nearest };

// Joint power density sampled on the (lambda_n, omega_m) grid with M frequency
// bands at omega_m = 2 pi m / M. Band values extend to a full frequency grid
// through circular interpolation.
struct Jpsd {
  Matrix values;  // n_vertices x n_bands, nonnegative
  JpsdInterpolation interpolation = JpsdInterpolation::linear_circular;

  Index n_bands() const { return values.cols(); }
  double band_frequency(Index m) const {
    return 2.0 * M_PI * static_cast<double>(m) / static_cast<double>(values.cols());
  }
};

struct JpsdEstimationOptions {
  // Subtract the global (vertex-and-time) mean before estimating. When false,
  // the signal must already be centred.
  bool remove_mean = true;
};

namespace detail {

inline Matrix centered_for_estimation(const Matrix& x, const JpsdEstimationOptions& opts,
                                      const char* what) {
  require(x.size() > 0 && x.allFinite(), std::string(what) + ": signal must be finite");
  const double mean = x.mean();
  if (opts.remove_mean) return (x.array() - mean).matrix();
  const double rms = x.norm() / std::sqrt(static_cast<double>(x.size()));
  require(std::abs(mean) <= 1e-9 * rms,
          std::string(what) + ": signal mean must be removed before spectral estimation");
  return x;
}

}  // namespace detail

// Windowed joint spectra: entry [n](k, m) is the STFT of graph-frequency
// component n at frame k, band m. The graph transform commutes with the
// per-vertex STFTs, so vertices are rotated first.
inline std::vector<CMatrix> coefficients_tensor(const Matrix& x, const GraphSpectrum& spec,
                                                const Window& w) {
  require(x.rows() == spec.n_vertices(),
          "coefficients_tensor: signal rows must match the vertex count");
  require(x.allFinite(), "coefficients_tensor: signal must be finite");
  const Matrix rotated = spec.eigenvectors.transpose() * x;
  std::vector<CMatrix> out;
  out.reserve(static_cast<std::size_t>(rotated.rows()));
  for (Index n = 0; n < rotated.rows(); ++n)
    out.push_back(stft(Vector(rotated.row(n).transpose()), w));
  return out;
}

namespace detail {

// Welch average of squared band magnitudes, scaled so unit-variance white
// input gives density 1 when the hop divides the signal length.
inline Matrix welch_bands(const std::vector<CMatrix>& tensor, const Window& w, Index t_len) {
  const Index m = w.n_bands();
  const double scale =
      static_cast<double>(w.hop) / (static_cast<double>(t_len) * w.values.squaredNorm());
  Matrix values = Matrix::Zero(static_cast<Index>(tensor.size()), m);
  for (std::size_t n = 0; n < tensor.size(); ++n) {
    const CMatrix& frames = tensor[n];
    for (Index k = 0; k < frames.rows(); ++k)
      values.row(static_cast<Index>(n)) += frames.row(k).cwiseAbs2();
  }
  return values * scale;
}

}  // namespace detail

// Windowed-average JPSD estimate from one realization.
inline Jpsd estimate_jpsd(const Matrix& x_in, const GraphSpectrum& spec, const Window& w,
                          const JpsdEstimationOptions& opts = {}) {
  const Matrix x = detail::centered_for_estimation(x_in, opts, "estimate_jpsd");
  const auto tensor = coefficients_tensor(x, spec, w);
  Jpsd out;
  out.values = detail::welch_bands(tensor, w, x.cols());
  return out;
}

// Multi-realization estimate: the average of per-realization estimates.
inline Jpsd estimate_jpsd(const std::vector<Matrix>& xs, const GraphSpectrum& spec,
                          const Window& w, const JpsdEstimationOptions& opts = {}) {
  require(!xs.empty(), "estimate_jpsd: need at least one realization");
  Jpsd acc = estimate_jpsd(xs.front(), spec, w, opts);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const Jpsd next = estimate_jpsd(xs[i], spec, w, opts);
    require(next.values.rows() == acc.values.rows() && next.values.cols() == acc.values.cols(),
            "estimate_jpsd: realizations must share dimensions");
    acc.values += next.values;
  }
  acc.values /= static_cast<double>(xs.size());
  return acc;
}

// Per-vertex temporal densities (no graph rotation): row i is the Welch
// spectrum of time series i. Same banding and scaling as estimate_jpsd.
inline Jpsd welch_tpsd(const Matrix& x_in, const Window& w,
                       const JpsdEstimationOptions& opts = {}) {
  const Matrix x = detail::centered_for_estimation(x_in, opts, "welch_tpsd");
  std::vector<CMatrix> tensor;
  tensor.reserve(static_cast<std::size_t>(x.rows()));
  for (Index i = 0; i < x.rows(); ++i) tensor.push_back(stft(Vector(x.row(i).transpose()), w));
  Jpsd out;
  out.values = detail::welch_bands(tensor, w, x.cols());
  return out;
}

// Density column at an arbitrary angular frequency. Band centres reproduce the
// stored columns exactly; in between, values follow the configured rule on the
// circle (so interpolation wraps from the last band back to the first).
inline Vector interpolate(const Jpsd& jpsd, double omega) {
  const Index m = jpsd.n_bands();
  require(m >= 1 && jpsd.values.size() > 0, "interpolate: empty density");
  require(std::isfinite(omega), "interpolate: frequency must be finite");
  const double two_pi = 2.0 * M_PI;
  double wrapped = std::fmod(omega, two_pi);
  if (wrapped < 0.0) wrapped += two_pi;
  const double position = wrapped * static_cast<double>(m) / two_pi;
  const double base = std::floor(position);
  const double frac = position - base;
  const Index i0 = static_cast<Index>(base) % m;
  const Index i1 = (i0 + 1) % m;
  if (jpsd.interpolation == JpsdInterpolation::nearest)
    return jpsd.values.col(frac < 0.5 ? i0 : i1);
  return ((1.0 - frac) * jpsd.values.col(i0) + frac * jpsd.values.col(i1)).cwiseMax(0.0);
}

// Evaluate the density on a T-point frequency grid. With t_steps == n_bands
// this returns the stored values exactly.
inline Matrix upsample_to_grid(const Jpsd& jpsd, Index t_steps) {
  require(t_steps >= 1, "upsample_to_grid: need at least one step");
  Matrix out(jpsd.values.rows(), t_steps);
  const double two_pi = 2.0 * M_PI;
  for (Index tau = 0; tau < t_steps; ++tau)
    out.col(tau) = interpolate(jpsd, two_pi * static_cast<double>(tau) /
                                         static_cast<double>(t_steps));
  return out;
}

}  // namespace jtvsp
