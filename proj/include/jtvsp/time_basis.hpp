#pragma once

#include "jtvsp/common.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <string>

namespace jtvsp {

// How the temporal frequencies enter joint (graph + time) eigenvalues:
//   laplacian: lambda_T = real(1 - e^{-j omega}) = 1 - cos(omega), in [0, 2]
//   lag:       lambda_T = e^{-j omega}, on the unit circle
enum class TimeEigenvalueMode { laplacian, lag };

// Fourier machinery on a circular time axis of T steps.
struct TimeBasis {
  Index n_steps = 0;
  TimeEigenvalueMode mode = TimeEigenvalueMode::laplacian;
  Vector omega;  // angular frequencies 2 pi tau / T, omega[0] = 0

  TimeBasis() = default;
  explicit TimeBasis(Index t_steps, TimeEigenvalueMode m = TimeEigenvalueMode::laplacian)
      : n_steps(t_steps), mode(m) {
    require(t_steps >= 1, "time basis needs at least one step");
    omega.resize(t_steps);
    for (Index t = 0; t < t_steps; ++t)
      omega(t) = 2.0 * M_PI * static_cast<double>(t) / static_cast<double>(t_steps);
  }

  Vector laplacian_eigenvalues() const {
    require(mode == TimeEigenvalueMode::laplacian,
            "time basis is in lag mode; laplacian eigenvalues undefined");
    return (1.0 - omega.array().cos()).matrix();
  }

  CVector lag_eigenvalues() const {
    require(mode == TimeEigenvalueMode::lag,
            "time basis is in laplacian mode; lag eigenvalues undefined");
    CVector out(n_steps);
    for (Index t = 0; t < n_steps; ++t) out(t) = std::exp(Complex(0.0, -omega(t)));
    return out;
  }
};

// Unitary DFT: dft(s)[tau] = (1/sqrt(T)) sum_t s(t) e^{-2 pi j t tau / T}.
inline CVector dft(const CVector& s) {
  const Index t = s.size();
  require(t >= 1, "dft: empty signal");
  if (t == 1) return s;
  Eigen::FFT<double> fft;
  CVector out(t);
  fft.fwd(out, s);
  return out / std::sqrt(static_cast<double>(t));
}

inline CVector dft(const Vector& s) { return dft(CVector(s.cast<Complex>())); }

// Unitary inverse via conj-forward-conj, so both directions share one code path.
inline CVector idft(const CVector& sh) { return dft(CVector(sh.conjugate())).conjugate(); }

// The unitary DFT matrix F (symmetric). The time Fourier basis is U_T = F^H.
inline CMatrix dft_matrix(Index t_steps) {
  require(t_steps >= 1, "dft_matrix: need at least one step");
  CMatrix f(t_steps, t_steps);
  const double scale = 1.0 / std::sqrt(static_cast<double>(t_steps));
  for (Index r = 0; r < t_steps; ++r)
    for (Index c = 0; c < t_steps; ++c)
      f(r, c) = scale * std::exp(Complex(0.0, -2.0 * M_PI * static_cast<double>(r) *
                                                  static_cast<double>(c) /
                                                  static_cast<double>(t_steps)));
  return f;
}

inline CMatrix fourier_basis(Index t_steps) { return dft_matrix(t_steps).adjoint(); }

namespace detail {

// Unitary DFT (or its inverse) along every row, reusing one FFT plan.
inline void dft_rows_inplace(CMatrix& x, bool inverse) {
  const Index t = x.cols();
  if (t <= 1) return;
  Eigen::FFT<double> fft;
  const double scale = 1.0 / std::sqrt(static_cast<double>(t));
  CVector in(t), out(t);
  for (Index r = 0; r < x.rows(); ++r) {
    if (inverse)
      in = x.row(r).conjugate().transpose();
    else
      in = x.row(r).transpose();
    fft.fwd(out, in);
    if (inverse)
      x.row(r) = (scale * out.conjugate()).transpose();
    else
      x.row(r) = (scale * out).transpose();
  }
}

}  // namespace detail

// Analysis window: `values` samples the support [-M/2, M/2) in ascending
// order, so values[M/2] sits at offset 0; `hop` is the frame advance.
struct Window {
  Vector values;
  Index hop = 0;

  Index n_bands() const { return values.size(); }
};

inline void validate_window(const Window& w) {
  const Index m = w.n_bands();
  require(m >= 1, "window must be non-empty");
  require(w.values.allFinite(), "window values must be finite");
  require(w.values.norm() > 0.0, "window must have positive energy");
  require(w.hop >= 1 && w.hop <= m, "window hop must lie in [1, M]");
}

// g(t) = sin(pi/2 * cos^2(pi t / M)) with hop M/2: a tight half-overlap pair,
// g(t)^2 + g(t - M/2)^2 = 1, so the squared frames partition unity.
inline Window iterated_sine_window(Index m) {
  require(m >= 2 && m % 2 == 0, "iterated sine window needs an even length");
  Window w;
  w.values.resize(m);
  for (Index s = 0; s < m; ++s) {
    const double t = static_cast<double>(s) - static_cast<double>(m) / 2.0;
    const double c = std::cos(M_PI * t / static_cast<double>(m));
    w.values(s) = std::sin(0.5 * M_PI * c * c);
  }
  w.hop = m / 2;
  return w;
}

inline Window rectangular_window(Index m, Index hop) {
  Window w{Vector::Ones(m), hop};
  validate_window(w);
  return w;
}

// Circular short-time Fourier transform. Frame k (k = 0 .. T/hop - 1) windows
// the signal with g centred at step hop*k (circularly) and takes the M-band
// DFT: out(k, m) = sum_t s(t) g_k(t) e^{-2 pi j t m / M}. Implemented by
// folding each windowed segment modulo M and running one M-point transform.
inline CMatrix stft(const Vector& s, const Window& w) {
  validate_window(w);
  const Index t_len = s.size();
  const Index m = w.n_bands();
  const Index a = w.hop;
  require(t_len >= m, "stft: signal shorter than the window");
  require(s.allFinite(), "stft: signal must be finite");

  const Index frames = t_len / a;
  CMatrix out(frames, m);
  Eigen::FFT<double> fft;
  CVector folded(m), row(m);
  for (Index k = 0; k < frames; ++k) {
    folded.setZero();
    for (Index widx = 0; widx < m; ++widx) {
      Index t0 = (widx - 1 - a + a * k) % t_len;
      if (t0 < 0) t0 += t_len;
      folded(t0 % m) += s(t0) * w.values(widx);
    }
    if (m == 1) {
      out(k, 0) = folded(0);
      continue;
    }
    fft.fwd(row, folded);
    out.row(k) = row.transpose();
  }
  return out;
}

// Translate a frequency response to time position `shift`: the inverse DFT of
// the response, circularly rotated. With response == 1 this is sqrt(T) times
// a Kronecker delta at `shift`.
inline CVector time_localize(const TimeBasis& tb, const Vector& response, Index shift) {
  require(response.size() == tb.n_steps, "time_localize: response length mismatch");
  require(response.allFinite(), "time_localize: response must be finite");
  const CVector base = idft(CVector(response.cast<Complex>()));
  const Index t = tb.n_steps;
  const Index s = ((shift % t) + t) % t;
  CVector out(t);
  for (Index i = 0; i < t; ++i) out((i + s) % t) = base(i);
  return out;
}

}  // namespace jtvsp
