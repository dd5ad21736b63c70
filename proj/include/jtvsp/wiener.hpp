#pragma once

#include "jtvsp/joint.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace jtvsp {

enum class OperatorKind { identity, mask, joint_filter, custom };

// Matrix-free linear map on vectorized signals, with an explicit adjoint.
struct LinearOperator {
  OperatorKind kind = OperatorKind::custom;
  Index domain = 0;  // input length (N*T for signal-domain operators)
  Index range = 0;   // output length
  std::function<Vector(const Vector&)> forward;
  std::function<Vector(const Vector&)> adjoint;
};

inline LinearOperator identity_operator(Index size) {
  require(size >= 1, "identity_operator: size must be positive");
  LinearOperator op;
  op.kind = OperatorKind::identity;
  op.domain = op.range = size;
  op.forward = op.adjoint = [size](const Vector& x) {
    require(x.size() == size, "identity operator: size mismatch");
    return x;
  };
  return op;
}

// Selection of the observed entries of an n x t signal, in vec order.
inline LinearOperator mask_operator(const BoolMatrix& mask) {
  const Index n = mask.rows();
  const Index t = mask.cols();
  require(n >= 1 && t >= 1, "mask_operator: empty mask");
  auto observed = std::make_shared<std::vector<Index>>();
  for (Index tt = 0; tt < t; ++tt)
    for (Index i = 0; i < n; ++i)
      if (mask(i, tt)) observed->push_back(tt * n + i);
  require(!observed->empty(), "mask_operator: mask has no observed entries");

  LinearOperator op;
  op.kind = OperatorKind::mask;
  op.domain = n * t;
  op.range = static_cast<Index>(observed->size());
  const Index domain = op.domain;
  op.forward = [observed, domain](const Vector& x) {
    require(x.size() == domain, "mask operator: size mismatch");
    Vector y(static_cast<Index>(observed->size()));
    for (std::size_t k = 0; k < observed->size(); ++k) y(static_cast<Index>(k)) = x((*observed)[k]);
    return y;
  };
  op.adjoint = [observed, domain](const Vector& y) {
    require(y.size() == static_cast<Index>(observed->size()),
            "mask operator adjoint: size mismatch");
    Vector x = Vector::Zero(domain);
    for (std::size_t k = 0; k < observed->size(); ++k) x((*observed)[k]) = y(static_cast<Index>(k));
    return x;
  };
  return op;
}

// A joint spectral multiplier as a vectorized operator. The response must be
// conjugate-symmetric in omega (so real signals map to real signals); such an
// operator is self-adjoint.
inline LinearOperator joint_filter_operator(const JointBasis& jb, const Matrix& response) {
  detail::check_signal_shape(jb, response.rows(), response.cols(), "joint_filter_operator");
  require(response.allFinite(), "joint_filter_operator: response must be finite");
  auto ctx = std::make_shared<const JointBasis>(jb);
  auto resp = std::make_shared<const Matrix>(response);
  LinearOperator op;
  op.kind = OperatorKind::joint_filter;
  op.domain = op.range = jb.size();
  const Index n = jb.n_vertices();
  const Index t = jb.n_steps();
  op.forward = op.adjoint = [ctx, resp, n, t](const Vector& x) {
    return vec(joint_filter_apply(*ctx, *resp, unvec(x, n, t)));
  };
  return op;
}

struct SolverOptions {
  double tol = 1e-8;    // relative residual target
  int max_iters = 2000;
  double f_max = 1e8;   // cap on Wiener penalization weights
};

struct SolveReport {
  Matrix solution;       // n_vertices x n_steps
  int iterations = 0;
  double residual = 0.0;  // final relative residual of the solved system
  bool converged = false;
};

namespace detail {

struct CgResult {
  Vector x;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Plain conjugate gradients on a symmetric positive (semi)definite operator.
// Stops on the relative residual; the reported residual is recomputed from
// scratch rather than trusted from the recurrence.
template <class Apply>
CgResult conjugate_gradient(Apply&& apply_op, const Vector& b, const SolverOptions& opts) {
  CgResult res;
  res.x = Vector::Zero(b.size());
  const double b_norm = b.norm();
  if (b_norm == 0.0) {
    res.converged = true;
    return res;
  }
  Vector r = b;
  Vector p = r;
  double rs = r.squaredNorm();
  const double stop = opts.tol * b_norm;
  while (res.iterations < opts.max_iters && std::sqrt(rs) > stop) {
    const Vector q = apply_op(p);
    const double pq = p.dot(q);
    if (!(pq > 0.0)) break;  // operator lost positive definiteness: singular system
    const double alpha = rs / pq;
    res.x += alpha * p;
    r -= alpha * q;
    const double rs_next = r.squaredNorm();
    p = r + (rs_next / rs) * p;
    rs = rs_next;
    ++res.iterations;
  }
  res.residual = (b - apply_op(res.x)).norm() / b_norm;
  res.converged = res.residual <= opts.tol;
  return res;
}

inline void check_operator(const JointBasis& jb, const LinearOperator& a, const Vector& y,
                           const char* what) {
  require(static_cast<bool>(a.forward) && static_cast<bool>(a.adjoint),
          std::string(what) + ": operator must define forward and adjoint");
  require(a.domain == jb.size(), std::string(what) + ": operator domain must be N*T");
  require(y.size() == a.range, std::string(what) + ": observation length must match the range");
  require(y.allFinite(), std::string(what) + ": observations must be finite");
}

}  // namespace detail

// Penalization weights f = sqrt(h_w / h_x), capped at f_max. Modes the signal
// never excites (h_x == 0) get the cap when noise lives there and no penalty
// when nothing does.
inline Matrix wiener_weights(const Matrix& h_x, const Matrix& h_w, double f_max = 1e8) {
  require(h_x.rows() == h_w.rows() && h_x.cols() == h_w.cols(),
          "wiener_weights: density shapes must match");
  require(h_x.allFinite() && h_x.minCoeff() >= 0.0, "wiener_weights: h_x must be nonnegative");
  require(h_w.allFinite() && h_w.minCoeff() >= 0.0, "wiener_weights: h_w must be nonnegative");
  require(f_max > 0.0, "wiener_weights: f_max must be positive");
  Matrix f(h_x.rows(), h_x.cols());
  for (Index c = 0; c < f.cols(); ++c) {
    for (Index r = 0; r < f.rows(); ++r) {
      const double hx = h_x(r, c);
      const double hw = h_w(r, c);
      if (hx > 0.0)
        f(r, c) = std::min(std::sqrt(hw / hx), f_max);
      else
        f(r, c) = hw > 0.0 ? f_max : 0.0;
    }
  }
  return f;
}

// Regularized recovery: minimize |A x - y|^2 + |f(x - m)|^2 over x, where f
// acts as a joint spectral multiplier with weights sqrt(h_w / h_x) and m is
// the constant model mean. Solved by conjugate gradients on the normal
// equations for the centred variable.
inline SolveReport wiener_solve(const JointBasis& jb, const LinearOperator& a, const Vector& y,
                                const Matrix& h_x, const Matrix& h_w, double mean_coefficient = 0.0,
                                const SolverOptions& opts = {}) {
  detail::check_operator(jb, a, y, "wiener_solve");
  detail::check_signal_shape(jb, h_x.rows(), h_x.cols(), "wiener_solve h_x");
  detail::check_signal_shape(jb, h_w.rows(), h_w.cols(), "wiener_solve h_w");
  require(std::isfinite(mean_coefficient), "wiener_solve: mean must be finite");
  const Index n = jb.n_vertices();
  const Index t = jb.n_steps();

  const Matrix f = wiener_weights(h_x, h_w, opts.f_max);
  const Matrix f_sq = f.array().square().matrix();
  const auto apply = [&](const Vector& v) {
    Vector out = a.adjoint(a.forward(v));
    out += vec(joint_filter_apply(jb, f_sq, unvec(v, n, t)));
    return out;
  };

  Vector b;
  if (mean_coefficient != 0.0) {
    const Vector m = Vector::Constant(jb.size(), mean_coefficient);
    b = a.adjoint(y - a.forward(m));
  } else {
    b = a.adjoint(y);
  }
  auto cg = detail::conjugate_gradient(apply, b, opts);
  SolveReport report;
  report.solution = (unvec(cg.x, n, t).array() + mean_coefficient).matrix();
  report.iterations = cg.iterations;
  report.residual = cg.residual;
  report.converged = cg.converged;
  return report;
}

// When the observation operator is itself a joint spectral multiplier with
// response a, the regularized recovery has the closed form
// x^hat = filter(a h_x / (a^2 h_x + h_w), y), evaluated per joint frequency
// (0/0 treated as 0).
inline Matrix joint_wiener_closed_form(const JointBasis& jb, const Matrix& a_response,
                                       const Matrix& h_x, const Matrix& h_w, const Matrix& y) {
  detail::check_signal_shape(jb, a_response.rows(), a_response.cols(), "closed-form a");
  detail::check_signal_shape(jb, h_x.rows(), h_x.cols(), "closed-form h_x");
  detail::check_signal_shape(jb, h_w.rows(), h_w.cols(), "closed-form h_w");
  detail::check_signal_shape(jb, y.rows(), y.cols(), "closed-form observation");
  require(a_response.allFinite(), "closed-form: a must be finite");
  require(h_x.allFinite() && h_x.minCoeff() >= 0.0, "closed-form: h_x must be nonnegative");
  require(h_w.allFinite() && h_w.minCoeff() >= 0.0, "closed-form: h_w must be nonnegative");

  Matrix shrink(h_x.rows(), h_x.cols());
  for (Index c = 0; c < shrink.cols(); ++c) {
    for (Index r = 0; r < shrink.rows(); ++r) {
      const double av = a_response(r, c);
      const double num = av * h_x(r, c);
      const double den = av * av * h_x(r, c) + h_w(r, c);
      shrink(r, c) = den > 0.0 ? num / den : 0.0;
    }
  }
  return joint_filter_apply(jb, shrink, y);
}

// Noise-free interpolation of masked observations under a signal density:
// among all signals matching the observations exactly, pick the one of
// minimal h_x-weighted spectral energy. Solved in dual form,
// (A h_x(.) A^T) mu = y, x = h_x(.) A^T mu, so every CG iterate already
// satisfies the constraints in the limit.
inline SolveReport wiener_solve_noiseless(const JointBasis& jb, const LinearOperator& a,
                                          const Vector& y, const Matrix& h_x,
                                          const SolverOptions& opts = {}) {
  detail::check_operator(jb, a, y, "wiener_solve_noiseless");
  require(a.kind == OperatorKind::mask || a.kind == OperatorKind::identity,
          "wiener_solve_noiseless expects a masking (selection) operator");
  detail::check_signal_shape(jb, h_x.rows(), h_x.cols(), "noiseless h_x");
  require(h_x.allFinite() && h_x.minCoeff() >= 0.0, "noiseless: h_x must be nonnegative");
  const Index n = jb.n_vertices();
  const Index t = jb.n_steps();

  const auto apply = [&](const Vector& mu) {
    return a.forward(vec(joint_filter_apply(jb, h_x, unvec(a.adjoint(mu), n, t))));
  };
  auto cg = detail::conjugate_gradient(apply, y, opts);
  SolveReport report;
  report.solution = unvec(vec(joint_filter_apply(jb, h_x, unvec(a.adjoint(cg.x), n, t))), n, t);
  report.iterations = cg.iterations;
  report.residual = cg.residual;  // relative constraint violation |A x - y| / |y|
  report.converged = cg.converged;
  return report;
}

// Classical Laplacian-regularized recovery: minimize |A x - y|^2 + alpha *
// <x, L_J x>. Requires the laplacian eigenvalue mode.
inline SolveReport tikhonov_solve(const JointBasis& jb, const LinearOperator& a, const Vector& y,
                                  double alpha, const SolverOptions& opts = {}) {
  detail::check_operator(jb, a, y, "tikhonov_solve");
  require(std::isfinite(alpha) && alpha >= 0.0, "tikhonov_solve: alpha must be nonnegative");
  const Index n = jb.n_vertices();
  const Index t = jb.n_steps();
  const Matrix lap = jb.joint_laplacian_response();  // rejects lag-mode bases

  const auto apply = [&](const Vector& v) {
    Vector out = a.adjoint(a.forward(v));
    if (alpha > 0.0) out += alpha * vec(joint_filter_apply(jb, lap, unvec(v, n, t)));
    return out;
  };
  auto cg = detail::conjugate_gradient(apply, a.adjoint(y), opts);
  SolveReport report;
  report.solution = unvec(cg.x, n, t);
  report.iterations = cg.iterations;
  report.residual = cg.residual;
  report.converged = cg.converged;
  return report;
}

// White observation noise of standard deviation sigma as a flat density.
inline Matrix white_noise_density(Index n_vertices, Index n_steps, double sigma) {
  require(n_vertices >= 1 && n_steps >= 1, "white_noise_density: empty grid");
  require(std::isfinite(sigma) && sigma >= 0.0, "white_noise_density: sigma must be nonnegative");
  return Matrix::Constant(n_vertices, n_steps, sigma * sigma);
}

}  // namespace jtvsp
