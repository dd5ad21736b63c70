#include "testutil.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace jtvsp;
using testutil::dense_joint_basis;
using testutil::random_joint_basis;
using testutil::random_matrix;

namespace {

// materialize any operator column by column, for the dense oracles
Matrix dense_of(const LinearOperator& a) {
  Matrix m(a.range, a.domain);
  for (Index j = 0; j < a.domain; ++j) {
    Vector e = Vector::Zero(a.domain);
    e(j) = 1.0;
    m.col(j) = a.forward(e);
  }
  return m;
}

Matrix symmetric_density(const JointBasis& jb, double floor = 0.2) {
  Matrix h(jb.n_vertices(), jb.n_steps());
  for (Index n = 0; n < jb.n_vertices(); ++n)
    for (Index tau = 0; tau < jb.n_steps(); ++tau)
      h(n, tau) = floor + 1.0 / (1.0 + jb.graph.eigenvalues(n) +
                                 (1.0 - std::cos(jb.time.omega(tau))));
  return h;
}

// dense signal covariance U diag(vec h) U^*
Matrix dense_covariance(const JointBasis& jb, const Matrix& h) {
  const CMatrix u = dense_joint_basis(jb);
  CVector d(jb.size());
  for (Index tau = 0; tau < jb.n_steps(); ++tau)
    for (Index n = 0; n < jb.n_vertices(); ++n) d(tau * jb.n_vertices() + n) = h(n, tau);
  const CMatrix sigma = u * d.asDiagonal() * u.adjoint();
  return sigma.real();
}

BoolMatrix checkered_mask(Index n, Index t, std::uint64_t seed, double keep = 0.6) {
  RandomStream rng(seed, 0);
  BoolMatrix mask(n, t);
  for (Index c = 0; c < t; ++c)
    for (Index r = 0; r < n; ++r) mask(r, c) = rng.uniform01() < keep;
  mask(0, 0) = true;  // never fully empty
  return mask;
}

}  // namespace

TEST(Operators, MaskSelectsAndAdjointScatters) {
  const Index n = 5, t = 6;
  const BoolMatrix mask = checkered_mask(n, t, 3);
  const LinearOperator a = mask_operator(mask);
  const Matrix x = random_matrix(n, t, 5);
  const Vector y = a.forward(vec(x));
  Index k = 0;
  for (Index tt = 0; tt < t; ++tt) {
    for (Index i = 0; i < n; ++i) {
      if (mask(i, tt)) {
        EXPECT_EQ(y(k++), x(i, tt));
      }
    }
  }
  EXPECT_EQ(k, a.range);
  // adjoint property on random pairs
  const Vector u = random_matrix(n * t, 1, 7).col(0);
  const Vector v = random_matrix(a.range, 1, 11).col(0);
  EXPECT_NEAR(a.forward(u).dot(v), u.dot(a.adjoint(v)), 1e-12);
  EXPECT_THROW(mask_operator(BoolMatrix(BoolMatrix::Constant(2, 2, false))), input_error);
}

TEST(Operators, JointFilterIsSelfAdjoint) {
  const JointBasis jb = random_joint_basis(4, 6, 13);
  const Matrix h = symmetric_density(jb);
  const LinearOperator a = joint_filter_operator(jb, h);
  const Vector u = random_matrix(jb.size(), 1, 17).col(0);
  const Vector v = random_matrix(jb.size(), 1, 19).col(0);
  EXPECT_NEAR(a.forward(u).dot(v), u.dot(a.adjoint(v)), 1e-10);
  EXPECT_LT((a.forward(u) - vec(joint_filter_apply(jb, h, unvec(u, 4, 6)))).cwiseAbs().maxCoeff(),
            1e-14);
}

TEST(ConjugateGradient, SolvesAndReportsHonestly) {
  const SolverOptions opts{1e-12, 50, 1e8};
  const auto spd = [](const Vector& v) {
    Vector out(2);
    out << 2.0 * v(0), 3.0 * v(1);
    return out;
  };
  Vector b(2);
  b << 4.0, 9.0;
  const auto res = detail::conjugate_gradient(spd, b, opts);
  EXPECT_TRUE(res.converged);
  EXPECT_LE(res.iterations, 2);
  EXPECT_NEAR(res.x(0), 2.0, 1e-10);
  EXPECT_NEAR(res.x(1), 3.0, 1e-10);

  // zero right-hand side converges immediately to zero
  const auto zero = detail::conjugate_gradient(spd, Vector(Vector::Zero(2)), opts);
  EXPECT_TRUE(zero.converged);
  EXPECT_EQ(zero.iterations, 0);
  EXPECT_EQ(zero.x.norm(), 0.0);

  // singular system with an infeasible component: never reported as solved,
  // and the residual is recomputed from scratch rather than trusted
  const auto proj = [](const Vector& v) {
    Vector out(2);
    out << v(0), 0.0;
    return out;
  };
  const auto sing = detail::conjugate_gradient(proj, b, opts);
  EXPECT_FALSE(sing.converged);
  EXPECT_GT(sing.residual, opts.tol);
  EXPECT_TRUE(sing.x.allFinite());
}

TEST(WienerWeights, PolicyTable) {
  Matrix hx(1, 4), hw(1, 4);
  hx << 4.0, 1e-20, 0.0, 0.0;
  hw << 1.0, 1.0, 1.0, 0.0;
  const Matrix f = wiener_weights(hx, hw, 1e8);
  EXPECT_NEAR(f(0, 0), 0.5, 1e-14);   // sqrt(hw/hx)
  EXPECT_NEAR(f(0, 1), 1e8, 1e-6);    // ratio overflows the cap
  EXPECT_NEAR(f(0, 2), 1e8, 1e-6);    // noise on a dead mode: cap
  EXPECT_EQ(f(0, 3), 0.0);            // nothing lives there: no penalty
  EXPECT_THROW(wiener_weights(hx, Matrix(Matrix::Ones(2, 2)), 1e8), input_error);
  EXPECT_THROW(wiener_weights(Matrix(-Matrix::Ones(1, 4)), hw, 1e8), input_error);
}

TEST(WienerSolve, MatchesDenseMmseEstimator) {
  const Index n = 4, t = 8;
  const JointBasis jb = random_joint_basis(n, t, 23);
  const Matrix h_x = symmetric_density(jb);
  const double sigma = 0.5;
  const Matrix h_w = white_noise_density(n, t, sigma);
  const double mean = 1.2;
  const BoolMatrix mask = checkered_mask(n, t, 29);
  const LinearOperator a = mask_operator(mask);
  const Vector y = random_matrix(a.range, 1, 31).col(0);

  SolverOptions opts;
  opts.tol = 1e-12;
  opts.max_iters = 4000;
  const SolveReport report = wiener_solve(jb, a, y, h_x, h_w, mean, opts);
  EXPECT_TRUE(report.converged);
  EXPECT_LE(report.residual, 1e-12);

  // Bayesian oracle: m + Sigma A^T (A Sigma A^T + sigma^2 I)^-1 (y - A m)
  const Matrix sigma_x = dense_covariance(jb, h_x);
  const Matrix a_dense = dense_of(a);
  const Vector m = Vector::Constant(jb.size(), mean);
  const Matrix gram = a_dense * sigma_x * a_dense.transpose() +
                      sigma * sigma * Matrix::Identity(a.range, a.range);
  const Vector oracle = m + sigma_x * a_dense.transpose() * gram.ldlt().solve(y - a_dense * m);
  EXPECT_LT((vec(report.solution) - oracle).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(WienerSolve, MeanParameterEqualsManualCentering) {
  const Index n = 3, t = 6;
  const JointBasis jb = random_joint_basis(n, t, 37);
  const Matrix h_x = symmetric_density(jb);
  const Matrix h_w = white_noise_density(n, t, 0.3);
  const BoolMatrix mask = checkered_mask(n, t, 41);
  const LinearOperator a = mask_operator(mask);
  const Vector y = random_matrix(a.range, 1, 43).col(0);
  const double mean = -2.5;

  const Matrix with_mean = wiener_solve(jb, a, y, h_x, h_w, mean).solution;
  const Vector y_centered = y - a.forward(Vector(Vector::Constant(jb.size(), mean)));
  const Matrix centered = wiener_solve(jb, a, y_centered, h_x, h_w, 0.0).solution;
  EXPECT_LT((with_mean - (centered.array() + mean).matrix()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(WienerSolve, IdentityObservationsWithoutNoisePassThrough) {
  const Index n = 4, t = 6;
  const JointBasis jb = random_joint_basis(n, t, 47);
  const Matrix x = random_matrix(n, t, 53);
  const LinearOperator a = identity_operator(n * t);
  const SolveReport report =
      wiener_solve(jb, a, vec(x), symmetric_density(jb), Matrix(Matrix::Zero(n, t)));
  EXPECT_TRUE(report.converged);
  EXPECT_LT((report.solution - x).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(WienerSolve, FullObservationEqualsClosedFormShrinkage) {
  const Index n = 4, t = 8;
  const JointBasis jb = random_joint_basis(n, t, 59);
  const Matrix h_x = symmetric_density(jb);
  const Matrix h_w = white_noise_density(n, t, 0.8);
  const Matrix y = random_matrix(n, t, 61);

  SolverOptions opts;
  opts.tol = 1e-12;
  const SolveReport it = wiener_solve(jb, identity_operator(n * t), vec(y), h_x, h_w, 0.0, opts);
  const Matrix closed = joint_wiener_closed_form(jb, Matrix(Matrix::Ones(n, t)), h_x, h_w, y);
  EXPECT_LT((it.solution - closed).cwiseAbs().maxCoeff(), 1e-7);

  // pure shrinkage: no spectral coefficient grows
  const CMatrix before = jft(jb, y);
  const CMatrix after = jft(jb, closed);
  for (Index i = 0; i < n; ++i)
    for (Index tau = 0; tau < t; ++tau)
      EXPECT_LE(std::abs(after(i, tau)), std::abs(before(i, tau)) + 1e-10);
}

TEST(ClosedForm, MatchesIterativeSolveForFilterObservations) {
  const Index n = 3, t = 6;
  const JointBasis jb = random_joint_basis(n, t, 67);
  const Matrix h_x = symmetric_density(jb);
  const Matrix h_w = white_noise_density(n, t, 0.4);
  Matrix a_resp(n, t);
  for (Index i = 0; i < n; ++i)
    for (Index tau = 0; tau < t; ++tau)
      a_resp(i, tau) = 0.5 + 1.0 / (1.0 + jb.graph.eigenvalues(i)) +
                       0.2 * std::cos(jb.time.omega(tau));
  const Matrix y = random_matrix(n, t, 71);

  SolverOptions opts;
  opts.tol = 1e-12;
  const SolveReport it =
      wiener_solve(jb, joint_filter_operator(jb, a_resp), vec(y), h_x, h_w, 0.0, opts);
  const Matrix closed = joint_wiener_closed_form(jb, a_resp, h_x, h_w, y);
  EXPECT_TRUE(it.converged);
  EXPECT_LT((it.solution - closed).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(ClosedForm, DeadModesGoToZero) {
  const Index n = 3, t = 4;
  const JointBasis jb = random_joint_basis(n, t, 73);
  const Matrix zero = Matrix::Zero(n, t);
  const Matrix out = joint_wiener_closed_form(jb, zero, zero, zero, random_matrix(n, t, 79));
  EXPECT_EQ(out.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Noiseless, MatchesDenseMinimumEnergyInterpolant) {
  const Index n = 3, t = 4;
  const JointBasis jb = random_joint_basis(n, t, 83);
  const Matrix h_x = symmetric_density(jb, 0.3);
  const BoolMatrix mask = checkered_mask(n, t, 89, 0.5);
  const LinearOperator a = mask_operator(mask);
  const Vector y = random_matrix(a.range, 1, 97).col(0);

  SolverOptions opts;
  opts.tol = 1e-12;
  const SolveReport report = wiener_solve_noiseless(jb, a, y, h_x, opts);
  EXPECT_TRUE(report.converged);

  // oracle: x = Sigma A^T (A Sigma A^T)^-1 y minimizes x^T Sigma^-1 x on Ax=y
  const Matrix sigma_x = dense_covariance(jb, h_x);
  const Matrix a_dense = dense_of(a);
  const Vector oracle = sigma_x * a_dense.transpose() *
                        (a_dense * sigma_x * a_dense.transpose()).ldlt().solve(y);
  EXPECT_LT((vec(report.solution) - oracle).cwiseAbs().maxCoeff(), 1e-6);
  // constraints hold on the observed entries
  EXPECT_LT((a.forward(vec(report.solution)) - y).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Noiseless, FullObservationReturnsTheData) {
  const Index n = 4, t = 6;
  const JointBasis jb = random_joint_basis(n, t, 101);
  const Matrix x = random_matrix(n, t, 103);
  const SolveReport report =
      wiener_solve_noiseless(jb, identity_operator(n * t), vec(x), symmetric_density(jb));
  EXPECT_TRUE(report.converged);
  EXPECT_LT((report.solution - x).cwiseAbs().maxCoeff(), 1e-7);
  EXPECT_THROW(wiener_solve_noiseless(jb, joint_filter_operator(jb, symmetric_density(jb)),
                                      vec(x), symmetric_density(jb)),
               input_error);
}

TEST(Tikhonov, MatchesDenseRegularizedSolve) {
  const Index n = 3, t = 4;
  const jtvsp::Graph g = testutil::random_geometric_graph(n, 107);
  const JointBasis jb{testutil::spectrum_of(g), TimeBasis(t)};
  const BoolMatrix mask = checkered_mask(n, t, 109);
  const LinearOperator a = mask_operator(mask);
  const Vector y = random_matrix(a.range, 1, 113).col(0);
  const double alpha = 0.7;

  SolverOptions opts;
  opts.tol = 1e-12;
  opts.max_iters = 5000;
  const SolveReport report = tikhonov_solve(jb, a, y, alpha, opts);
  EXPECT_TRUE(report.converged);

  const Matrix a_dense = dense_of(a);
  const Matrix lap = testutil::dense_joint_laplacian(combinatorial_laplacian(g), t);
  const Matrix system = a_dense.transpose() * a_dense + alpha * lap;
  const Vector oracle = system.ldlt().solve(a_dense.transpose() * y);
  EXPECT_LT((vec(report.solution) - oracle).cwiseAbs().maxCoeff(), 1e-6);

  // alpha = 0 with full observations is a pass-through
  const Matrix x = random_matrix(n, t, 127);
  const SolveReport plain = tikhonov_solve(jb, identity_operator(n * t), vec(x), 0.0);
  EXPECT_LT((plain.solution - x).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_THROW(tikhonov_solve(jb, a, y, -1.0), input_error);
}

TEST(WienerSolve, ValidatesOperatorAndReportsNonConvergence) {
  const Index n = 3, t = 4;
  const JointBasis jb = random_joint_basis(n, t, 131);
  const Matrix h_x = symmetric_density(jb);
  const Matrix h_w = white_noise_density(n, t, 0.5);
  const LinearOperator a = mask_operator(checkered_mask(n, t, 137));
  const Vector y = random_matrix(a.range, 1, 139).col(0);

  EXPECT_THROW(wiener_solve(jb, a, Vector(Vector::Zero(a.range + 1)), h_x, h_w), input_error);
  EXPECT_THROW(wiener_solve(jb, identity_operator(n * t + 1),
                            Vector(Vector::Zero(n * t + 1)), h_x, h_w),
               input_error);
  LinearOperator broken = a;
  broken.adjoint = nullptr;
  EXPECT_THROW(wiener_solve(jb, broken, y, h_x, h_w), input_error);

  SolverOptions strangled;
  strangled.tol = 1e-14;
  strangled.max_iters = 1;
  const SolveReport report = wiener_solve(jb, a, y, h_x, h_w, 0.0, strangled);
  EXPECT_FALSE(report.converged);
  EXPECT_GT(report.residual, 1e-14);
}
