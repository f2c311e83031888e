#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

#include "rmpe/errors.hpp"

namespace rmpe {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct ProblemSpec {
  double L = 1.0;
  double mu = 1.0;
  double M_hess = 0.0;

  double sigma() const { return 1.0 - mu / L; }
  // Bound on ||(A - I)^{-1}|| for A = I - H/L.
  double kappa() const { return L / mu; }

  void validate() const {
    if (!(mu > 0.0) || !(mu <= L) || !std::isfinite(L)) throw DomainError("need 0 < mu <= L");
    if (!(M_hess >= 0.0)) throw DomainError("Hessian Lipschitz constant must be non-negative");
  }
};

enum class QuadraticForm { spd, least_squares };

// spd: f = x'Bx/2 - b'x.  least_squares: f = ||Bx - b||^2 / 2.
struct QuadraticProblem {
  Matrix B;
  Vector b;
  QuadraticForm form = QuadraticForm::spd;

  Vector minimizer() const {
    if (form == QuadraticForm::spd) return B.ldlt().solve(b);
    return B.colPivHouseholderQr().solve(b);
  }

  Matrix hessian() const { return form == QuadraticForm::spd ? B : Matrix(B.transpose() * B); }

  ProblemSpec spec() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hessian(), Eigen::EigenvaluesOnly);
    return {es.eigenvalues().maxCoeff(), es.eigenvalues().minCoeff(), 0.0};
  }
};

inline std::pair<double, Vector> quadratic_value_grad(const QuadraticProblem& p, const Vector& x) {
  if (p.form == QuadraticForm::spd) {
    const Vector Bx = p.B * x;
    return {0.5 * x.dot(Bx) - p.b.dot(x), Bx - p.b};
  }
  const Vector r = p.B * x - p.b;
  return {0.5 * r.squaredNorm(), p.B.transpose() * r};
}

struct LogisticProblem {
  SparseRowMatrix Z;
  Vector y;
  double tau = 0.0;
};

namespace detail {

// log(1 + exp(t)) without overflow.
inline double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace detail

inline std::pair<double, Vector> logistic_value_grad(const LogisticProblem& p, const Vector& w) {
  const Vector margins = p.Z * w;
  Vector weights(margins.size());
  double f = 0.0;
  for (Index i = 0; i < margins.size(); ++i) {
    const double t = -p.y(i) * margins(i);
    f += detail::softplus(t);
    weights(i) = -p.y(i) * detail::sigmoid(t);
  }
  f += 0.5 * p.tau * w.squaredNorm();
  Vector g = p.Z.transpose() * weights;
  g += p.tau * w;
  return {f, g};
}

struct PowerIterationOptions {
  double tol = 1e-8;
  int max_iter = 10000;
  std::uint64_t seed = 0x5eedULL;
};

// Largest eigenvalue of Z'Z, i.e. ||Z||_2^2.
template <class Mat>
double spectral_norm_squared(const Mat& Z, const PowerIterationOptions& opt = {}) {
  const Index n = Z.cols();
  if (n == 0 || Z.rows() == 0) throw EstimationError("empty matrix");
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> g;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = g(rng);
  v.normalize();
  double est = 0.0;
  for (int it = 0; it < opt.max_iter; ++it) {
    Vector w = Z.transpose() * (Z * v);
    const double next = v.dot(w);
    const double nw = w.norm();
    if (!(nw > 0.0)) throw EstimationError("power iteration hit the null space; is Z zero?");
    v = w / nw;
    if (it > 0 && std::abs(next - est) <= opt.tol * std::abs(next)) return next;
    est = next;
  }
  throw EstimationError("power iteration did not converge");
}

// Third derivative of the scalar logistic loss is bounded by 1/(6 sqrt 3).
inline constexpr double kLogisticHessianLipschitz = 0.0962250448649376;

inline ProblemSpec lipschitz_constants(const LogisticProblem& p, const PowerIterationOptions& opt = {}) {
  if (!(p.tau > 0.0)) throw DomainError("tau must be positive");
  const double s2 = spectral_norm_squared(p.Z, opt);
  return {s2 / 4.0 + p.tau, p.tau, std::pow(s2, 1.5) * kLogisticHessianLipschitz};
}

}  // namespace rmpe
