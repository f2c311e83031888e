#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/QR>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "rmpe/errors.hpp"

namespace rmpe {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Fixed-capacity ring buffer of iterates; holds the last k+2 pushed vectors.
class IterateWindow {
 public:
  explicit IterateWindow(Index k) : k_(k), slots_(static_cast<std::size_t>(k + 2)) {
    if (k < 0) throw StructuralError("window order must be non-negative");
  }

  static IterateWindow from(const std::vector<Vector>& iterates) {
    if (iterates.size() < 2) throw StructuralError("window needs at least two iterates");
    IterateWindow w(static_cast<Index>(iterates.size()) - 2);
    for (const auto& x : iterates) w.push(x);
    return w;
  }

  void push(const Vector& x) {
    if (x.size() < 1) throw StructuralError("iterates must have dimension >= 1");
    if (count_ > 0 && x.size() != dim_)
      throw StructuralError("iterate dimension " + std::to_string(x.size()) +
                            " does not match window dimension " + std::to_string(dim_));
    dim_ = x.size();
    slots_[(head_ + count_) % slots_.size()] = x;
    if (count_ < capacity()) {
      ++count_;
    } else {
      head_ = (head_ + 1) % slots_.size();
    }
  }

  // i = 0 is the oldest stored iterate.
  const Vector& operator[](Index i) const { return slots_[(head_ + static_cast<std::size_t>(i)) % slots_.size()]; }
  const Vector& back() const { return (*this)[count_ - 1]; }

  Index order() const { return k_; }
  Index capacity() const { return static_cast<Index>(slots_.size()); }
  Index size() const { return count_; }
  Index dim() const { return dim_; }
  bool full() const { return count_ == capacity(); }

  void clear() {
    head_ = 0;
    count_ = 0;
  }

 private:
  Index k_;
  std::vector<Vector> slots_;
  std::size_t head_ = 0;
  Index count_ = 0;
  Index dim_ = 0;
};

enum class ZeroLambdaRoute {
  qr,      // null-space + pivoted QR on U; accurate enough for exact recovery
  normal,  // (U'U) z = 1 on the normal matrix, as in the plain algorithm
};

struct SolveOptions {
  // |sum(c) - 1| tolerance, relative to ||c||_1.
  double sum_tol = 1e-12;
  // lambda = 0 route: |R_ii| <= qr_pivot_tol * |R_00| counts as rank deficient.
  double qr_pivot_tol = 1e-15;
  // lambda = 0 on the normal matrix: LDLT pivot floor relative to trace(U'U)/(k+1).
  double normal_pivot_tol = 1e-12;
  ZeroLambdaRoute zero_lambda_route = ZeroLambdaRoute::qr;
};

struct Coefficients {
  Vector c;
  double lambda = 0.0;
};

inline Matrix build_difference_matrix(const IterateWindow& w) {
  if (w.size() < 2) throw StructuralError("window needs at least two iterates");
  Matrix U(w.dim(), w.size() - 1);
  for (Index i = 0; i + 1 < w.size(); ++i) U.col(i) = w[i + 1] - w[i];
  return U;
}

inline Matrix build_difference_matrix(const std::vector<Vector>& xs) {
  if (xs.size() < 2) throw StructuralError("window needs at least two iterates");
  const Index n = xs.front().size();
  Matrix U(n, static_cast<Index>(xs.size()) - 1);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (xs[i + 1].size() != n || xs[i].size() != n) throw StructuralError("iterate dimension mismatch");
    U.col(static_cast<Index>(i)) = xs[i + 1] - xs[i];
  }
  return U;
}

namespace detail {

inline Coefficients normalize(const Vector& z, double lambda, const SolveOptions& opt) {
  const double s = z.sum();
  const double l1 = z.cwiseAbs().sum();
  if (!std::isfinite(s) || !std::isfinite(l1) || std::abs(s) <= opt.sum_tol * l1 || l1 == 0.0)
    throw DegenerateSystemError("coefficient system has 1'z = 0");
  return {z / s, lambda};
}

inline Matrix ones_complement_basis(Index k1) {
  Eigen::HouseholderQR<Matrix> qr(Matrix::Ones(k1, 1));
  Matrix Q = qr.householderQ() * Matrix::Identity(k1, k1);
  return Q.rightCols(k1 - 1);
}

// min ||U c|| subject to 1'c = 1, via c = 1/(k+1) + N w and pivoted QR of U N.
inline Coefficients ampe_coefficients(const Matrix& U, const SolveOptions& opt) {
  const Index k1 = U.cols();
  const Matrix N = ones_complement_basis(k1);
  const Vector c0 = Vector::Constant(k1, 1.0 / static_cast<double>(k1));
  const Matrix UN = U * N;
  if (UN.rows() < UN.cols())
    throw RankDeficientError("lambda = 0 with more difference columns than dimensions; U'U is singular",
                             static_cast<long>(UN.rows()));
  Eigen::ColPivHouseholderQR<Matrix> qr(UN);
  const auto& R = qr.matrixR();
  const double r0 = std::abs(R(0, 0));
  for (Index i = 0; i < UN.cols(); ++i) {
    if (!(std::abs(R(i, i)) > opt.qr_pivot_tol * r0)) {
      const long pivot = static_cast<long>(qr.colsPermutation().indices()(i));
      throw RankDeficientError("lambda = 0 and U'U is singular at pivot " + std::to_string(pivot) +
                                   "; use lambda > 0",
                               pivot);
    }
  }
  qr.setThreshold(0.0);
  const Vector w = qr.solve(-(U * c0));
  return normalize(c0 + N * w, 0.0, opt);
}

inline void check_normal_pivots(const Matrix& G, double floor_rel, const char* what) {
  const Index k1 = G.cols();
  const double floor = floor_rel * G.trace() / static_cast<double>(k1);
  Eigen::LDLT<Matrix> f(G);
  const Vector dg = f.vectorD();
  for (Index i = 0; i < k1; ++i)
    if (!(dg(i) > floor)) {
      const long pivot = static_cast<long>(f.transpositionsP().indices()(i));
      throw RankDeficientError(std::string(what) + " is singular at pivot " + std::to_string(pivot) +
                                   "; use lambda > 0",
                               pivot);
    }
}

inline Coefficients normal_ampe_coefficients(const Matrix& U, const SolveOptions& opt) {
  const Matrix G = U.transpose() * U;
  check_normal_pivots(G, opt.normal_pivot_tol, "lambda = 0 and U'U");
  return normalize(G.ldlt().solve(Vector::Ones(U.cols())), 0.0, opt);
}

}  // namespace detail

inline Coefficients rmpe_coefficients(const Matrix& U, double lambda, const SolveOptions& opt = {}) {
  const Index k1 = U.cols();
  if (k1 < 1) throw StructuralError("difference matrix has no columns");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be finite and non-negative");
  if (k1 == 1) return {Vector::Ones(1), lambda};
  if ((U.array() == 0.0).all()) return {Vector::Constant(k1, 1.0 / static_cast<double>(k1)), lambda};
  if (lambda == 0.0)
    return opt.zero_lambda_route == ZeroLambdaRoute::qr ? detail::ampe_coefficients(U, opt)
                                                        : detail::normal_ampe_coefficients(U, opt);

  Matrix M = U.transpose() * U;
  M.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(M);
  if (llt.info() != Eigen::Success)
    throw NumericalBreakdownError("Cholesky of U'U + lambda I failed; increase lambda");
  return detail::normalize(llt.solve(Vector::Ones(k1)), lambda, opt);
}

// sum_i c_i x_i over the first c.size() iterates of the window.
inline Vector combine(const IterateWindow& w, const Vector& c) {
  if (c.size() > w.size()) throw StructuralError("more coefficients than iterates");
  Vector x = Vector::Zero(w.dim());
  for (Index i = 0; i < c.size(); ++i) x.noalias() += c(i) * w[i];
  return x;
}

inline Vector extrapolate(const IterateWindow& w, double lambda, const SolveOptions& opt = {}) {
  return combine(w, rmpe_coefficients(build_difference_matrix(w), lambda, opt).c);
}

// Upper bound on ||c*_lambda|| for lambda > 0.
inline double coefficient_norm_bound(const Matrix& U, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("bound requires lambda > 0");
  const double s = U.cols() > 0 && U.rows() > 0 ? Eigen::JacobiSVD<Matrix>(U).singularValues()(0) : 0.0;
  return std::sqrt((lambda + s * s) / (static_cast<double>(U.cols()) * lambda));
}

struct CholeskyState {
  Matrix factor;  // r x r lower triangular, factor * factor' = U'U + lambda I
  double lambda = 0.0;

  Index rank() const { return factor.rows(); }
};

// Appends column u_new (the r-th column of U) to a factor built over U_so_far (n x r).
inline CholeskyState cholesky_append(const CholeskyState& state, const Matrix& U_so_far, const Vector& u_new) {
  const Index r = state.rank();
  if (U_so_far.cols() != r) throw StructuralError("U_so_far column count does not match factor size");
  if (r > 0 && U_so_far.rows() != u_new.size()) throw StructuralError("u_new dimension mismatch");

  Vector a(r);
  if (r > 0) a = state.factor.triangularView<Eigen::Lower>().solve(U_so_far.transpose() * u_new);
  const double d = u_new.squaredNorm() + state.lambda - a.squaredNorm();
  if (!(d > 0.0))
    throw NumericalBreakdownError("Cholesky append lost positive definiteness (pivot " + std::to_string(d) +
                                  "); use a larger lambda");
  CholeskyState out;
  out.lambda = state.lambda;
  out.factor = Matrix::Zero(r + 1, r + 1);
  out.factor.topLeftCorner(r, r) = state.factor;
  out.factor.block(r, 0, 1, r) = a.transpose();
  out.factor(r, r) = std::sqrt(d);
  return out;
}

inline CholeskyState cholesky_build(const Matrix& U, double lambda) {
  CholeskyState s{Matrix(0, 0), lambda};
  for (Index j = 0; j < U.cols(); ++j) s = cholesky_append(s, U.leftCols(j), U.col(j));
  return s;
}

inline Coefficients coefficients_from_factor(const CholeskyState& s, const SolveOptions& opt = {}) {
  if (s.rank() < 1) throw StructuralError("empty factor");
  const auto L = s.factor.triangularView<Eigen::Lower>();
  Vector z = L.solve(Vector::Ones(s.rank()));
  z = L.transpose().solve(z);
  return detail::normalize(z, s.lambda, opt);
}

// First-order coefficient shift caused by perturbing U to U + E.
inline Vector perturbation_shift(const Matrix& U, const Matrix& E, double lambda, const SolveOptions& opt = {}) {
  if (U.rows() != E.rows() || U.cols() != E.cols()) throw StructuralError("U and E must have the same shape");
  if (!(lambda >= 0.0)) throw DomainError("lambda must be non-negative");
  const Index k1 = U.cols();
  const Matrix Ut = U + E;
  const Matrix G = U.transpose() * U;
  Matrix M = Ut.transpose() * Ut;
  const Matrix P = M - G;
  M.diagonal().array() += lambda;

  if (lambda == 0.0) {
    detail::check_normal_pivots(G, opt.normal_pivot_tol, "lambda = 0 and U'U");
    detail::check_normal_pivots(M, opt.normal_pivot_tol, "lambda = 0 and the perturbed normal matrix");
  }
  const Vector c = rmpe_coefficients(U, lambda, opt).c;
  Eigen::LDLT<Matrix> ldlt(M);
  const Vector one = Vector::Ones(k1);
  const Vector m1 = ldlt.solve(one);
  const Vector v = ldlt.solve(P * c);
  const double denom = one.dot(m1);
  if (!(std::abs(denom) > 0.0)) throw DegenerateSystemError("1'M^{-1}1 = 0");
  return -(v - m1 * (one.dot(v) / denom));
}

// Streams iterates; grows the factor by appends and refactors when the window slides.
class OnlineExtrapolator {
 public:
  OnlineExtrapolator(Index k, double lambda) : window_(k), lambda_(lambda) {
    if (!(lambda > 0.0)) throw DomainError("online extrapolation needs lambda > 0");
  }

  void push(const Vector& x) {
    const bool slide = window_.full();
    window_.push(x);
    if (window_.size() < 2) return;
    if (slide) {
      U_ = build_difference_matrix(window_);
      state_ = cholesky_build(U_, lambda_);
      return;
    }
    const Vector u = window_[window_.size() - 1] - window_[window_.size() - 2];
    if (U_.cols() == 0) U_.resize(u.size(), 0);
    state_ = cholesky_append(state_, U_, u);
    U_.conservativeResize(Eigen::NoChange, U_.cols() + 1);
    U_.col(U_.cols() - 1) = u;
  }

  bool ready() const { return window_.full(); }
  const IterateWindow& window() const { return window_; }
  const CholeskyState& factor() const { return state_; }
  const Matrix& differences() const { return U_; }

  Coefficients coefficients(const SolveOptions& opt = {}) const { return coefficients_from_factor(state_, opt); }
  Vector extrapolate(const SolveOptions& opt = {}) const { return combine(window_, coefficients(opt).c); }

 private:
  IterateWindow window_;
  double lambda_;
  Matrix U_;
  CholeskyState state_{Matrix(0, 0), lambda_};
};

// x_{i+1} = x* + A (x_i - x*).
struct LinearModel {
  Matrix A;
  Vector fixed_point;

  void validate(std::uint64_t seed = 7) const {
    if (A.rows() != A.cols() || A.rows() != fixed_point.size())
      throw StructuralError("linear model dimensions are inconsistent");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Vector v(A.rows());
    for (Index i = 0; i < v.size(); ++i) v(i) = g(rng);
    if (!((A * v - v).norm() > 0.0)) throw DomainError("1 appears to be an eigenvalue of A");
  }

  Vector step(const Vector& x) const { return fixed_point + A * (x - fixed_point); }

  std::vector<Vector> iterates(const Vector& x0, Index count) const {
    std::vector<Vector> xs;
    xs.reserve(static_cast<std::size_t>(count));
    if (count > 0) xs.push_back(x0);
    while (static_cast<Index>(xs.size()) < count) xs.push_back(step(xs.back()));
    return xs;
  }
};

}  // namespace rmpe
