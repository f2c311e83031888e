#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "rmpe/errors.hpp"

namespace rmpe {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class StepperKind { gradient_fixed, gradient_short, nesterov_strong, nesterov_convex, chebyshev };

struct StepperSpec {
  StepperKind kind = StepperKind::gradient_short;
  double L = 1.0;
  double mu = 0.0;

  void validate() const {
    if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("L must be positive and finite");
    if (!(mu >= 0.0) || !(mu <= L)) throw DomainError("mu must lie in [0, L]");
    const bool mu_optional = kind == StepperKind::nesterov_convex || kind == StepperKind::gradient_short;
    if (mu == 0.0 && !mu_optional) throw DomainError("this stepper needs mu > 0");
  }

  double step_size() const {
    switch (kind) {
      case StepperKind::gradient_fixed:
        return 2.0 / (L + mu);
      default:
        return 1.0 / L;
    }
  }
};

namespace detail {
inline void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw DivergedError(std::string(what) + " is not finite", {});
}
}  // namespace detail

template <class Grad>
Vector gradient_step(const Vector& x, Grad&& grad, const StepperSpec& spec) {
  if (spec.kind != StepperKind::gradient_fixed && spec.kind != StepperKind::gradient_short)
    throw DomainError("gradient_step needs gradient_fixed or gradient_short");
  spec.validate();
  const Vector g = grad(x);
  detail::require_finite(g, "gradient");
  return x - spec.step_size() * g;
}

inline double nesterov_beta(double L, double mu) {
  const double a = std::sqrt(L), b = std::sqrt(mu);
  return (a - b) / (a + b);
}

struct NesterovState {
  Vector x;       // last gradient-step point x_k
  Vector y;       // extrapolated point where the next gradient is taken
  double t = 1.0; // momentum sequence, convex variant only

  static NesterovState start(const Vector& x0) { return {x0, x0, 1.0}; }
};

template <class Grad>
NesterovState nesterov_step(const NesterovState& s, Grad&& grad, const StepperSpec& spec) {
  if (spec.kind != StepperKind::nesterov_strong && spec.kind != StepperKind::nesterov_convex)
    throw DomainError("nesterov_step needs nesterov_strong or nesterov_convex");
  spec.validate();
  const Vector g = grad(s.y);
  detail::require_finite(g, "gradient");
  NesterovState out;
  out.x = s.y - g / spec.L;
  double beta = 0.0;
  if (spec.kind == StepperKind::nesterov_strong) {
    beta = nesterov_beta(spec.L, spec.mu);
    out.t = s.t;
  } else {
    out.t = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * s.t * s.t));
    beta = (s.t - 1.0) / out.t;
  }
  out.y = out.x + beta * (out.x - s.x);
  return out;
}

// Two-term Chebyshev semi-iteration for f = x'Bx/2 - b'x with mu I <= B <= L I.
// The ratio rho_k = alpha_{k-1}/alpha_k replaces the raw alpha sequence, which overflows for small sigma.
class ChebyshevIteration {
 public:
  ChebyshevIteration(Matrix B, Vector b, double L, double mu, const Vector& x0)
      : B_(std::move(B)), b_(std::move(b)), L_(L), sigma_(1.0 - mu / L), y_(x0), y_prev_(x0) {
    if (!(L > 0.0) || !(mu > 0.0) || !(mu <= L) || !(sigma_ < 1.0))
      throw DomainError("invalid spectrum: need 0 < mu <= L so that sigma = 1 - mu/L < 1");
    if (B_.rows() != B_.cols() || B_.rows() != b_.size() || x0.size() != b_.size())
      throw StructuralError("Chebyshev iteration dimensions are inconsistent");
    if (sigma_ > 0.0) t1_ = (2.0 - sigma_) / sigma_;
  }

  const Vector& current() const { return y_; }
  Index iteration() const { return iter_; }
  double sigma() const { return sigma_; }

  void step() {
    const Vector z = y_ - (B_ * y_ - b_) / L_;
    detail::require_finite(z, "Chebyshev iterate");
    if (sigma_ == 0.0) {
      y_prev_ = y_;
      y_ = z;
    } else if (iter_ == 0) {
      rho_ = 1.0 / t1_;
      y_prev_ = y_;
      y_ = rho_ * (2.0 * z - sigma_ * y_) / sigma_;
    } else {
      const double rho_prev = rho_;
      rho_ = 1.0 / (2.0 * t1_ - rho_prev);
      Vector next = (2.0 * rho_) * (2.0 * z - sigma_ * y_) / sigma_ - (rho_ * rho_prev) * y_prev_;
      y_prev_ = std::move(y_);
      y_ = std::move(next);
    }
    ++iter_;
  }

 private:
  Matrix B_;
  Vector b_;
  double L_;
  double sigma_;
  double t1_ = 0.0;
  double rho_ = 0.0;
  Vector y_;
  Vector y_prev_;
  Index iter_ = 0;
};

inline std::vector<Vector> chebyshev_run(const Matrix& B, const Vector& b, double L, double mu, const Vector& x0,
                                         Index k) {
  if (k < 0) throw DomainError("k must be non-negative");
  ChebyshevIteration it(B, b, L, mu, x0);
  std::vector<Vector> ys{x0};
  for (Index j = 0; j < k; ++j) {
    it.step();
    ys.push_back(it.current());
  }
  return ys;
}

// Monomial coefficients, lowest degree first.
using PolynomialCoeffs = Vector;

inline double polyval(const PolynomialCoeffs& c, double x) {
  double acc = 0.0;
  for (Index i = c.size() - 1; i >= 0; --i) acc = acc * x + c(i);
  return acc;
}

inline constexpr Index kMaxNesterovDegree = 50;

// N_0 = 1, N_1 = x, N_j = x((1 + beta_j) N_{j-1} - beta_j N_{j-2}); betas[j-1] holds beta_j.
inline PolynomialCoeffs nesterov_polynomial(Index k, const std::vector<double>& betas) {
  if (k < 0) throw DomainError("k must be non-negative");
  if (k > kMaxNesterovDegree) throw DomainError("nesterov_polynomial is limited to k <= 50");
  if (k >= 2 && static_cast<Index>(betas.size()) < k) throw DomainError("need beta_1..beta_k");
  Vector prev2 = Vector::Zero(k + 1), prev = Vector::Zero(k + 1);
  prev2(0) = 1.0;
  if (k == 0) return prev2;
  prev(1) = 1.0;
  for (Index j = 2; j <= k; ++j) {
    const double beta = betas[static_cast<std::size_t>(j - 1)];
    Vector inner = (1.0 + beta) * prev - beta * prev2;
    Vector cur = Vector::Zero(k + 1);
    cur.tail(k) = inner.head(k);
    prev2 = std::move(prev);
    prev = std::move(cur);
  }
  return prev;
}

inline PolynomialCoeffs nesterov_polynomial(Index k, double beta) {
  return nesterov_polynomial(k, std::vector<double>(static_cast<std::size_t>(std::max<Index>(k, 0)), beta));
}

// N_k(x) by running the recurrence on values; stable where the monomial form cancels.
inline double nesterov_eval(Index k, const std::vector<double>& betas, double x) {
  if (k < 0) throw DomainError("k must be non-negative");
  if (k >= 2 && static_cast<Index>(betas.size()) < k) throw DomainError("need beta_1..beta_k");
  if (k == 0) return 1.0;
  double prev2 = 1.0, prev = x;
  for (Index j = 2; j <= k; ++j) {
    const double beta = betas[static_cast<std::size_t>(j - 1)];
    const double cur = x * (prev + beta * (prev - prev2));
    prev2 = prev;
    prev = cur;
  }
  return prev;
}

struct ConjectureProbe {
  double max_abs = 0.0;
  double argmax = 0.0;
  double value_at_sigma = 0.0;
  bool max_at_sigma = false;
};

// Checks on a uniform grid of [0, sigma] whether max |N_k| is attained at sigma.
inline ConjectureProbe nesterov_conjecture_probe(Index k, double sigma, double beta, Index grid = 1000) {
  if (grid < 2) throw DomainError("grid needs at least two points");
  if (k > kMaxNesterovDegree) throw DomainError("nesterov_conjecture_probe is limited to k <= 50");
  const std::vector<double> betas(static_cast<std::size_t>(std::max<Index>(k, 0)), beta);
  ConjectureProbe out;
  out.value_at_sigma = std::abs(nesterov_eval(k, betas, sigma));
  for (Index i = 0; i < grid; ++i) {
    const double x = sigma * static_cast<double>(i) / static_cast<double>(grid - 1);
    const double v = std::abs(nesterov_eval(k, betas, x));
    if (v > out.max_abs) {
      out.max_abs = v;
      out.argmax = x;
    }
  }
  out.max_at_sigma = out.max_abs <= out.value_at_sigma * (1.0 + 1e-12);
  return out;
}

}  // namespace rmpe
