#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "rmpe/detail/minimax_qp.hpp"
#include "rmpe/errors.hpp"
#include "rmpe/objectives.hpp"
#include "rmpe/optimizers.hpp"

namespace rmpe {

namespace detail {
inline void check_sigma(double sigma) {
  if (!(sigma >= 0.0) || !(sigma < 1.0)) throw DomainError("sigma must lie in [0, 1)");
}
}  // namespace detail

inline double zeta(double sigma) {
  detail::check_sigma(sigma);
  const double r = std::sqrt(1.0 - sigma);
  return (1.0 - r) / (1.0 + r);
}

// min over p(1) = 1 of max |p| on [0, sigma], i.e. 1 / C_k((2 - sigma)/sigma).
inline double cheby_rate(long k, double sigma) {
  if (k < 0) throw DomainError("k must be non-negative");
  const double z = zeta(sigma);
  if (k == 0) return 1.0;
  if (z == 0.0) return 0.0;
  // 2 z^k / (1 + z^2k), computed in logs so that z^k may underflow gracefully.
  const double lzk = static_cast<double>(k) * std::log(z);
  return 2.0 * std::exp(lzk) / (1.0 + std::exp(2.0 * lzk));
}

inline double ampe_bound(double kappa_AI, long k, double sigma, double d0) {
  if (!(kappa_AI > 0.0) || !(d0 >= 0.0)) throw DomainError("kappa must be positive and d0 non-negative");
  return kappa_AI * cheby_rate(k, sigma) * d0;
}

inline double asymptotic_constant(double beta) {
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  const double a = 1.0 + 1.0 / beta;
  return std::sqrt(1.0 + a * a / (4.0 * beta * beta));
}

// ----------------------------------------------------------------------------
// S(k, alpha) = min_{q(1)=1} max_{x in [0, sigma]} ((1-x) q(x))^2 + alpha ||q||^2

struct SkAlphaOptions {
  Index grid_size = 1000;
  // Certification grid is certify_factor times finer than the solve grid.
  Index certify_factor = 10;
  detail::QpOptions qp{};
};

struct SkAlphaSolution {
  double value = 0.0;       // certified: continuous max of ((1-x) q(x))^2 plus alpha ||q||^2
  double grid_value = 0.0;  // optimum of the discretized program
  PolynomialCoeffs q;       // monomial coefficients
  Index grid_size = 0;
  std::string basis;
  int iterations = 0;
  double rel_gap = 0.0;
};

namespace detail {

// Column j: monomial coefficients of C_j((2x - sigma)/sigma).
inline Matrix shifted_chebyshev_to_monomial(Index k, double sigma) {
  Matrix T = Matrix::Zero(k + 1, k + 1);
  T(0, 0) = 1.0;
  if (k == 0) return T;
  const double a = 2.0 / sigma;
  T(0, 1) = -1.0;
  T(1, 1) = a;
  for (Index j = 2; j <= k; ++j) {
    // 2 (a x - 1) C_{j-1} - C_{j-2}
    T.col(j) = -2.0 * T.col(j - 1) - T.col(j - 2);
    T.col(j).tail(k) += 2.0 * a * T.col(j - 1).head(k);
  }
  return T;
}

inline double clenshaw(const Vector& c, double t) {
  double b1 = 0.0, b2 = 0.0;
  for (Index i = c.size() - 1; i >= 1; --i) {
    const double b0 = 2.0 * t * b1 - b2 + c(i);
    b2 = b1;
    b1 = b0;
  }
  return t * b1 - b2 + c(0);
}

struct SkBasis {
  bool chebyshev;
  double sigma;
  Matrix to_monomial;  // maps basis coefficients to monomial coefficients
  Vector at_one;       // basis functions evaluated at x = 1

  double eval(const Vector& p, double x) const {
    return chebyshev ? clenshaw(p, (2.0 * x - sigma) / sigma) : polyval(p, x);
  }

  Matrix rows(const std::vector<double>& xs, Index k) const {
    Matrix B(static_cast<Index>(xs.size()), k + 1);
    for (Index i = 0; i < B.rows(); ++i) {
      const double x = xs[static_cast<std::size_t>(i)];
      if (chebyshev) {
        const double t = (2.0 * x - sigma) / sigma;
        double prev = 1.0, cur = t;
        B(i, 0) = 1.0;
        if (k >= 1) B(i, 1) = t;
        for (Index j = 2; j <= k; ++j) {
          const double next = 2.0 * t * cur - prev;
          prev = cur;
          cur = next;
          B(i, j) = cur;
        }
      } else {
        double pw = 1.0;
        for (Index j = 0; j <= k; ++j) {
          B(i, j) = pw;
          pw *= x;
        }
      }
      B.row(i) *= (1.0 - x);
    }
    return B;
  }
};

inline SkBasis make_basis(bool chebyshev, Index k, double sigma) {
  SkBasis b{chebyshev, sigma, Matrix(), Vector()};
  if (chebyshev) {
    b.to_monomial = shifted_chebyshev_to_monomial(k, sigma);
    b.at_one.resize(k + 1);
    const double t1 = (2.0 - sigma) / sigma;
    double prev = 1.0, cur = t1;
    b.at_one(0) = 1.0;
    if (k >= 1) b.at_one(1) = t1;
    for (Index j = 2; j <= k; ++j) {
      const double next = 2.0 * t1 * cur - prev;
      prev = cur;
      cur = next;
      b.at_one(j) = cur;
    }
  } else {
    b.to_monomial = Matrix::Identity(k + 1, k + 1);
    b.at_one = Vector::Ones(k + 1);
  }
  return b;
}

// Continuous max of |(1-x) q(x)| on [0, sigma]: fine scan, then golden section near each local max.
// Returns the max and the polished local-max abscissae.
inline std::pair<double, std::vector<double>> continuous_max(const SkBasis& b, const Vector& p, Index points) {
  const double sigma = b.sigma;
  auto f = [&](double x) { return std::abs((1.0 - x) * b.eval(p, x)); };
  std::vector<double> vals(static_cast<std::size_t>(points));
  const double h = sigma / static_cast<double>(points - 1);
  for (Index i = 0; i < points; ++i) vals[static_cast<std::size_t>(i)] = f(h * static_cast<double>(i));
  double best = 0.0;
  std::vector<double> where;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (Index i = 0; i < points; ++i) {
    const std::size_t u = static_cast<std::size_t>(i);
    const double left = i > 0 ? vals[u - 1] : -1.0;
    const double right = i + 1 < points ? vals[u + 1] : -1.0;
    if (vals[u] < left || vals[u] < right) continue;
    double lo = h * static_cast<double>(std::max<Index>(i - 1, 0));
    double hi = h * static_cast<double>(std::min<Index>(i + 1, points - 1));
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 60 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = f(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = f(x1);
      }
    }
    double xm = f1 > f2 ? x1 : x2;
    double vm = std::max(f1, f2);
    if (vals[u] >= vm) {
      xm = h * static_cast<double>(i);
      vm = vals[u];
    }
    best = std::max(best, vm);
    where.push_back(xm);
  }
  return {best, where};
}

struct SkAttempt {
  bool ok = false;
  Vector p;  // basis coefficients
  double grid_value = 0.0;
  double certified = std::numeric_limits<double>::infinity();
  std::vector<double> argmax;
  int iterations = 0;
  double rel_gap = std::numeric_limits<double>::infinity();
};

inline SkAttempt solve_on_grid(const SkBasis& basis, Index k, double alpha, const std::vector<double>& xs,
                               const SkAlphaOptions& opt) {
  const Matrix B = basis.rows(xs, k);
  const Matrix& T = basis.to_monomial;
  const Matrix K = T.transpose() * T;
  auto objective = [&](const Vector& p) {
    const double mx = (B * p).cwiseAbs().maxCoeff();
    return mx * mx + alpha * (T * p).squaredNorm();
  };

  // Start from the rescaled Chebyshev polynomial; the monomial basis also tries uniform weights.
  Vector p0;
  if (basis.chebyshev) {
    p0 = Vector::Zero(k + 1);
    p0(k) = 1.0 / basis.at_one(k);
  } else {
    const Matrix C = shifted_chebyshev_to_monomial(k, basis.sigma);
    Vector pc = C.col(k) / C.col(k).sum();
    Vector pu = Vector::Constant(k + 1, 1.0 / static_cast<double>(k + 1));
    p0 = (pc.allFinite() && objective(pc) < objective(pu)) ? pc : pu;
  }
  const double sc = std::sqrt(objective(p0));
  const Index m = B.rows();

  Matrix H = Matrix::Zero(k + 2, k + 2);
  H.topLeftCorner(k + 1, k + 1) = 2.0 * alpha * K;
  H(k + 1, k + 1) = 2.0;
  Matrix G(2 * m, k + 2);
  G.topLeftCorner(m, k + 1) = B;
  G.bottomLeftCorner(m, k + 1) = -B;
  G.col(k + 1).setConstant(-1.0);
  Vector a = Vector::Zero(k + 2);
  a.head(k + 1) = sc * basis.at_one;
  Vector z0(k + 2);
  z0.head(k + 1) = p0 / sc;
  z0(k + 1) = 1.1 * (B * z0.head(k + 1)).cwiseAbs().maxCoeff() + 0.1;

  const QpResult r = solve_equality_qp(H, G, Vector::Zero(2 * m), a, z0, opt.qp);
  SkAttempt out;
  out.iterations = r.iterations;
  out.rel_gap = r.rel_gap;
  if (!r.converged || !r.z.allFinite()) return out;
  Vector p = r.z.head(k + 1) * sc;
  p /= basis.at_one.dot(p);
  out.p = p;
  out.grid_value = objective(p);
  auto cm = continuous_max(basis, p, opt.certify_factor * opt.grid_size);
  out.certified = cm.first * cm.first + alpha * (T * p).squaredNorm();
  out.argmax = std::move(cm.second);
  out.ok = std::isfinite(out.certified);
  return out;
}

}  // namespace detail

inline SkAlphaSolution s_k_alpha(long k, double sigma, double alpha, const SkAlphaOptions& opt = {}) {
  detail::check_sigma(sigma);
  if (k < 0 || k > 30) throw DomainError("s_k_alpha supports 0 <= k <= 30");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be finite and non-negative");
  if (opt.grid_size < std::max<Index>(10 * k, 2)) throw DomainError("grid_size must be at least 10 k");
  const Index kk = static_cast<Index>(k);

  SkAlphaSolution sol;
  sol.grid_size = opt.grid_size;
  if (k == 0) {
    sol.q = Vector::Ones(1);
    sol.value = sol.grid_value = 1.0 + alpha;
    sol.basis = "closed-form";
    return sol;
  }
  if (sigma == 0.0) {
    // Only q(0) is constrained by the max term; minimize sum d_i q_i^2 with d = (1 + alpha, alpha, ...).
    Vector q = Vector::Zero(kk + 1);
    if (alpha == 0.0) {
      q.tail(kk).setConstant(1.0 / static_cast<double>(kk));
    } else {
      q(0) = 1.0 / (1.0 + alpha);
      q.tail(kk).setConstant(1.0 / alpha);
      q /= q.sum();
    }
    sol.q = q;
    sol.value = sol.grid_value = q(0) * q(0) + alpha * q.squaredNorm();
    sol.basis = "closed-form";
    return sol;
  }

  std::vector<double> grid(static_cast<std::size_t>(opt.grid_size));
  const double pi = std::acos(-1.0);
  for (Index j = 0; j < opt.grid_size; ++j)
    grid[static_cast<std::size_t>(j)] =
        sigma * 0.5 * (1.0 - std::cos(pi * static_cast<double>(j) / static_cast<double>(opt.grid_size - 1)));

  bool any = false;
  double worst_gap = 0.0;
  detail::SkAttempt best;
  std::string best_name;
  detail::SkBasis best_basis{false, sigma, Matrix(), Vector()};
  for (bool cheb : {true, false}) {
    const detail::SkBasis basis = detail::make_basis(cheb, kk, sigma);
    detail::SkAttempt at = detail::solve_on_grid(basis, kk, alpha, grid, opt);
    if (at.ok) {
      // One refinement: add the continuous local maxima of the first solution to the grid.
      std::vector<double> refined = grid;
      refined.insert(refined.end(), at.argmax.begin(), at.argmax.end());
      std::sort(refined.begin(), refined.end());
      refined.erase(std::unique(refined.begin(), refined.end()), refined.end());
      detail::SkAttempt again = detail::solve_on_grid(basis, kk, alpha, refined, opt);
      if (again.ok && again.certified <= at.certified) at = std::move(again);
    }
    worst_gap = std::max(worst_gap, at.rel_gap);
    if (at.ok && (!any || at.certified < best.certified)) {
      best = std::move(at);
      best_name = cheb ? "chebyshev" : "monomial";
      best_basis = basis;
      any = true;
    }
  }
  if (!any) throw SolverError("S(k, alpha) interior-point solve did not converge", worst_gap);

  sol.q = best_basis.to_monomial * best.p;
  sol.value = best.certified;
  sol.grid_value = best.grid_value;
  sol.basis = best_name;
  sol.iterations = best.iterations;
  sol.rel_gap = best.rel_gap;
  return sol;
}

// ----------------------------------------------------------------------------
// Closed-form perturbation norms for the 1/L gradient method.

struct GradientModelNorms {
  double X_norm = 0.0;
  double U_norm = 0.0;
  double Eps_norm = 0.0;
  double E_norm = 0.0;
  double P_norm = 0.0;
};

inline GradientModelNorms gradient_model_bounds(const ProblemSpec& spec, double d0, long k) {
  if (!(spec.mu > 0.0)) throw DomainError("gradient model bounds need mu > 0");
  spec.validate();
  if (!(d0 >= 0.0) || k < 0) throw DomainError("need d0 >= 0 and k >= 0");
  const double L = spec.L, mu = spec.mu, M = spec.M_hess;
  const double q = mu / L;
  const double kd = static_cast<double>(k);
  const double r = std::sqrt((L - mu) / (L + mu));
  GradientModelNorms n;
  n.X_norm = (r == 1.0 ? kd : (1.0 - std::pow(r, kd)) / (1.0 - r)) * d0;
  n.U_norm = (L / mu) * (1.0 - std::pow(1.0 - q, kd)) * d0;
  const double c = 1.0 + L / mu;
  n.Eps_norm = c * c * M / (2.0 * L) *
               (0.5 - std::pow(1.0 - q, kd) + 0.5 * std::pow((1.0 - q) / (1.0 + q), kd)) * d0 * d0;
  n.Eps_norm = std::max(n.Eps_norm, 0.0);
  n.E_norm = 2.0 * n.Eps_norm;
  n.P_norm = 2.0 * n.U_norm * n.E_norm + n.E_norm * n.E_norm;
  return n;
}

struct BoundInputs {
  ProblemSpec spec;
  double d0 = 1.0;
  long k = 1;
  double lambda = 0.0;
  std::optional<double> P_norm, E_norm, Eps_norm, U_norm;
};

struct BoundReport {
  double zeta = 0.0;
  double rate = 0.0;       // Chebyshev rate for (k, sigma)
  double alpha = 0.0;      // lambda / d0^2
  double S = 0.0;
  double prefactor = 0.0;  // the square-root factor multiplying sqrt(S) d0
  double bound = 0.0;
};

inline BoundReport rmpe_bound_report(const BoundInputs& in, const SkAlphaOptions& opt = {}) {
  if (!(in.lambda > 0.0) || !std::isfinite(in.lambda)) throw DomainError("rmpe_bound needs lambda > 0");
  if (!(in.d0 > 0.0)) throw DomainError("d0 must be positive");
  in.spec.validate();
  GradientModelNorms model;
  const bool need_model = !in.P_norm || !in.Eps_norm || !in.E_norm || !in.U_norm;
  if (need_model) model = gradient_model_bounds(in.spec, in.d0, in.k);
  const double P = in.P_norm.value_or(model.P_norm);
  const double Eps = in.Eps_norm.value_or(model.Eps_norm);
  if (P < 0.0 || Eps < 0.0 || in.E_norm.value_or(0.0) < 0.0 || in.U_norm.value_or(0.0) < 0.0)
    throw DomainError("norms must be non-negative");

  const double kappa = in.spec.kappa();
  const double lam = in.lambda;
  BoundReport rep;
  rep.zeta = zeta(in.spec.sigma());
  rep.rate = cheby_rate(in.k, in.spec.sigma());
  rep.alpha = lam / (in.d0 * in.d0);
  rep.S = s_k_alpha(in.k, in.spec.sigma(), rep.alpha, opt).value;
  const double inner = (1.0 + P / lam) * (Eps + kappa * P / (2.0 * std::sqrt(lam)));
  rep.prefactor = std::sqrt(kappa * kappa + inner * inner / lam);
  rep.bound = rep.prefactor * std::sqrt(rep.S) * in.d0;
  return rep;
}

inline double rmpe_bound(const BoundInputs& in, const SkAlphaOptions& opt = {}) {
  return rmpe_bound_report(in, opt).bound;
}

struct SpeedupPoint {
  long k = 0;
  double lambda_rel = 0.0;  // lambda / d0^2 with lambda = P_norm
  double bound = 0.0;
  double speedup = 0.0;
};

// Gradient steps needed to reach the bound (at rate r per step), divided by k.
inline std::vector<SpeedupPoint> speedup_curve(const ProblemSpec& spec, double d0, const std::vector<long>& ks,
                                               const SkAlphaOptions& opt = {}) {
  spec.validate();
  const double r = std::sqrt((spec.L - spec.mu) / (spec.L + spec.mu));
  std::vector<SpeedupPoint> out;
  for (long k : ks) {
    if (k < 1) throw DomainError("speedup needs k >= 1");
    const GradientModelNorms nm = gradient_model_bounds(spec, d0, k);
    BoundInputs in{spec, d0, k, nm.P_norm, nm.P_norm, nm.E_norm, nm.Eps_norm, nm.U_norm};
    SpeedupPoint pt;
    pt.k = k;
    pt.lambda_rel = nm.P_norm / (d0 * d0);
    pt.bound = rmpe_bound(in, opt);
    if (pt.bound < d0 && r > 0.0) pt.speedup = std::log(pt.bound / d0) / std::log(r) / static_cast<double>(k);
    out.push_back(pt);
  }
  return out;
}

inline void write_curve_csv(std::ostream& os, const std::vector<std::pair<long, double>>& curve) {
  os << "k,value\n";
  const auto old = os.precision(17);
  for (const auto& [k, v] : curve) os << k << ',' << v << '\n';
  os.precision(old);
}

}  // namespace rmpe
