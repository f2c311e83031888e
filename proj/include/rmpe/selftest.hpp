#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rmpe/adaptive.hpp"
#include "rmpe/bounds.hpp"
#include "rmpe/dataset.hpp"
#include "rmpe/experiment.hpp"
#include "rmpe/extrapolation.hpp"
#include "rmpe/objectives.hpp"
#include "rmpe/optimizers.hpp"

namespace rmpe::selftest {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double limit_seconds = 0.0;  // 0 = no limit
};

namespace detail {

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline Matrix random_orthogonal(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> g;
  Matrix R(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) R(i, j) = g(rng);
  return Eigen::HouseholderQR<Matrix>(R).householderQ();
}

inline Vector gaussian(std::mt19937_64& rng, Index n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

inline Matrix gaussian(std::mt19937_64& rng, Index r, Index c, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

// Symmetric A = Q diag(ev) Q' with ev uniform in [lo, hi].
inline LinearModel random_symmetric_model(std::mt19937_64& rng, Index n, double lo, double hi, Vector* ev_out = nullptr) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector ev(n);
  for (Index i = 0; i < n; ++i) ev(i) = u(rng);
  const Matrix Q = random_orthogonal(rng, n);
  LinearModel m;
  m.A = Q * ev.asDiagonal() * Q.transpose();
  m.A = 0.5 * (m.A + m.A.transpose()).eval();
  m.fixed_point = gaussian(rng, n);
  if (ev_out) *ev_out = ev;
  return m;
}

// Scaled Chebyshev polynomial C_k(t(x)) / C_k(t(1)) with t(x) = (2x - sigma) / sigma.
inline double scaled_chebyshev(long k, double sigma, double x) {
  auto ck = [k](double t) {
    if (std::abs(t) <= 1.0) return std::cos(static_cast<double>(k) * std::acos(t));
    const double v = std::cosh(static_cast<double>(k) * std::acosh(std::abs(t)));
    return (t < 0.0 && (k % 2)) ? -v : v;
  };
  return ck((2.0 * x - sigma) / sigma) / ck((2.0 - sigma) / sigma);
}

struct LogisticSuite {
  std::vector<ExperimentResult> runs;  // one per seed
  double seconds = 0.0;
};

inline ExperimentConfig logistic_config(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.problem.kind = ProblemConfig::Kind::logistic;
  cfg.problem.data = std::make_shared<const Dataset>(synth_dataset(seed, 500, 50, 10.0));
  cfg.problem.tau = 1e-4;
  cfg.budget = 2000;
  cfg.seed = seed;
  cfg.timing = false;
  cfg.methods = {parse_method("gradient", 10), parse_method("nesterov", 10), parse_method("rmpe", 10),
                 parse_method("ampe", 10)};
  return cfg;
}

inline LogisticSuite run_logistic_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  LogisticSuite s;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) s.runs.push_back(run_experiment(logistic_config(seed)));
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

inline const MethodTrace& trace_of(const ExperimentResult& r, const std::string& name) {
  for (const auto& t : r.traces)
    if (t.method == name) return t;
  throw StructuralError("missing trace " + name);
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

inline CriterionResult exact_recovery() {
  CriterionResult r{1, "exact recovery", true, "", 0.0, 1.0};
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> dim(1, 10);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Index n = dim(rng);
    const LinearModel m = detail::random_symmetric_model(rng, n, 0.0, 0.9);
    const Vector x0 = detail::gaussian(rng, n);
    const IterateWindow w = IterateWindow::from(m.iterates(x0, n + 2));
    const Vector x = extrapolate(w, 0.0);
    worst = std::max(worst, (x - m.fixed_point).norm() / (x0 - m.fixed_point).norm());
  }
  r.pass = worst <= 1e-8;
  r.detail = "50 models, worst relative error " + detail::fmt("%.2e", worst) + " (limit 1e-8)";
  return r;
}

inline CriterionResult ampe_error_bound() {
  CriterionResult r{2, "AMPE error bound", true, "", 0.0, 5.0};
  std::mt19937_64 rng(202);
  const Index n = 20;
  const double sigma = 0.9;
  int violations = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 20; ++t) {
    Vector ev;
    const LinearModel m = detail::random_symmetric_model(rng, n, 0.0, sigma, &ev);
    const double kappa_AI = (1.0 - ev.minCoeff()) / (1.0 - ev.maxCoeff());
    const Vector x0 = detail::gaussian(rng, n);
    const double d0 = (x0 - m.fixed_point).norm();
    for (long k = 1; k <= 8; ++k) {
      const IterateWindow w = IterateWindow::from(m.iterates(x0, k + 2));
      const double err = (extrapolate(w, 0.0) - m.fixed_point).norm();
      const double bound = ampe_bound(kappa_AI, k, sigma, d0) + 1e-8;
      min_margin = std::min(min_margin, bound - err);
      if (err > bound) ++violations;
    }
  }
  r.pass = violations == 0;
  r.detail = "160 (model, k) pairs, " + std::to_string(violations) + " violations, min margin " +
             detail::fmt("%.2e", min_margin);
  return r;
}

inline CriterionResult coefficient_bounds() {
  CriterionResult r{3, "coefficient and perturbation bounds", true, "", 0.0, 10.0};
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> rows(3, 12), cols(1, 6);
  std::uniform_real_distribution<double> loglam(-3.0, 1.0), logeps(-6.0, -2.0);
  int norm_viol = 0, shift_viol = 0;
  double worst_match = 0.0, min_norm_margin = std::numeric_limits<double>::infinity();
  double min_shift_margin = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 1000; ++t) {
    const Index n = rows(rng), k1 = cols(rng);
    const Matrix U = detail::gaussian(rng, n, k1);
    const Matrix E = detail::gaussian(rng, n, k1, std::pow(10.0, logeps(rng)));
    const double lam = std::pow(10.0, loglam(rng));
    const Vector c = rmpe_coefficients(U, lam).c;
    const double nb = coefficient_norm_bound(U, lam);
    min_norm_margin = std::min(min_norm_margin, nb - c.norm());
    if (c.norm() > nb) ++norm_viol;

    const Matrix Ut = U + E;
    const Matrix P = Ut.transpose() * Ut - U.transpose() * U;
    const Vector dc = perturbation_shift(U, E, lam);
    const double sb = P.operatorNorm() / lam * c.norm();
    min_shift_margin = std::min(min_shift_margin, sb - dc.norm());
    if (dc.norm() > sb) ++shift_viol;
    const Vector direct = rmpe_coefficients(Ut, lam).c - c;
    worst_match = std::max(worst_match, (dc - direct).cwiseAbs().maxCoeff());
  }
  r.pass = norm_viol == 0 && shift_viol == 0 && worst_match <= 1e-9;
  r.detail = "1000 draws: ||c|| violations " + std::to_string(norm_viol) + " (min margin " +
             detail::fmt("%.2e", min_norm_margin) + "), ||dc|| violations " + std::to_string(shift_viol) +
             " (min margin " + detail::fmt("%.2e", min_shift_margin) + "), shift vs re-solve " +
             detail::fmt("%.2e", worst_match);
  return r;
}

inline CriterionResult online_batch() {
  CriterionResult r{4, "online equals batch", true, "", 0.0, 0.0};
  std::mt19937_64 rng(404);
  double worst = 0.0;
  int cases = 0;
  for (Index n : {2, 10, 100}) {
    for (Index k = 1; k <= 15; ++k) {
      const double lam = 0.1;
      OnlineExtrapolator online(k, lam);
      // Fill the window and slide it a few times.
      for (Index i = 0; i < k + 5; ++i) {
        online.push(detail::gaussian(rng, n));
        if (!online.ready()) continue;
        const Vector a = online.coefficients().c;
        const Vector b = rmpe_coefficients(build_difference_matrix(online.window()), lam).c;
        worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
        ++cases;
      }
    }
  }
  r.pass = worst <= 1e-10;
  r.detail = std::to_string(cases) + " windows, worst coefficient difference " + detail::fmt("%.2e", worst);
  return r;
}

inline CriterionResult chebyshev_method() {
  CriterionResult r{5, "Chebyshev iteration", true, "", 0.0, 0.0};
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> logcond(0.3, 3.0);
  double worst_match = 0.0, min_margin = std::numeric_limits<double>::infinity();
  int violations = 0;
  for (int t = 0; t < 20; ++t) {
    const Index n = 12;
    const double mu = 1.0, L = std::pow(10.0, logcond(rng));
    Vector ev(n);
    std::uniform_real_distribution<double> u(mu, L);
    for (Index i = 0; i < n; ++i) ev(i) = u(rng);
    ev(0) = mu;
    ev(1) = L;
    const Matrix Q = detail::random_orthogonal(rng, n);
    const Matrix B = Q * ev.asDiagonal() * Q.transpose();
    const Vector xs = detail::gaussian(rng, n);
    const Vector b = B * xs;
    const Vector x0 = detail::gaussian(rng, n);
    const double sigma = 1.0 - mu / L;
    const double d0 = (x0 - xs).norm();
    const std::vector<Vector> ys = chebyshev_run(B, b, L, mu, x0, 12);
    for (long k = 0; k <= 12; ++k) {
      // Direct evaluation of T_k(A) with A = I - B/L in the eigenbasis.
      Vector tk(n);
      for (Index i = 0; i < n; ++i) tk(i) = detail::scaled_chebyshev(k, sigma, 1.0 - ev(i) / L);
      const Vector direct = Q * tk.asDiagonal() * Q.transpose() * (x0 - xs);
      const Vector err = ys[static_cast<std::size_t>(k)] - xs;
      worst_match = std::max(worst_match, (err - direct).norm() / d0);
      const double bound = cheby_rate(k, sigma) * d0;
      min_margin = std::min(min_margin, bound - err.norm());
      if (err.norm() > bound * (1.0 + 1e-12) + 1e-14 * d0) ++violations;
    }
  }
  r.pass = worst_match <= 1e-9 && violations == 0;
  r.detail = "20 SPD quadratics, k <= 12: recurrence vs direct " + detail::fmt("%.2e", worst_match) +
             ", rate-bound violations " + std::to_string(violations) + " (min margin " +
             detail::fmt("%.2e", min_margin) + ")";
  return r;
}

inline CriterionResult nesterov_identity(std::vector<std::string>* counterexamples = nullptr) {
  CriterionResult r{6, "Nesterov polynomial identities", true, "", 0.0, 0.0};
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> logq(-6.0, 0.0);
  double worst_id = 0.0;
  for (int t = 0; t < 100; ++t) {
    const double L = 1.0, mu = std::pow(10.0, logq(rng));
    const double beta = nesterov_beta(L, mu);
    const double sigma = 1.0 - mu / L;
    const double rr = 1.0 - std::sqrt(mu / L);
    worst_id = std::max(worst_id, std::abs(sigma * ((1.0 + beta) * rr - beta) - rr * rr));
  }
  // N_k(1) via the recurrence, plus the backward error of the monomial coefficient vector.
  double worst_one = 0.0, worst_coeff = 0.0;
  std::vector<double> convex_betas;
  double tk = 1.0;
  for (Index j = 1; j <= kMaxNesterovDegree; ++j) {
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    convex_betas.push_back((tk - 1.0) / tn);
    tk = tn;
  }
  std::uniform_real_distribution<double> ub(0.0, 1.0);
  for (Index k = 0; k <= kMaxNesterovDegree; ++k) {
    std::vector<double> constant(static_cast<std::size_t>(k), ub(rng));
    for (const std::vector<double>* betas : {&convex_betas, &constant}) {
      worst_one = std::max(worst_one, std::abs(nesterov_eval(k, *betas, 1.0) - 1.0));
      const PolynomialCoeffs p = nesterov_polynomial(k, *betas);
      worst_coeff = std::max(worst_coeff, std::abs(p.sum() - 1.0) / std::max(1.0, p.cwiseAbs().sum()));
    }
  }
  int probes = 0, fails = 0;
  for (double sigma : {0.5, 0.9, 0.99}) {
    const double s = std::sqrt(1.0 - sigma);
    const double beta = (1.0 - s) / (1.0 + s);
    for (Index k = 1; k <= 30; ++k) {
      const ConjectureProbe p = nesterov_conjecture_probe(k, sigma, beta, 1000);
      ++probes;
      if (!p.max_at_sigma) {
        ++fails;
        if (counterexamples)
          counterexamples->push_back("k=" + std::to_string(k) + " sigma=" + detail::fmt("%g", sigma) +
                                     " max " + detail::fmt("%.6e", p.max_abs) + " at x=" +
                                     detail::fmt("%.6f", p.argmax) + " vs " +
                                     detail::fmt("%.6e", p.value_at_sigma) + " at sigma");
      }
    }
  }
  r.pass = worst_id <= 1e-12 && worst_one <= 1e-12 && worst_coeff <= 1e-12;
  r.detail = "identity error " + detail::fmt("%.2e", worst_id) + ", |N_k(1) - 1| " + detail::fmt("%.2e", worst_one) +
             ", coefficient sum error / sum|c| " + detail::fmt("%.2e", worst_coeff) +
             ", conjecture probe " + std::to_string(probes - fails) + "/" + std::to_string(probes) +
             " with max at sigma (" + std::to_string(fails) + " counterexamples logged)";
  return r;
}

inline CriterionResult s_k_alpha_properties() {
  CriterionResult r{7, "S(k, alpha) properties", true, "", 0.0, 0.0};
  const std::vector<double> alphas{0.0, 1e-6, 1e-3, 1.0};
  int rate_viol = 0, k_viol = 0, a_viol = 0, closed_viol = 0;
  // Certified values are upper bounds from an iterative solver; allow rounding-level slack.
  const double slack = 1e-6;
  for (double sigma : {0.5, 0.9, 0.99}) {
    std::vector<double> prev_k(alphas.size(), std::numeric_limits<double>::infinity());
    for (long k = 0; k <= 20; ++k) {
      double prev_a = -1.0;
      for (std::size_t i = 0; i < alphas.size(); ++i) {
        const double v = s_k_alpha(k, sigma, alphas[i]).value;
        if (k == 0 && v != 1.0 + alphas[i]) ++closed_viol;
        if (alphas[i] == 0.0 && std::sqrt(v) > cheby_rate(k, sigma)) ++rate_viol;
        if (v > prev_k[i] * (1.0 + slack)) ++k_viol;
        if (v < prev_a * (1.0 - slack)) ++a_viol;
        prev_k[i] = v;
        prev_a = v;
      }
    }
  }
  r.pass = rate_viol + k_viol + a_viol + closed_viol == 0;
  r.detail = "k <= 20, sigma in {0.5, 0.9, 0.99}: rate violations " + std::to_string(rate_viol) +
             ", k-monotonicity " + std::to_string(k_viol) + ", alpha-monotonicity " + std::to_string(a_viol) +
             ", k=0 closed form " + std::to_string(closed_viol);
  return r;
}

inline CriterionResult speedup_reconstruction(std::vector<SpeedupPoint>* curve = nullptr) {
  CriterionResult r{8, "speedup curve", true, "", 0.0, 30.0};
  const ProblemSpec spec{100.0, 10.0, 0.1};
  std::vector<long> ks;
  for (long k = 1; k <= 30; ++k) ks.push_back(k);
  const std::vector<SpeedupPoint> pts = speedup_curve(spec, 1e-4, ks);
  long first = -1, last = -1;
  bool contiguous = true;
  double peak = 0.0;
  long peak_k = 0;
  for (const auto& p : pts) {
    if (p.speedup > peak) {
      peak = p.speedup;
      peak_k = p.k;
    }
    if (p.speedup > 1.0) {
      if (first < 0) first = p.k;
      if (last >= 0 && p.k != last + 1) contiguous = false;
      last = p.k;
    }
  }
  if (curve) *curve = pts;
  r.pass = first > 0 && contiguous;
  r.detail = first > 0 ? "speedup > 1 for k in [" + std::to_string(first) + ", " + std::to_string(last) + "]" +
                             (contiguous ? "" : " (not contiguous)") + ", peak " + detail::fmt("%.3f", peak) +
                             " at k=" + std::to_string(peak_k)
                       : "speedup never exceeds 1 (peak " + detail::fmt("%.3f", peak) + ")";
  return r;
}

inline CriterionResult asymptotic_corollary() {
  CriterionResult r{9, "asymptotic corollary", true, "", 0.0, 0.0};
  const ProblemSpec spec{100.0, 10.0, 0.1};
  const double d0 = 1e-8;
  double worst_pref = 0.0, worst_s = 0.0, worst_upper = 0.0, literal_lo = 1e300, literal_hi = 0.0;
  for (double beta : {0.5, 1.0, 2.0}) {
    const double a = asymptotic_constant(beta) * spec.kappa();
    for (long k : {1L, 2L, 3L, 4L, 5L, 8L}) {
      const GradientModelNorms nm = gradient_model_bounds(spec, d0, k);
      const BoundInputs in{spec, d0, k, beta * nm.P_norm, nm.P_norm, nm.E_norm, nm.Eps_norm, nm.U_norm};
      const BoundReport rep = rmpe_bound_report(in);
      worst_pref = std::max(worst_pref, std::abs(rep.prefactor / a - 1.0));
      const double literal = rep.bound / (a * rep.rate * d0);
      literal_lo = std::min(literal_lo, literal);
      literal_hi = std::max(literal_hi, literal);
      worst_upper = std::max(worst_upper, literal);
      if (k <= 5) {
        const double s0 = s_k_alpha(k, spec.sigma(), 0.0).value;
        worst_s = std::max(worst_s, std::abs(rep.bound / (a * std::sqrt(s0) * d0) - 1.0));
      }
    }
  }
  r.pass = worst_pref <= 0.05 && worst_s <= 0.05 && worst_upper <= 1.05;
  r.detail = "d0=1e-8: prefactor/(c(beta) kappa) off by " + detail::fmt("%.2e", worst_pref) +
             ", bound/(c(beta) kappa sqrt(S(k,0)) d0) off by " + detail::fmt("%.2e", worst_s) +
             " (k<=5), bound/(c(beta) kappa rate d0) in [" + detail::fmt("%.3f", literal_lo) + ", " +
             detail::fmt("%.3f", literal_hi) + "]";
  return r;
}

inline CriterionResult end_to_end(const detail::LogisticSuite& s) {
  CriterionResult r{10, "end-to-end acceleration", true, "", s.seconds, 60.0};
  std::vector<double> g, nv, rm;
  for (const auto& run : s.runs) {
    g.push_back(detail::trace_of(run, "gradient").records.back().f_gap);
    nv.push_back(detail::trace_of(run, "nesterov").records.back().f_gap);
    rm.push_back(detail::trace_of(run, "rmpe_k10").records.back().f_gap);
  }
  const double mg = detail::median(g), mn = detail::median(nv), mr = detail::median(rm);
  r.pass = mr * 10.0 <= mg && mr <= mn;
  r.detail = "median final f_gap over 5 seeds: rmpe " + detail::fmt("%.3e", mr) + ", gradient " +
             detail::fmt("%.3e", mg) + ", nesterov " + detail::fmt("%.3e", mn);
  return r;
}

inline CriterionResult instability(const detail::LogisticSuite& s) {
  CriterionResult r{11, "AMPE instability", true, "", 0.0, 0.0};
  int events = 0, bad_cycles = 0, bad_boundaries = 0;
  double biggest = 0.0;
  for (const auto& run : s.runs) {
    const double floor = 1e-9 * std::max(1.0, std::abs(run.f_star));
    const auto& ampe = detail::trace_of(run, "ampe_k10").records;
    for (std::size_t i = 1; i < ampe.size(); ++i) {
      const double a = ampe[i - 1].f_gap, b = ampe[i].f_gap;
      if (b > floor && a > 0.0 && b >= 10.0 * a) {
        ++events;
        biggest = std::max(biggest, b / a);
      }
    }
    const MethodTrace& rm = detail::trace_of(run, "rmpe_k10");
    const double slack = 1e-15 * std::max(1.0, std::abs(run.f_star));
    for (const auto& c : rm.cycles)
      if (!c.failed && !(c.f_out <= c.f_raw)) ++bad_cycles;
    // Cycle-start values: records at multiples of k+1 oracle calls.
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& rec : rm.records) {
      if (rec.oracle_calls % 11 != 0) continue;
      if (rec.f_gap > prev + slack) ++bad_boundaries;
      prev = rec.f_gap;
    }
  }
  r.pass = events > 0 && bad_cycles == 0 && bad_boundaries == 0;
  r.detail = "AMPE f_gap jumps >= 10x: " + std::to_string(events) +
             (events ? " (largest " + detail::fmt("%.1f", biggest) + "x)" : std::string()) +
             "; RMPE safeguard violations " + std::to_string(bad_cycles) + ", non-monotone cycle starts " +
             std::to_string(bad_boundaries);
  return r;
}

// Runs every criterion; each result's seconds is its own wall time.
inline std::vector<CriterionResult> run_all(const std::function<void(const CriterionResult&)>& on_result = {}) {
  std::vector<CriterionResult> out;
  auto timed = [&](int id, const char* name, const std::function<CriterionResult()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult res;
    try {
      res = fn();
    } catch (const std::exception& e) {
      res.pass = false;
      res.detail = std::string("exception: ") + e.what();
    }
    res.id = id;
    res.name = name;
    if (res.seconds == 0.0)
      res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (res.limit_seconds > 0.0 && res.seconds > res.limit_seconds) {
      res.pass = false;
      res.detail += "; over time limit";
    }
    out.push_back(res);
    if (on_result) on_result(res);
  };
  timed(1, "exact recovery", exact_recovery);
  timed(2, "AMPE error bound", ampe_error_bound);
  timed(3, "coefficient and perturbation bounds", coefficient_bounds);
  timed(4, "online equals batch", online_batch);
  timed(5, "Chebyshev iteration", chebyshev_method);
  timed(6, "Nesterov polynomial identities", [] { return nesterov_identity(); });
  timed(7, "S(k, alpha) properties", s_k_alpha_properties);
  timed(8, "speedup curve", [] { return speedup_reconstruction(); });
  timed(9, "asymptotic corollary", asymptotic_corollary);
  std::shared_ptr<detail::LogisticSuite> suite;
  std::string suite_error;
  try {
    suite = std::make_shared<detail::LogisticSuite>(detail::run_logistic_suite());
  } catch (const std::exception& e) {
    suite_error = e.what();
  }
  timed(10, "end-to-end acceleration", [&] {
    if (!suite) throw Error(suite_error);
    return end_to_end(*suite);
  });
  timed(11, "AMPE instability", [&] {
    if (!suite) throw Error(suite_error);
    return instability(*suite);
  });
  return out;
}

inline std::string format_line(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.pass ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << ": " << r.detail << " ("
     << detail::fmt("%.2f", r.seconds) << " s";
  if (r.limit_seconds > 0.0) os << ", limit " << detail::fmt("%g", r.limit_seconds) << " s";
  os << ")";
  return os.str();
}

}  // namespace rmpe::selftest
