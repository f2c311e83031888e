#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rmpe/errors.hpp"
#include "rmpe/extrapolation.hpp"
#include "rmpe/trace.hpp"

namespace rmpe {

struct AdaptiveConfig {
  std::optional<double> lambda0;     // default: ||U'U||_F / (k+1) of the current window
  std::optional<double> lambda_min;  // default: 1e-12 * lambda0
  double shrink = 0.5;
  Index k = 5;
  bool restart = true;
  std::optional<double> fixed_lambda;  // skip the search and use this lambda
  bool safeguard = true;               // never return a point worse than the last raw iterate
  SolveOptions solve{};

  void validate() const {
    if (k < 0) throw InvalidConfigError("k must be non-negative");
    if (!(shrink > 0.0) || !(shrink < 1.0)) throw InvalidConfigError("shrink must lie in (0, 1)");
    if (lambda0 && !(*lambda0 > 0.0)) throw InvalidConfigError("lambda0 must be positive");
    if (lambda_min && !(*lambda_min > 0.0)) throw InvalidConfigError("lambda_min must be positive");
    if (lambda0 && lambda_min && *lambda_min > *lambda0) throw InvalidConfigError("lambda_min exceeds lambda0");
    if (fixed_lambda && !(*fixed_lambda >= 0.0)) throw InvalidConfigError("fixed_lambda must be non-negative");
  }
};

struct LambdaCandidate {
  double lambda = 0.0;
  double f = 0.0;
  bool valid = false;
};

struct AdaptiveResult {
  Coefficients coeffs;
  Vector x;
  double f = 0.0;
  Index f_calls = 0;
  std::vector<LambdaCandidate> candidates;
};

inline double default_lambda0(const Matrix& U) {
  return (U.transpose() * U).norm() / static_cast<double>(U.cols());
}

// Dichotomy on lambda: shrink until f stops decreasing or lambda falls below lambda_min.
template <class F>
AdaptiveResult adaptive_lambda(const IterateWindow& window, F&& f_oracle, const AdaptiveConfig& cfg) {
  cfg.validate();
  const Matrix U = build_difference_matrix(window);
  AdaptiveResult res;

  auto evaluate = [&](double lam) -> std::optional<Coefficients> {
    try {
      return rmpe_coefficients(U, lam, cfg.solve);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  auto consider = [&](double lam) -> bool {
    LambdaCandidate cand{lam, std::numeric_limits<double>::quiet_NaN(), false};
    auto sol = evaluate(lam);
    if (sol) {
      Vector x = combine(window, sol->c);
      if (x.allFinite()) {
        cand.f = f_oracle(x);
        ++res.f_calls;
        cand.valid = std::isfinite(cand.f);
        if (cand.valid && (!res.x.size() || cand.f < res.f)) {
          res.coeffs = *sol;
          res.x = std::move(x);
          res.f = cand.f;
        }
      }
    }
    res.candidates.push_back(cand);
    return cand.valid;
  };

  if (cfg.fixed_lambda) {
    consider(*cfg.fixed_lambda);
  } else {
    const double lam0 = cfg.lambda0.value_or(default_lambda0(U));
    if (!(lam0 > 0.0)) {
      // U = 0: every candidate gives the same point.
      consider(0.0);
    } else {
      const double lam_min = cfg.lambda_min.value_or(1e-12 * lam0);
      double lam = lam0;
      double prev = std::numeric_limits<double>::infinity();
      while (true) {
        if (!consider(lam)) break;
        const double fl = res.candidates.back().f;
        if (fl > prev) break;
        prev = fl;
        lam *= cfg.shrink;
        if (lam < lam_min) break;
      }
    }
  }
  if (!res.x.size()) throw AllCandidatesInvalidError("no lambda candidate produced a finite objective value");
  return res;
}

struct CycleRecord {
  double lambda = std::numeric_limits<double>::quiet_NaN();
  Index f_calls = 0;
  Index candidates = 0;
  Index stepper_calls = 0;
  bool fell_back = false;  // safeguard kept the raw iterate
  bool failed = false;     // extrapolation itself failed
  double f_raw = std::numeric_limits<double>::quiet_NaN();
  double f_out = std::numeric_limits<double>::quiet_NaN();
};

struct AcceleratedRun {
  ConvergenceTrace trace;
  std::vector<double> chosen_lambdas;
  std::vector<CycleRecord> cycles;
  std::int64_t stepper_calls = 0;
  std::int64_t f_calls = 0;
  Vector x;
};

using Probe = std::function<TraceRecord(std::int64_t, const Vector&)>;

// Restart-every-k acceleration: k+1 stepper calls per cycle, then one extrapolation.
// The probe only feeds the trace; its evaluations are not counted as f_oracle calls.
template <class Stepper, class F>
AcceleratedRun run_accelerated(Stepper&& stepper, const Vector& x0, F&& f_oracle, const AdaptiveConfig& cfg,
                               std::int64_t budget, Probe probe = {}) {
  cfg.validate();
  if (budget < 0) throw InvalidConfigError("budget must be non-negative");
  if (!probe) {
    probe = [&f_oracle](std::int64_t calls, const Vector& x) {
      return TraceRecord{calls, static_cast<double>(f_oracle(x)), std::numeric_limits<double>::quiet_NaN(), 0};
    };
  }
  AcceleratedRun run;
  run.trace.push_back(probe(0, x0));
  Vector start = x0;

  auto record = [&](const Vector& x, bool supersede) {
    TraceRecord r = probe(run.stepper_calls, x);
    if (supersede && !run.trace.empty() && run.trace.back().oracle_calls == r.oracle_calls)
      run.trace.back() = r;
    else
      run.trace.push_back(r);
  };

  // Extrapolates window w and returns the next start point.
  auto finish_cycle = [&](const IterateWindow& w, CycleRecord& cyc) -> Vector {
    const Vector& raw = w.back();
    Vector out = raw;
    try {
      AdaptiveResult ar = adaptive_lambda(w, f_oracle, cfg);
      cyc.f_calls += ar.f_calls;
      cyc.candidates = static_cast<Index>(ar.candidates.size());
      cyc.lambda = ar.coeffs.lambda;
      cyc.f_out = ar.f;
      out = ar.x;
      if (cfg.safeguard) {
        cyc.f_raw = f_oracle(raw);
        ++cyc.f_calls;
        if (!(ar.f <= cyc.f_raw)) {
          out = raw;
          cyc.fell_back = true;
          cyc.f_out = cyc.f_raw;
        }
      }
    } catch (const Error&) {
      cyc.failed = true;
    }
    if (!cyc.failed && !cyc.fell_back) run.chosen_lambdas.push_back(cyc.lambda);
    return out;
  };

  const Index per_cycle = cfg.k + 1;
  IterateWindow w(cfg.k);
  w.push(x0);
  Vector x = x0;
  while (run.stepper_calls < budget) {
    if (cfg.restart) {
      w.clear();
      w.push(start);
      x = start;
    }
    CycleRecord cyc;
    while (cyc.stepper_calls < per_cycle && run.stepper_calls < budget) {
      x = stepper(x);
      ++run.stepper_calls;
      ++cyc.stepper_calls;
      if (!x.allFinite()) throw DivergedError("base method produced a non-finite iterate", run.trace);
      w.push(x);
      record(x, false);
    }
    if (w.full() || w.size() >= 3) {
      std::optional<IterateWindow> partial;
      if (!w.full()) {
        std::vector<Vector> xs;
        for (Index i = 0; i < w.size(); ++i) xs.push_back(w[i]);
        partial = IterateWindow::from(xs);
      }
      start = finish_cycle(partial ? *partial : w, cyc);
      run.f_calls += cyc.f_calls;
      record(start, true);
    } else {
      start = x;
    }
    run.cycles.push_back(cyc);
  }
  run.x = start;
  return run;
}

}  // namespace rmpe
