#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "rmpe/adaptive.hpp"
#include "rmpe/dataset.hpp"
#include "rmpe/errors.hpp"
#include "rmpe/objectives.hpp"
#include "rmpe/optimizers.hpp"
#include "rmpe/trace.hpp"

namespace rmpe {

struct Objective {
  std::function<std::pair<double, Vector>(const Vector&)> value_grad;
  ProblemSpec spec;
  Index dim = 0;
  std::string name;

  double value(const Vector& x) const { return value_grad(x).first; }
  Vector grad(const Vector& x) const { return value_grad(x).second; }
};

inline Objective make_objective(LogisticProblem p) {
  auto shared = std::make_shared<const LogisticProblem>(std::move(p));
  Objective o;
  o.spec = lipschitz_constants(*shared);
  o.dim = shared->Z.cols();
  o.name = "logistic(tau=" + std::to_string(shared->tau) + ")";
  o.value_grad = [shared](const Vector& w) { return logistic_value_grad(*shared, w); };
  return o;
}

inline Objective make_objective(QuadraticProblem p) {
  auto shared = std::make_shared<const QuadraticProblem>(std::move(p));
  Objective o;
  o.spec = shared->spec();
  o.dim = shared->B.cols();
  o.name = "quadratic";
  o.value_grad = [shared](const Vector& x) { return quadratic_value_grad(*shared, x); };
  return o;
}

// SPD quadratic with spectrum log-spaced in [1, cond] and a random eigenbasis.
inline QuadraticProblem synth_quadratic(std::uint64_t seed, Index n, double cond) {
  if (n < 1 || !(cond >= 1.0)) throw DomainError("synthetic quadratic needs n >= 1 and cond >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix R(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) R(i, j) = g(rng);
  const Matrix Q = Eigen::HouseholderQR<Matrix>(R).householderQ();
  Vector ev(n);
  for (Index i = 0; i < n; ++i)
    ev(i) = n == 1 ? 1.0 : std::pow(cond, static_cast<double>(i) / static_cast<double>(n - 1));
  QuadraticProblem p;
  p.B = Q * ev.asDiagonal() * Q.transpose();
  p.B = 0.5 * (p.B + p.B.transpose()).eval();
  p.b.resize(n);
  for (Index i = 0; i < n; ++i) p.b(i) = g(rng);
  return p;
}

struct ReferenceResult {
  Vector x;
  double f = 0.0;
  std::int64_t calls = 0;
  double grad_norm = 0.0;
};

// Strongly convex Nesterov with gradient restart, stopped at ||grad|| <= tol * max(1, ||grad(0)||).
inline ReferenceResult reference_optimum(const Objective& obj, double tol = 1e-13,
                                         std::int64_t max_calls = 10'000'000) {
  obj.spec.validate();
  const double L = obj.spec.L;
  const double beta = nesterov_beta(obj.spec.L, obj.spec.mu);
  Vector x = Vector::Zero(obj.dim);
  Vector y = x;
  auto [f0, g] = obj.value_grad(y);
  std::int64_t calls = 1;
  const double target = tol * std::max(1.0, g.norm());
  double gn = g.norm();
  while (gn > target) {
    if (calls >= max_calls)
      throw ReferenceNotConvergedError("reference solve hit the oracle budget with ||grad|| = " +
                                           std::to_string(gn),
                                       gn);
    const Vector xn = y - g / L;
    if (g.dot(xn - x) > 0.0) {
      y = xn;  // restart momentum
    } else {
      y = xn + beta * (xn - x);
    }
    x = xn;
    auto vg = obj.value_grad(y);
    ++calls;
    g = std::move(vg.second);
    gn = g.norm();
    if (!std::isfinite(gn)) throw ReferenceNotConvergedError("reference solve diverged", gn);
  }
  ReferenceResult r;
  r.x = y;
  r.f = obj.value(y);
  r.calls = calls;
  r.grad_norm = gn;
  return r;
}

enum class MethodKind { gradient, nesterov, nesterov_convex, rmpe, ampe };

struct MethodSpec {
  MethodKind kind = MethodKind::gradient;
  Index k = 0;

  std::string name() const {
    switch (kind) {
      case MethodKind::gradient:
        return "gradient";
      case MethodKind::nesterov:
        return "nesterov";
      case MethodKind::nesterov_convex:
        return "nesterov_convex";
      case MethodKind::rmpe:
        return "rmpe_k" + std::to_string(k);
      case MethodKind::ampe:
        return "ampe_k" + std::to_string(k);
    }
    return "?";
  }
};

// Accepts gradient, nesterov, nesterov_convex, rmpe, ampe, optionally with ":k" (e.g. rmpe:10).
inline MethodSpec parse_method(const std::string& s, Index default_k) {
  const auto colon = s.find(':');
  const std::string head = s.substr(0, colon);
  MethodSpec m;
  m.k = default_k;
  if (colon != std::string::npos) {
    try {
      std::size_t used = 0;
      m.k = std::stol(s.substr(colon + 1), &used);
      if (used != s.size() - colon - 1) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw ParseError("bad window order in method '" + s + "'", 0);
    }
  }
  if (head == "gradient") {
    m.kind = MethodKind::gradient;
  } else if (head == "nesterov") {
    m.kind = MethodKind::nesterov;
  } else if (head == "nesterov_convex") {
    m.kind = MethodKind::nesterov_convex;
  } else if (head == "rmpe") {
    m.kind = MethodKind::rmpe;
  } else if (head == "ampe") {
    m.kind = MethodKind::ampe;
  } else {
    throw ParseError("unknown method '" + s + "'", 0);
  }
  if ((m.kind == MethodKind::rmpe || m.kind == MethodKind::ampe) && (m.k < 1 || m.k > 50))
    throw ParseError("window order must lie in [1, 50] for '" + s + "'", 0);
  return m;
}

struct ProblemConfig {
  enum class Kind { logistic, quadratic } kind = Kind::logistic;
  std::shared_ptr<const Dataset> data;  // logistic
  double tau = 1e-4;
  std::uint64_t seed = 0;  // quadratic
  Index n = 20;
  double cond = 1e3;
};

struct ExperimentConfig {
  ProblemConfig problem;
  std::vector<MethodSpec> methods;
  std::int64_t budget = 1000;
  std::uint64_t seed = 0;
  bool rmpe_fixed_step = false;  // base stepper 2/(L+mu) instead of 1/L
  std::optional<double> lambda0;
  std::optional<double> lambda_min;
  bool timing = true;
  // AMPE arm: plain normal equations with no pivot guard, so ill-conditioning shows.
  SolveOptions ampe_solve{1e-12, 1e-15, -std::numeric_limits<double>::infinity(), ZeroLambdaRoute::normal};
  double reference_tol = 1e-13;
  std::int64_t reference_budget = 10'000'000;

  void validate() const {
    if (budget <= 0) throw InvalidConfigError("budget must be positive");
    if (methods.empty()) throw InvalidConfigError("no methods selected");
    for (const auto& m : methods)
      if ((m.kind == MethodKind::rmpe || m.kind == MethodKind::ampe) && (m.k < 1 || m.k > 50))
        throw InvalidConfigError("window order must lie in [1, 50]");
    if (problem.kind == ProblemConfig::Kind::logistic && !problem.data)
      throw InvalidConfigError("logistic problem needs a dataset");
  }
};

struct MethodTrace {
  std::string method;
  ConvergenceTrace records;
  bool diverged = false;
  std::string error;
  std::vector<CycleRecord> cycles;
};

struct ExperimentResult {
  std::vector<MethodTrace> traces;
  std::string problem;
  std::string rmpe_step;
  ProblemSpec spec;
  double f_star = 0.0;
  Vector x_star;
  std::int64_t reference_calls = 0;
};

inline Objective build_objective(const ProblemConfig& pc) {
  if (pc.kind == ProblemConfig::Kind::logistic) {
    LogisticProblem p{pc.data->Z, pc.data->y, pc.tau};
    Objective o = make_objective(std::move(p));
    o.name = pc.data->name + " logistic(tau=" + std::to_string(pc.tau) + ")";
    return o;
  }
  Objective o = make_objective(synth_quadratic(pc.seed, pc.n, pc.cond));
  o.name = "quadratic(seed=" + std::to_string(pc.seed) + ",n=" + std::to_string(pc.n) +
           ",cond=" + std::to_string(pc.cond) + ")";
  return o;
}

inline MethodTrace run_method(const Objective& obj, const MethodSpec& m, const ExperimentConfig& cfg,
                              const ReferenceResult& ref) {
  MethodTrace out;
  out.method = m.name();
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto probe = [&](std::int64_t calls, const Vector& x) {
    TraceRecord r;
    r.oracle_calls = calls;
    r.f_gap = obj.value(x) - ref.f;
    r.dist = (x - ref.x).norm();
    r.wall_ns = cfg.timing
                    ? std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - t0).count()
                    : 0;
    return r;
  };
  const ProblemSpec& sp = obj.spec;
  auto grad = [&](const Vector& x) { return obj.grad(x); };
  const Vector x0 = Vector::Zero(obj.dim);
  try {
    switch (m.kind) {
      case MethodKind::gradient: {
        const StepperSpec s{StepperKind::gradient_fixed, sp.L, sp.mu};
        Vector x = x0;
        out.records.push_back(probe(0, x));
        for (std::int64_t c = 1; c <= cfg.budget; ++c) {
          x = gradient_step(x, grad, s);
          if (!x.allFinite()) throw DivergedError("gradient iterate is not finite", out.records);
          out.records.push_back(probe(c, x));
        }
        break;
      }
      case MethodKind::nesterov:
      case MethodKind::nesterov_convex: {
        const StepperSpec s{m.kind == MethodKind::nesterov ? StepperKind::nesterov_strong
                                                           : StepperKind::nesterov_convex,
                            sp.L, sp.mu};
        NesterovState st = NesterovState::start(x0);
        out.records.push_back(probe(0, st.x));
        for (std::int64_t c = 1; c <= cfg.budget; ++c) {
          st = nesterov_step(st, grad, s);
          if (!st.x.allFinite()) throw DivergedError("Nesterov iterate is not finite", out.records);
          out.records.push_back(probe(c, st.x));
        }
        break;
      }
      case MethodKind::rmpe:
      case MethodKind::ampe: {
        const StepperSpec s{cfg.rmpe_fixed_step ? StepperKind::gradient_fixed : StepperKind::gradient_short, sp.L,
                            sp.mu};
        AdaptiveConfig ac;
        ac.k = m.k;
        ac.lambda0 = cfg.lambda0;
        ac.lambda_min = cfg.lambda_min;
        if (m.kind == MethodKind::ampe) {
          ac.fixed_lambda = 0.0;
          ac.safeguard = false;
          ac.solve = cfg.ampe_solve;
        }
        auto stepper = [&](const Vector& x) { return gradient_step(x, grad, s); };
        auto f = [&](const Vector& x) { return obj.value(x); };
        AcceleratedRun run = run_accelerated(stepper, x0, f, ac, cfg.budget, probe);
        out.records = std::move(run.trace);
        out.cycles = std::move(run.cycles);
        break;
      }
    }
  } catch (const DivergedError& e) {
    out.diverged = true;
    out.error = e.what();
    if (out.records.empty()) out.records = e.partial;
  }
  return out;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const Objective obj = build_objective(cfg.problem);
  const ReferenceResult ref = reference_optimum(obj, cfg.reference_tol, cfg.reference_budget);
  ExperimentResult res;
  res.problem = obj.name;
  res.rmpe_step = cfg.rmpe_fixed_step ? "2/(L+mu)" : "1/L";
  res.spec = obj.spec;
  res.f_star = ref.f;
  res.x_star = ref.x;
  res.reference_calls = ref.calls;
  for (const auto& m : cfg.methods) res.traces.push_back(run_method(obj, m, cfg, ref));
  return res;
}

namespace detail {
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

inline void write_csv(const ExperimentResult& r, std::ostream& os) {
  os << "# problem=" << r.problem << '\n';
  os << "# rmpe_step=" << r.rmpe_step << '\n';
  os << "# L=" << detail::fmt_double(r.spec.L) << " mu=" << detail::fmt_double(r.spec.mu) << '\n';
  os << "# f_star=" << detail::fmt_double(r.f_star) << " reference_calls=" << r.reference_calls << '\n';
  std::string diverged;
  for (const auto& t : r.traces)
    if (t.diverged) diverged += (diverged.empty() ? "" : ",") + t.method;
  os << "# diverged=" << (diverged.empty() ? "none" : diverged) << '\n';
  os << "method,oracle_calls,f_gap,dist,wall_ns\n";
  for (const auto& t : r.traces)
    for (const auto& rec : t.records)
      os << t.method << ',' << rec.oracle_calls << ',' << detail::fmt_double(rec.f_gap) << ','
         << detail::fmt_double(rec.dist) << ',' << rec.wall_ns << '\n';
}

inline void write_gnuplot(const ExperimentResult& r, const std::string& csv_path, std::ostream& os) {
  os << "set datafile separator ','\n"
     << "set logscale y\n"
     << "set xlabel 'gradient oracle calls'\n"
     << "set ylabel 'f(x) - f(x*)'\n"
     << "set key outside right\n"
     << "plot \\\n";
  for (std::size_t i = 0; i < r.traces.size(); ++i) {
    const std::string& m = r.traces[i].method;
    os << "  '" << csv_path << "' using (strcol(1) eq '" << m << "' ? $2 : 1/0):($3 > 0 ? $3 : 1/0)"
       << " with lines title '" << m << "'" << (i + 1 < r.traces.size() ? ", \\\n" : "\n");
  }
}

}  // namespace rmpe
