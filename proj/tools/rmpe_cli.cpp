#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rmpe/rmpe.hpp"
#include "rmpe/selftest.hpp"

namespace {

enum Exit { ok = 0, failed = 1, parse_error = 2, numerical = 3, no_reference = 4 };

struct RunArgs {
  std::string data;
  std::vector<long> synth;
  std::vector<double> quadratic;
  double separability = 2.0;
  double tau = 1e-4;
  std::string methods = "gradient,nesterov,rmpe:5,rmpe:10";
  long k = 10;
  long budget = 1000;
  std::optional<double> lambda0, lambda_min;
  std::string out = "-";
  std::uint64_t seed = 0;
  std::string rmpe_step = "short";
  std::string gnuplot;
  bool no_timing = false;
};

struct BoundsArgs {
  double L = 100.0, mu = 10.0, M = 0.1, d0 = 1e-4;
  long kmin = 1, kmax = 30;
  std::string curve = "speedup";
  std::optional<double> lambda;
  std::string out = "-";
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string p;
  while (std::getline(ss, p, sep))
    if (!p.empty()) parts.push_back(p);
  return parts;
}

// Writes through a file or stdout.
template <class F>
void with_output(const std::string& path, F&& fn) {
  if (path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream f(path);
  if (!f) throw rmpe::InvalidConfigError("cannot write '" + path + "'");
  fn(f);
}

int cmd_run(const RunArgs& a) {
  rmpe::ExperimentConfig cfg;
  const int sources = !a.data.empty() + !a.synth.empty() + !a.quadratic.empty();
  if (sources != 1) throw rmpe::InvalidConfigError("give exactly one of --data, --synth, --quadratic");
  if (!a.data.empty()) {
    cfg.problem.data = std::make_shared<const rmpe::Dataset>(rmpe::parse_libsvm(a.data));
  } else if (!a.synth.empty()) {
    if (a.synth.size() < 2 || a.synth.size() > 3 || a.synth[0] < 1 || a.synth[1] < 1)
      throw rmpe::ParseError("--synth expects m,n[,seed] with m, n >= 1", 0);
    const auto seed = a.synth.size() == 3 ? static_cast<std::uint64_t>(a.synth[2]) : a.seed;
    cfg.problem.data =
        std::make_shared<const rmpe::Dataset>(rmpe::synth_dataset(seed, a.synth[0], a.synth[1], a.separability));
  } else {
    if (a.quadratic.size() != 2) throw rmpe::ParseError("--quadratic expects n,cond", 0);
    cfg.problem.kind = rmpe::ProblemConfig::Kind::quadratic;
    cfg.problem.n = static_cast<rmpe::Index>(a.quadratic[0]);
    cfg.problem.cond = a.quadratic[1];
    cfg.problem.seed = a.seed;
  }
  cfg.problem.tau = a.tau;
  for (const auto& m : split(a.methods, ',')) cfg.methods.push_back(rmpe::parse_method(m, a.k));
  cfg.budget = a.budget;
  cfg.seed = a.seed;
  cfg.lambda0 = a.lambda0;
  cfg.lambda_min = a.lambda_min;
  cfg.rmpe_fixed_step = a.rmpe_step == "fixed";
  cfg.timing = !a.no_timing;

  const rmpe::ExperimentResult res = rmpe::run_experiment(cfg);
  with_output(a.out, [&](std::ostream& os) { rmpe::write_csv(res, os); });
  if (!a.gnuplot.empty()) {
    std::ofstream g(a.gnuplot);
    if (!g) throw rmpe::InvalidConfigError("cannot write '" + a.gnuplot + "'");
    rmpe::write_gnuplot(res, a.out == "-" ? "trace.csv" : a.out, g);
  }
  for (const auto& t : res.traces) {
    if (t.diverged) std::cerr << "warning: " << t.method << " diverged: " << t.error << '\n';
    std::fprintf(stderr, "%-16s f_gap %.6e after %lld calls\n", t.method.c_str(), t.records.back().f_gap,
                 static_cast<long long>(t.records.back().oracle_calls));
  }
  return ok;
}

int cmd_bounds(const BoundsArgs& a) {
  const rmpe::ProblemSpec spec{a.L, a.mu, a.M};
  spec.validate();
  if (a.kmin < 1 || a.kmax < a.kmin) throw rmpe::InvalidConfigError("need 1 <= kmin <= kmax");
  std::vector<long> ks;
  for (long k = a.kmin; k <= a.kmax; ++k) ks.push_back(k);
  std::vector<std::pair<long, double>> curve;
  if (a.curve == "speedup") {
    for (const auto& p : rmpe::speedup_curve(spec, a.d0, ks)) curve.emplace_back(p.k, p.speedup);
  } else if (a.curve == "bound") {
    for (long k : ks) {
      const rmpe::GradientModelNorms nm = rmpe::gradient_model_bounds(spec, a.d0, k);
      rmpe::BoundInputs in{spec, a.d0, k, a.lambda.value_or(nm.P_norm), nm.P_norm, nm.E_norm, nm.Eps_norm, nm.U_norm};
      curve.emplace_back(k, rmpe::rmpe_bound(in));
    }
  } else if (a.curve == "chebyshev") {
    for (long k : ks) curve.emplace_back(k, rmpe::cheby_rate(k, spec.sigma()) * a.d0);
  } else {
    throw rmpe::ParseError("unknown curve '" + a.curve + "'", 0);
  }
  with_output(a.out, [&](std::ostream& os) { rmpe::write_curve_csv(os, curve); });
  return ok;
}

int cmd_selftest() {
  int bad = 0;
  rmpe::selftest::run_all([&](const rmpe::selftest::CriterionResult& r) {
    std::cout << rmpe::selftest::format_line(r) << std::endl;
    if (!r.pass) ++bad;
  });
  std::cout << 11 - bad << "/11 criteria passed\n";
  return bad ? failed : ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized minimal polynomial extrapolation: experiments, bounds and self-checks"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Run optimizer arms on one problem and write a convergence CSV");
  run->add_option("--data", ra.data, "libsvm file");
  run->add_option("--synth", ra.synth, "synthetic logistic data m,n[,seed]")->delimiter(',')->expected(2, 3);
  run->add_option("--quadratic", ra.quadratic, "synthetic quadratic n,cond")->delimiter(',')->expected(2);
  run->add_option("--separability", ra.separability, "label separability of --synth data")->capture_default_str();
  run->add_option("--tau", ra.tau, "l2 penalty")->capture_default_str();
  run->add_option("--methods", ra.methods, "comma list of gradient, nesterov, nesterov_convex, rmpe[:k], ampe[:k]")
      ->capture_default_str();
  run->add_option("--k", ra.k, "default window order")->capture_default_str();
  run->add_option("--budget", ra.budget, "gradient oracle calls per method")->capture_default_str();
  run->add_option("--lambda0", ra.lambda0, "first lambda of the search");
  run->add_option("--lambda-min", ra.lambda_min, "smallest lambda of the search");
  run->add_option("--out", ra.out, "CSV path, - for stdout")->capture_default_str();
  run->add_option("--seed", ra.seed, "seed for synthetic problems")->capture_default_str();
  run->add_option("--rmpe-step", ra.rmpe_step, "base step of the extrapolated arms: short (1/L) or fixed (2/(L+mu))")
      ->check(CLI::IsMember({"short", "fixed"}))
      ->capture_default_str();
  run->add_option("--gnuplot", ra.gnuplot, "also write a gnuplot script here");
  run->add_flag("--no-timing", ra.no_timing, "write wall_ns = 0 for reproducible output");

  BoundsArgs ba;
  auto* bounds = app.add_subcommand("bounds", "Evaluate bound and speedup curves for the gradient model");
  bounds->add_option("--L", ba.L, "smoothness")->capture_default_str();
  bounds->add_option("--mu", ba.mu, "strong convexity")->capture_default_str();
  bounds->add_option("--M", ba.M, "Hessian Lipschitz constant")->capture_default_str();
  bounds->add_option("--d0", ba.d0, "initial distance")->capture_default_str();
  bounds->add_option("--kmin", ba.kmin)->capture_default_str();
  bounds->add_option("--kmax", ba.kmax)->capture_default_str();
  bounds->add_option("--curve", ba.curve, "speedup, bound or chebyshev")
      ->check(CLI::IsMember({"speedup", "bound", "chebyshev"}))
      ->capture_default_str();
  bounds->add_option("--lambda", ba.lambda, "regularization for --curve bound (default ||P||)");
  bounds->add_option("--out", ba.out, "CSV path, - for stdout")->capture_default_str();

  auto* self = app.add_subcommand("selftest", "Run the property and reproduction checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : parse_error;
  }

  try {
    if (run->parsed()) return cmd_run(ra);
    if (bounds->parsed()) return cmd_bounds(ba);
    if (self->parsed()) return cmd_selftest();
  } catch (const rmpe::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return parse_error;
  } catch (const rmpe::InvalidConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return parse_error;
  } catch (const rmpe::ReferenceNotConvergedError& e) {
    std::cerr << "reference optimum not reached: " << e.what() << '\n';
    return no_reference;
  } catch (const rmpe::Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return numerical;
  }
  return ok;
}
