#include "pursuitlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "pursuitlab/harness.hpp"
#include "pursuitlab/instance_io.hpp"
#include "pursuitlab/l1_solver.hpp"
#include "pursuitlab/pursuit.hpp"
#include "pursuitlab/results_io.hpp"
#include "pursuitlab/ric_theory.hpp"

namespace pursuitlab::cli {

namespace {

using nlohmann::json;

/// Thrown while turning flags into a plan; reported as a usage error.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

template <typename F>
auto as_usage(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

struct StopFlags {
  int max_iterations{200};
  double residual_tolerance{1e-10};
  bool native{false};

  void attach(CLI::App* sub) {
    sub->add_option("--max-iter", max_iterations, "Iteration cap")->capture_default_str();
    sub->add_option("--tol", residual_tolerance, "Stop when ||r|| < tol*||y||")
        ->capture_default_str();
    sub->add_flag("--native-stop", native, "Also honour each algorithm's own stopping rule");
  }
  StoppingCriteria criteria() const { return {max_iterations, residual_tolerance, native}; }
};

struct RecoverFlags {
  std::string instance;
  std::string algo{"stp"};
  std::optional<double> mu;
  std::optional<Index> s;
  std::string trace;
  StopFlags stop;
};

struct SweepFlags {
  std::string plan_file;
  Index m{100};
  Index n{1000};
  std::string signal{"gaussian"};
  std::string algos{"sp,htp,stp:mu=3"};
  Index smin{1};
  Index smax{30};
  Index step{1};
  int trials{200};
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  unsigned workers{0};
  double success_tol{1e-6};
  bool stop_after_failure{false};
  bool full_sweep{false};
  StopFlags stop;

  void attach(CLI::App* sub) {
    sub->add_option("--plan", plan_file, "Plan JSON file; replaces the sweep flags");
    sub->add_option("--m", m, "Measurements")->capture_default_str();
    sub->add_option("--n", n, "Signal length")->capture_default_str();
    sub->add_option("--signal", signal, "gaussian or cars")->capture_default_str();
    sub->add_option("--algos", algos, "Algorithm list, e.g. \"sp,stp:mu=2.5,l1\"")
        ->capture_default_str();
    sub->add_option("--smin", smin, "Smallest sparsity")->capture_default_str();
    sub->add_option("--smax", smax, "Largest sparsity")->capture_default_str();
    sub->add_option("--step", step, "Sparsity step")->capture_default_str();
    sub->add_option("--trials", trials, "Trials per sparsity")->capture_default_str();
    sub->add_option("--seed", seed, "Master seed (required unless --plan)");
    sub->add_option("--out", out, "Output file");
    sub->add_option("--format", format, "csv or json (default: from --out extension)");
    sub->add_option("--workers", workers, "Worker threads (default: PURSUITLAB_WORKERS or all cores)");
    sub->add_option("--success-tol", success_tol, "Relative error declaring exact recovery")
        ->capture_default_str();
    stop.attach(sub);
  }

  ExperimentPlan plan() const {
    ExperimentPlan p;
    if (!plan_file.empty()) {
      p = load_plan(plan_file);
      if (seed) p.master_seed = *seed;
    } else {
      if (!seed) throw std::invalid_argument("--seed is required");
      p.m = m;
      p.n = n;
      p.signal_kind = signal_kind_from_string(signal);
      p.sweep = make_sweep(smin, smax, step);
      p.trials = trials;
      p.algorithms = parse_algorithm_list(algos);
      p.stop = stop.criteria();
      p.master_seed = *seed;
      p.success_tolerance = success_tol;
    }
    p.stop_after_failure = stop_after_failure && !full_sweep;
    p.validate();
    return p;
  }

  ResultFormat output_format() const {
    if (!format.empty()) return result_format_from_string(format);
    return std::filesystem::path(out).extension() == ".json" ? ResultFormat::json
                                                             : ResultFormat::csv;
  }
};

struct TheoryFlags {
  double mu{1.0};
  std::optional<double> delta;
  std::string grid;
  double grid_min{0.2};
  double grid_max{3.5};
  double grid_step{0.1};
};

struct RicFlags {
  std::string instance;
  Index m{8};
  Index n{12};
  std::optional<std::uint64_t> seed;
  Index order{2};
  bool exhaustive{false};
  std::uint64_t samples{0};
};

struct GenerateFlags {
  Index m{100};
  Index n{1000};
  Index s{10};
  std::string signal{"gaussian"};
  double noise{0.0};
  std::optional<std::uint64_t> seed;
  std::string out;
};

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json ric_json(const RicReport& r) {
  return {{"order", r.order},
          {"delta", r.delta},
          {"argmax_support", r.argmax_support.indices()},
          {"method", std::string(to_string(r.method))},
          {"supports_examined", r.supports_examined}};
}

int run_recover(const RecoverFlags& f, std::ostream& out) {
  AlgorithmSpec spec;
  StoppingCriteria stop;
  as_usage([&] {
    spec = parse_algorithm(f.algo);
    if (f.mu) {
      if (!spec.mu) throw std::invalid_argument("--mu does not apply to " + spec.name());
      spec.mu = *f.mu;
      spec.validate();
    }
    stop = f.stop.criteria();
    return 0;
  });
  const MeasurementInstance inst = load_instance(f.instance);
  Index s = 0;
  if (f.s) {
    s = *f.s;
  } else if (inst.truth) {
    s = inst.truth->sparsity();
  } else if (spec.id != AlgorithmId::l1) {
    throw UsageError("--s is required when the instance carries no ground truth");
  }

  out << json{{"plan",
               {{"command", "recover"},
                {"instance", f.instance},
                {"algorithm", spec.label()},
                {"s", s},
                {"seed", inst.seed},
                {"max_iterations", stop.max_iterations},
                {"residual_tolerance", stop.residual_tolerance}}}}
             .dump()
      << '\n';

  Vector<double> estimate;
  json report;
  if (spec.id == AlgorithmId::l1) {
    const auto res = basis_pursuit<double>(inst.phi, inst.y);
    estimate = res.estimate;
    report = {{"iterations", res.iterations},
              {"converged", res.converged},
              {"duality_gap", res.duality_gap}};
  } else {
    const auto res = run_algorithm(spec, inst, s, stop);
    estimate = res.estimate;
    report = {{"iterations", res.iterations},
              {"converged", res.converged},
              {"stop_reason", std::string(to_string(res.stop_reason))},
              {"support", res.support.indices()}};
    if (!f.trace.empty()) {
      std::ofstream tf(f.trace);
      if (!tf) throw std::runtime_error("cannot open " + f.trace + " for writing");
      write_trace_jsonl(tf, res.trace);
      if (!tf) throw std::runtime_error("failed writing " + f.trace);
    }
  }
  report["residual_norm"] = (inst.y - inst.phi * estimate).norm();
  if (inst.truth) {
    const auto& x = inst.truth->values;
    report["relative_error"] = (estimate - x).norm() / x.norm();
  }
  out << report.dump() << '\n';
  return kSuccess;
}

int run_sweep(const SweepFlags& f, bool critical, std::ostream& out) {
  const ExperimentPlan plan = as_usage([&] { return f.plan(); });
  const ResultFormat format = as_usage([&] { return f.output_format(); });
  json resolved = json::parse(plan_to_json(plan));
  resolved["command"] = critical ? "critical" : "rate";
  resolved["workers"] = resolve_workers(f.workers);
  out << json{{"plan", resolved}}.dump() << '\n' << std::flush;

  HarnessOptions options;
  options.workers = f.workers;
  options.on_point = [&](std::size_t a, const RatePoint& p) {
    out << fmt::format("{} s={} rate={} ({}/{})\n", plan.algorithms[a].label(), p.s, p.rate,
                       p.successes, p.trials)
        << std::flush;
  };
  const auto curves = run_rate_curve(plan, options);

  std::vector<CriticalSparsityReport> reports;
  if (critical) {
    for (const auto& c : curves) {
      reports.push_back(find_critical_sparsity(c));
      const auto& r = reports.back();
      out << json{{"algorithm", r.algorithm.label()},
                  {"critical_s", r.critical_s},
                  {"rule", "last_full_rate"},
                  {"trials", r.trials}}
                 .dump()
          << '\n';
    }
  } else if (f.out.empty()) {
    write_results_csv(out, curves);
  }
  if (!f.out.empty()) export_results(plan, curves, reports, f.out, format);
  return kSuccess;
}

int run_theory(const TheoryFlags& f, std::ostream& out) {
  as_usage([&] {
    if (!(f.mu >= 0.0)) throw std::invalid_argument("--mu must be >= 0");
    if (f.delta && !(*f.delta >= 0.0 && *f.delta < 1.0))
      throw std::invalid_argument("--delta must lie in [0, 1)");
    if (!f.grid.empty() && !(f.grid_step > 0.0 && f.grid_min > 0.0 && f.grid_max >= f.grid_min))
      throw std::invalid_argument("grid needs 0 < --grid-min <= --grid-max and --grid-step > 0");
    return 0;
  });
  json plan{{"command", "theory"}, {"mu", f.mu}};
  if (f.delta) plan["delta3s"] = *f.delta;
  if (!f.grid.empty()) plan["grid"] = {f.grid_min, f.grid_max, f.grid_step};
  out << json{{"plan", plan}}.dump() << '\n';

  json doc{{"mu", f.mu}, {"delta_max", delta_max(f.mu)}};
  if (f.delta) {
    const double d = *f.delta;
    const double r = rho(f.mu, d);
    doc["delta3s"] = d;
    doc["rho"] = r;
    doc["tau"] = r < 1.0 ? number_or_null(tau(f.mu, d)) : json(nullptr);
    if (d > 0.0) {
      const MuRange range = mu_admissible_range(d);
      auto interval = [](const Interval& i) {
        return i.empty() ? json(nullptr) : json{i.lo, i.hi};
      };
      doc["mu_range"] = {{"below_one", interval(range.below_one)},
                         {"above_one", interval(range.above_one)},
                         {"unit_admissible", range.unit_admissible}};
    }
  }
  out << doc.dump() << '\n';

  if (!f.grid.empty()) {
    std::ofstream g(f.grid);
    if (!g) throw std::runtime_error("cannot open " + f.grid + " for writing");
    g << "mu,delta_max\n";
    const int steps = static_cast<int>(std::floor((f.grid_max - f.grid_min) / f.grid_step + 1e-9));
    for (int i = 0; i <= steps; ++i) {
      const double mu = f.grid_min + i * f.grid_step;
      g << fmt::format("{:.6g},{:.9f}\n", mu, delta_max(mu));
    }
    if (!g) throw std::runtime_error("failed writing " + f.grid);
  }
  return kSuccess;
}

int run_ric(const RicFlags& f, std::ostream& out) {
  as_usage([&] {
    if (f.instance.empty() && !f.seed)
      throw std::invalid_argument("give --instance or --seed for a Gaussian matrix");
    if (f.exhaustive && f.samples > 0)
      throw std::invalid_argument("--exhaustive and --samples are exclusive");
    if (f.order < 1) throw std::invalid_argument("--order must be >= 1");
    return 0;
  });
  Matrix<double> phi;
  std::uint64_t seed = 0;
  if (!f.instance.empty()) {
    const auto inst = load_instance(f.instance);
    phi = inst.phi;
    seed = inst.seed;
  } else {
    seed = *f.seed;
    phi = as_usage([&] { return gaussian_matrix(f.m, f.n, RngStream{seed, 0}); });
  }
  out << json{{"plan",
               {{"command", "ric"},
                {"source", f.instance.empty() ? "gaussian" : f.instance},
                {"m", phi.rows()},
                {"n", phi.cols()},
                {"order", f.order},
                {"seed", seed},
                {"method", f.samples > 0 ? "sampled" : "exhaustive"}}}}
             .dump()
      << '\n';
  const RicReport report = as_usage([&] {
    return f.samples > 0 ? sampled_ric(phi, f.order, f.samples, RngStream{seed, 1})
                         : exact_ric(phi, f.order);
  });
  out << ric_json(report).dump() << '\n';
  return kSuccess;
}

int run_generate(const GenerateFlags& f, std::ostream& out) {
  const SignalKind kind = as_usage([&] {
    if (!f.seed) throw std::invalid_argument("--seed is required");
    if (f.out.empty()) throw std::invalid_argument("--out is required");
    if (!(f.noise >= 0.0)) throw std::invalid_argument("--noise must be >= 0");
    return signal_kind_from_string(f.signal);
  });
  out << json{{"plan",
               {{"command", "generate"},
                {"m", f.m},
                {"n", f.n},
                {"s", f.s},
                {"signal", f.signal},
                {"noise", f.noise},
                {"seed", *f.seed},
                {"out", f.out}}}}
             .dump()
      << '\n';
  const auto inst =
      as_usage([&] { return build_instance(f.m, f.n, f.s, kind, f.noise, RngStream{*f.seed, 0}); });
  save_instance(f.out, inst);
  out << json{{"hash", fmt::format("{:016x}", instance_hash(inst))}}.dump() << '\n';
  return kSuccess;
}

}  // namespace

int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse recovery laboratory", "pursuitlab"};
  app.set_help_flag();
  app.set_help_all_flag("-h,--help", "Print help for every subcommand and exit");
  app.require_subcommand(1);

  RecoverFlags rec;
  auto* recover = app.add_subcommand("recover", "Run one recovery on an instance file");
  recover->add_option("--instance", rec.instance, "Instance file")->required();
  recover->add_option("--algo", rec.algo, "Algorithm, e.g. stp or \"fbpv2:nu=20,chi=18\"")
      ->capture_default_str();
  recover->add_option("--mu", rec.mu, "Override the algorithm's mu");
  recover->add_option("--s", rec.s, "Target sparsity (default: from the instance)");
  recover->add_option("--trace", rec.trace, "Write the iteration trace as JSON lines");
  rec.stop.attach(recover);

  SweepFlags rate_flags;
  auto* rate = app.add_subcommand("rate", "Exact-recovery rate over a sparsity sweep");
  rate_flags.attach(rate);
  rate->add_flag("--stop-after-failure", rate_flags.stop_after_failure,
                 "Stop an algorithm's sweep after its first point below rate 1");

  SweepFlags crit_flags;
  crit_flags.stop_after_failure = true;
  auto* critical = app.add_subcommand("critical", "Critical sparsity per algorithm");
  crit_flags.attach(critical);
  critical->add_flag("--full-sweep", crit_flags.full_sweep,
                     "Evaluate every sparsity even after an algorithm first fails");

  TheoryFlags th;
  auto* theory = app.add_subcommand("theory", "Convergence constants and admissible mu");
  theory->add_option("--mu", th.mu, "Step weight")->capture_default_str();
  theory->add_option("--delta", th.delta, "Restricted isometry constant of order 3s");
  theory->add_option("--grid", th.grid, "Write a mu,delta_max CSV to this file");
  theory->add_option("--grid-min", th.grid_min, "Grid start")->capture_default_str();
  theory->add_option("--grid-max", th.grid_max, "Grid end")->capture_default_str();
  theory->add_option("--grid-step", th.grid_step, "Grid step")->capture_default_str();

  RicFlags rf;
  auto* ric = app.add_subcommand("ric", "Restricted isometry constant of a small matrix");
  ric->add_option("--instance", rf.instance, "Instance file supplying the matrix");
  ric->add_option("--m", rf.m, "Rows of a Gaussian matrix (without --instance)")
      ->capture_default_str();
  ric->add_option("--n", rf.n, "Columns of a Gaussian matrix (without --instance)")
      ->capture_default_str();
  ric->add_option("--seed", rf.seed, "Seed of the Gaussian matrix");
  ric->add_option("--order", rf.order, "Order s")->capture_default_str();
  ric->add_flag("--exhaustive", rf.exhaustive, "Enumerate every support (default)");
  ric->add_option("--samples", rf.samples, "Sample this many supports instead");

  GenerateFlags gf;
  auto* generate = app.add_subcommand("generate", "Write a seeded instance file");
  generate->add_option("--m", gf.m, "Measurements")->capture_default_str();
  generate->add_option("--n", gf.n, "Signal length")->capture_default_str();
  generate->add_option("--s", gf.s, "Sparsity")->capture_default_str();
  generate->add_option("--signal", gf.signal, "gaussian or cars")->capture_default_str();
  generate->add_option("--noise", gf.noise, "Noise level ||e||/||Phi x||")->capture_default_str();
  generate->add_option("--seed", gf.seed, "Seed");
  generate->add_option("--out", gf.out, "Output instance file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (*recover) return run_recover(rec, out);
    if (*rate) return run_sweep(rate_flags, false, out);
    if (*critical) return run_sweep(crit_flags, true, out);
    if (*theory) return run_theory(th, out);
    if (*ric) return run_ric(rf, out);
    if (*generate) return run_generate(gf, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}

}  // namespace pursuitlab::cli
