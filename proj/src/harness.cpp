#include "pursuitlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "pursuitlab/pursuit.hpp"

namespace pursuitlab {

namespace {

std::uint64_t fnv(const Vector<double>& v, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
  for (std::size_t i = 0; i < static_cast<std::size_t>(v.size()) * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void ExperimentPlan::validate() const {
  if (m < 1 || n < 1) throw std::invalid_argument("m and n must be positive");
  if (m >= n) throw std::invalid_argument("need m < n, got m=" + std::to_string(m) +
                                          " n=" + std::to_string(n));
  if (sweep.empty()) throw std::invalid_argument("sparsity sweep is empty");
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    if (sweep[i] < 1) throw std::invalid_argument("sparsity values must be >= 1");
    if (i > 0 && sweep[i] <= sweep[i - 1])
      throw std::invalid_argument("sparsity sweep must be strictly increasing");
  }
  if (sweep.back() >= m)
    throw std::invalid_argument("max sparsity " + std::to_string(sweep.back()) +
                                " must be smaller than m=" + std::to_string(m));
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (algorithms.empty()) throw std::invalid_argument("no algorithms given");
  for (const auto& a : algorithms) a.validate();
  if (signal_kind == SignalKind::custom)
    throw std::invalid_argument("signal kind must be gaussian or cars");
  if (!(success_tolerance > 0.0)) throw std::invalid_argument("success tolerance must be > 0");
  if (stop.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(stop.residual_tolerance >= 0.0))
    throw std::invalid_argument("residual tolerance must be >= 0");
}

std::vector<Index> make_sweep(Index smin, Index smax, Index step) {
  if (step < 1) throw std::invalid_argument("sweep step must be >= 1");
  if (smin < 1) throw std::invalid_argument("smin must be >= 1");
  if (smax < smin) throw std::invalid_argument("smax must be >= smin");
  std::vector<Index> out;
  for (Index s = smin; s <= smax; s += step) out.push_back(s);
  return out;
}

RngStream trial_stream(std::uint64_t master_seed, Index s, int trial) {
  return {master_seed, (static_cast<std::uint64_t>(s) << 32) | static_cast<std::uint32_t>(trial)};
}

MeasurementInstance trial_instance(const ExperimentPlan& plan, Index s, int trial) {
  return build_instance(plan.m, plan.n, s, plan.signal_kind, 0.0,
                        trial_stream(plan.master_seed, s, trial));
}

TrialOutcome run_trial(const AlgorithmSpec& spec, const MeasurementInstance& inst, Index s,
                       const StoppingCriteria& stop, const L1Config& l1, double tolerance) {
  TrialOutcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    Vector<double> estimate;
    if (spec.id == AlgorithmId::l1) {
      auto res = basis_pursuit<double>(inst.phi, inst.y, l1);
      out.iterations = res.iterations;
      out.orthogonality = res.max_orthogonality;
      estimate = std::move(res.estimate);
    } else {
      auto res = run_algorithm(spec, inst, s, stop);
      out.iterations = res.iterations;
      out.orthogonality = res.max_orthogonality;
      estimate = std::move(res.estimate);
    }
    out.digest = fnv(estimate);
    if (!inst.truth) throw std::invalid_argument("instance has no ground truth");
    const Vector<double>& x = inst.truth->values;
    out.success = (estimate - x).norm() <= tolerance * x.norm();
  } catch (const std::exception& e) {
    out.success = false;
    out.error = e.what();
  }
  out.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PURSUITLAB_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<RateCurve> run_rate_curve(const ExperimentPlan& plan, const HarnessOptions& options) {
  plan.validate();
  const std::size_t n_algos = plan.algorithms.size();
  const unsigned workers =
      std::min<unsigned>(resolve_workers(options.workers), static_cast<unsigned>(plan.trials));

  std::vector<RateCurve> curves(n_algos);
  for (std::size_t a = 0; a < n_algos; ++a) curves[a].algorithm = plan.algorithms[a];
  std::vector<bool> active(n_algos, true);

  // outcomes[t][a] for the current sparsity.
  std::vector<std::vector<TrialOutcome>> outcomes(static_cast<std::size_t>(plan.trials));

  for (Index s : plan.sweep) {
    if (std::none_of(active.begin(), active.end(), [](bool b) { return b; })) break;

    std::atomic<int> next{0};
    auto work = [&] {
      for (int t = next++; t < plan.trials; t = next++) {
        auto& row = outcomes[static_cast<std::size_t>(t)];
        row.assign(n_algos, {});
        MeasurementInstance inst;
        try {
          inst = trial_instance(plan, s, t);
        } catch (const std::exception& e) {
          for (auto& o : row) o.error = e.what();
          continue;
        }
        for (std::size_t a = 0; a < n_algos; ++a)
          if (active[a])
            row[a] = run_trial(plan.algorithms[a], inst, s, plan.stop, plan.l1,
                               plan.success_tolerance);
      }
    };
    if (workers <= 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
      for (auto& th : pool) th.join();
    }

    for (std::size_t a = 0; a < n_algos; ++a) {
      if (!active[a]) continue;
      RatePoint p;
      p.s = s;
      p.trials = plan.trials;
      double iters = 0.0;
      double wall = 0.0;
      std::uint64_t digest = 0xcbf29ce484222325ULL;
      for (const auto& row : outcomes) {
        const TrialOutcome& o = row[a];
        p.successes += o.success ? 1 : 0;
        iters += o.iterations;
        wall += o.wall_ms;
        p.max_orthogonality = std::max(p.max_orthogonality, o.orthogonality);
        if (!o.error.empty() && p.errors++ == 0) p.first_error = o.error;
        digest = (digest ^ o.digest) * 0x100000001b3ULL;
      }
      p.rate = static_cast<double>(p.successes) / plan.trials;
      p.mean_iterations = iters / plan.trials;
      p.mean_wall_ms = wall / plan.trials;
      p.digest = digest;
      curves[a].points.push_back(p);
      if (options.on_point) options.on_point(a, curves[a].points.back());
      if (plan.stop_after_failure && p.successes < p.trials) active[a] = false;
    }
  }
  return curves;
}

CriticalSparsityReport find_critical_sparsity(const RateCurve& curve) {
  CriticalSparsityReport report;
  report.algorithm = curve.algorithm;
  if (!curve.points.empty()) report.trials = curve.points.front().trials;
  for (const auto& p : curve.points) {
    if (p.successes != p.trials || p.trials == 0) break;
    report.critical_s = p.s;
  }
  return report;
}

}  // namespace pursuitlab
