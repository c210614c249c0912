#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pursuitlab/algorithm_spec.hpp"
#include "pursuitlab/l1_solver.hpp"
#include "pursuitlab/problem_gen.hpp"

namespace pursuitlab {

struct ExperimentPlan {
  Index m{100};
  Index n{1000};
  SignalKind signal_kind{SignalKind::gaussian};
  std::vector<Index> sweep;
  int trials{200};
  std::vector<AlgorithmSpec> algorithms;
  StoppingCriteria stop;
  std::uint64_t master_seed{0};
  double success_tolerance{1e-6};
  /// Skip the remaining sparsities of an algorithm once one point has
  /// rate < 1. The critical sparsity is unaffected; later rates are not computed.
  bool stop_after_failure{false};
  L1Config l1;

  /// Throws std::invalid_argument naming the violated constraint.
  void validate() const;
};

/// smin, smin+step, …, ≤ smax.
std::vector<Index> make_sweep(Index smin, Index smax, Index step);

/// The instance fed to every algorithm at sparsity s, trial t.
RngStream trial_stream(std::uint64_t master_seed, Index s, int trial);
MeasurementInstance trial_instance(const ExperimentPlan& plan, Index s, int trial);

struct RatePoint {
  Index s{0};
  int successes{0};
  int trials{0};
  double rate{0.0};
  double mean_iterations{0.0};
  double mean_wall_ms{0.0};
  int errors{0};               ///< trials that threw; counted as failures
  std::string first_error;
  double max_orthogonality{0.0};  ///< worst over every LS solve at this point
  std::uint64_t digest{0};     ///< hash of every estimate, in trial order
};

struct RateCurve {
  AlgorithmSpec algorithm;
  std::vector<RatePoint> points;
};

enum class CriticalRule { last_full_rate };

struct CriticalSparsityReport {
  AlgorithmSpec algorithm;
  Index critical_s{0};
  CriticalRule rule{CriticalRule::last_full_rate};
  int trials{0};
};

struct TrialOutcome {
  bool success{false};
  int iterations{0};
  double wall_ms{0.0};
  double orthogonality{0.0};
  std::uint64_t digest{0};
  std::string error;
};

/// Runs one algorithm (greedy or l1) on one instance and scores it.
TrialOutcome run_trial(const AlgorithmSpec& spec, const MeasurementInstance& inst, Index s,
                       const StoppingCriteria& stop, const L1Config& l1, double tolerance);

struct HarnessOptions {
  unsigned workers{0};  ///< 0: PURSUITLAB_WORKERS, else hardware concurrency
  /// Called after each sweep point with (algorithm index, point).
  std::function<void(std::size_t, const RatePoint&)> on_point;
};

/// Worker count from an explicit request, PURSUITLAB_WORKERS, or the hardware.
unsigned resolve_workers(unsigned requested);

std::vector<RateCurve> run_rate_curve(const ExperimentPlan& plan, const HarnessOptions& options = {});

/// Largest swept s such that every swept s′ ≤ s has rate 1.
CriticalSparsityReport find_critical_sparsity(const RateCurve& curve);

}  // namespace pursuitlab
