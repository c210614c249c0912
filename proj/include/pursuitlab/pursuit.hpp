#pragma once

// Greedy sparse-recovery algorithms. Everything here is a pure function of
// its arguments and templated on the scalar type of the dictionary.
//
// OMP-like identification: top entries of Φ*(y − Φx).
// IHT-like identification: top entries of u + μΦ*(y − Φu).
// STP runs both per iteration: merge, least squares, prune to s, then an
// IHT-like step from the pruned estimate, then a final least squares.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "pursuitlab/algorithm_spec.hpp"
#include "pursuitlab/linalg.hpp"
#include "pursuitlab/problem_gen.hpp"

namespace pursuitlab {

/// Top-k of u + μ·Φ*(y − Φu).
template <typename Scalar>
IndexSet iht_identify(const Vector<Scalar>& u, Scalar mu, const Matrix<Scalar>& phi,
                      const Vector<Scalar>& y, Index k) {
  if (u.size() != phi.cols() || y.size() != phi.rows())
    throw std::invalid_argument("iht_identify: dimension mismatch");
  const Vector<Scalar> proxy = u + mu * correlate<Scalar>(phi, y - phi * u);
  return top_k_indices(proxy, k);
}

template <typename Scalar>
struct StpState {
  Vector<Scalar> x_prev;
  IndexSet s_prev;
  int iteration{0};

  /// x⁰ = 0, S⁰ = ∅.
  static StpState initial(Index n) { return {Vector<Scalar>::Zero(n), {}, 0}; }
};

/// Every intermediate of one STP iteration.
template <typename Scalar>
struct StpStepDetail {
  IndexSet identified;                   ///< ΔS
  IndexSet merged;                       ///< S̃ⁿ = Sⁿ⁻¹ ∪ ΔS
  RestrictedLsSolution<Scalar> merged_fit;  ///< x̃ⁿ
  IndexSet pruned;                       ///< Uⁿ
  Vector<Scalar> pruned_estimate;        ///< uⁿ
  IndexSet support;                      ///< Sⁿ
  RestrictedLsSolution<Scalar> fit;      ///< xⁿ
};

namespace detail {

/// Identification width capped so that the merged set stays solvable.
inline Index merge_width(Index wanted, Index prior, Index m, Index n) {
  return std::max<Index>(0, std::min({wanted, m - prior, n}));
}

template <typename Scalar>
IndexSet identify(const Vector<Scalar>& correlation, Index k) {
  return k > 0 ? top_k_indices(correlation, k) : IndexSet{};
}

}  // namespace detail

/// One STP iteration (steps 1–7) from `state`, with ΔS of size k_identify.
template <typename Scalar>
StpStepDetail<Scalar> stp_step(const Matrix<Scalar>& phi, const Vector<Scalar>& y,
                               const StpState<Scalar>& state, Scalar mu, Index s,
                               Index k_identify) {
  const Index m = phi.rows();
  const Index n = phi.cols();
  if (k_identify < 1) throw std::invalid_argument("stp_step: k_identify must be >= 1");
  if (s < 1 || s > m) throw std::invalid_argument("stp_step: need 1 <= s <= m");
  if (state.s_prev.size() > s) throw std::invalid_argument("stp_step: |S^{n-1}| exceeds s");

  StpStepDetail<Scalar> d;
  const Vector<Scalar> residual = y - phi * state.x_prev;
  d.identified = detail::identify<Scalar>(
      correlate<Scalar>(phi, residual),
      detail::merge_width(k_identify, state.s_prev.size(), m, n));
  d.merged = set_union(state.s_prev, d.identified);
  d.merged_fit = restricted_least_squares<Scalar>(phi, y, d.merged);
  d.pruned = top_k_indices(d.merged_fit.estimate, s);
  d.pruned_estimate = restrict_to(d.merged_fit.estimate, d.pruned);
  d.support = iht_identify<Scalar>(d.pruned_estimate, mu, phi, y, s);
  d.fit = restricted_least_squares<Scalar>(phi, y, d.support);
  return d;
}

/// ΔS width for STPv2: s when s ≤ γm, else ⌈2γm⌉ − s.
inline Index stpv2_effective_width(Index s, double gamma, Index m) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  if (s < 1 || m < 1) throw std::invalid_argument("stpv2_effective_width: s and m must be positive");
  const double limit = gamma * static_cast<double>(m);
  if (static_cast<double>(s) <= limit) return s;
  const Index width = static_cast<Index>(std::ceil(2.0 * limit)) - s;
  if (width < 1)
    throw std::invalid_argument("stpv2_effective_width: s=" + std::to_string(s) +
                                " leaves no identification width (ceil(2*gamma*m)=" +
                                std::to_string(width + s) + ")");
  return width;
}

namespace detail {

template <typename Scalar>
struct Iterate {
  Vector<Scalar> x;
  IndexSet support;
  Vector<Scalar> residual;
  Scalar residual_norm{0};
};

template <typename Scalar>
struct StepOutcome {
  Iterate<Scalar> next;
  bool native{false};    ///< algorithm's own rule fired (honoured only when enabled)
  bool finished{false};  ///< algorithm cannot or need not continue (OMP after s steps)
};

template <typename Scalar>
class Runner {
 public:
  Runner(const AlgorithmSpec& spec, const Matrix<Scalar>& phi, const Vector<Scalar>& y,
         Index s, const StoppingCriteria& stop)
      : spec_(spec), phi_(phi), y_(y), s_(s), stop_(stop), y_norm_(y.norm()),
        m_(phi.rows()), n_(phi.cols()), stage_(spec.nu0_value()) {
    if (spec.id == AlgorithmId::stpv2) {
      if (spec.gamma_value() * static_cast<double>(m_) < 1.0)
        throw std::invalid_argument("stpv2: gamma*m must be >= 1");
      k_identify_ = stpv2_effective_width(s, spec.gamma_value(), m_);
    } else {
      k_identify_ = s;
    }
  }

  BasicRecoveryResult<Scalar> run() {
    BasicRecoveryResult<Scalar> result;
    Iterate<Scalar> cur{Vector<Scalar>::Zero(n_), {}, y_, y_norm_};
    if (y_norm_ == Scalar(0)) {
      result.estimate = cur.x;
      result.converged = true;
      result.stop_reason = StopReason::residual;
      return result;
    }
    for (int iter = 1;; ++iter) {
      iteration_rank_deficient_ = false;
      StepOutcome<Scalar> out = step(cur);
      cur = std::move(out.next);
      result.residual_history.push_back(cur.residual_norm);
      result.trace.push_back({iter, cur.support, static_cast<double>(cur.residual_norm),
                              iteration_rank_deficient_});
      result.iterations = iter;
      if (cur.residual_norm < Scalar(stop_.residual_tolerance) * y_norm_) {
        result.stop_reason = StopReason::residual;
        break;
      }
      if (stop_.native_rule_enabled && out.native) {
        result.stop_reason = StopReason::native_rule;
        break;
      }
      if (out.finished) {
        result.stop_reason = StopReason::native_rule;
        break;
      }
      if (stopping_met(static_cast<double>(cur.residual_norm), static_cast<double>(y_norm_),
                       iter, stop_, out.native)) {
        result.stop_reason = StopReason::max_iterations;
        break;
      }
    }
    result.estimate = std::move(cur.x);
    result.support = std::move(cur.support);
    result.converged = result.stop_reason == StopReason::residual;
    result.max_orthogonality = max_orthogonality_;
    result.any_rank_deficient = any_rank_deficient_;
    return result;
  }

 private:
  RestrictedLsSolution<Scalar> fit(const IndexSet& support) {
    auto sol = restricted_least_squares<Scalar>(phi_, y_, support);
    note(sol, support);
    return sol;
  }

  Iterate<Scalar> from_fit(RestrictedLsSolution<Scalar> sol, IndexSet support) const {
    return {std::move(sol.estimate), std::move(support), std::move(sol.residual),
            sol.residual_norm};
  }

  Iterate<Scalar> from_vector(Vector<Scalar> x, IndexSet support) const {
    Vector<Scalar> r = y_ - phi_ * x;
    const Scalar norm = r.norm();
    return {std::move(x), std::move(support), std::move(r), norm};
  }

  Vector<Scalar> gradient(const Iterate<Scalar>& it) const {
    return correlate<Scalar>(phi_, it.residual);
  }

  /// u + μΦ*(y − Φu), thresholded to its k largest entries.
  std::pair<IndexSet, Vector<Scalar>> iht_threshold(const Vector<Scalar>& u, Scalar mu,
                                                    Index k) const {
    const Vector<Scalar> proxy = u + mu * correlate<Scalar>(phi_, y_ - phi_ * u);
    return hard_threshold(proxy, k);
  }

  StepOutcome<Scalar> step(const Iterate<Scalar>& cur) {
    switch (spec_.id) {
      case AlgorithmId::omp: return step_omp(cur);
      case AlgorithmId::sp: return step_sp(cur);
      case AlgorithmId::iht: return step_iht(cur);
      case AlgorithmId::niht: return step_niht(cur);
      case AlgorithmId::htp: return step_htp(cur);
      case AlgorithmId::stp:
      case AlgorithmId::stpv2: return step_stp(cur);
      case AlgorithmId::cosamp:
      case AlgorithmId::cosampv2: return step_cosamp(cur);
      case AlgorithmId::htpv2: return step_htpv2(cur);
      case AlgorithmId::sampv2: return step_samp(cur);
      case AlgorithmId::fbpv2: return step_fbp(cur);
      case AlgorithmId::l1: break;
    }
    throw std::invalid_argument("run_algorithm: l1 is not a greedy algorithm");
  }

  StepOutcome<Scalar> step_omp(const Iterate<Scalar>& cur) {
    Vector<Scalar> g = gradient(cur);
    for (Index i : cur.support) g(i) = Scalar(0);
    const IndexSet support = set_union(cur.support, top_k_indices(g, 1));
    StepOutcome<Scalar> out{from_fit(fit(support), support)};
    out.finished = out.next.support.size() >= s_;
    return out;
  }

  StepOutcome<Scalar> step_sp(const Iterate<Scalar>& cur) {
    const IndexSet delta = detail::identify<Scalar>(
        gradient(cur), merge_width(s_, cur.support.size(), m_, n_));
    const IndexSet merged = set_union(cur.support, delta);
    const auto merged_fit = fit(merged);
    const IndexSet support = top_k_indices(merged_fit.estimate, s_);
    StepOutcome<Scalar> out{from_fit(fit(support), support)};
    out.native = out.next.residual_norm >= cur.residual_norm;
    // The original rule keeps the previous estimate when the residual grows.
    if (out.native && stop_.native_rule_enabled) out.next = cur;
    return out;
  }

  StepOutcome<Scalar> step_iht(const Iterate<Scalar>& cur) {
    auto [support, x] = hard_threshold(Vector<Scalar>(cur.x + gradient(cur)), s_);
    return {from_vector(std::move(x), std::move(support))};
  }

  StepOutcome<Scalar> step_niht(const Iterate<Scalar>& cur) {
    const Vector<Scalar> g = gradient(cur);
    const IndexSet active = cur.support.empty() ? top_k_indices(g, s_) : cur.support;
    const Vector<Scalar> g_active = restrict_to(g, active);
    const Scalar denom = (phi_ * g_active).squaredNorm();
    const Scalar step = denom > Scalar(0) ? g_active.squaredNorm() / denom : Scalar(1);
    auto [support, x] = hard_threshold(Vector<Scalar>(cur.x + step * g), s_);
    return {from_vector(std::move(x), std::move(support))};
  }

  StepOutcome<Scalar> step_htp(const Iterate<Scalar>& cur) {
    const IndexSet support = top_k_indices(Vector<Scalar>(cur.x + gradient(cur)), s_);
    StepOutcome<Scalar> out{from_fit(fit(support), support)};
    out.native = support == cur.support;
    return out;
  }

  StepOutcome<Scalar> step_stp(const Iterate<Scalar>& cur) {
    const StpState<Scalar> state{cur.x, cur.support, 0};
    auto d = stp_step<Scalar>(phi_, y_, state, Scalar(spec_.mu_value()), s_, k_identify_);
    note(d.merged_fit, d.merged);
    note(d.fit, d.support);
    return {from_fit(std::move(d.fit), std::move(d.support))};
  }

  StepOutcome<Scalar> step_cosamp(const Iterate<Scalar>& cur) {
    const Index wanted = static_cast<Index>(spec_.alpha_value()) * s_;
    const IndexSet delta =
        detail::identify<Scalar>(gradient(cur), merge_width(wanted, cur.support.size(), m_, n_));
    const IndexSet merged = set_union(cur.support, delta);
    const auto merged_fit = fit(merged);
    auto [pruned, u] = hard_threshold(merged_fit.estimate, s_);
    const bool iht = spec_.id == AlgorithmId::cosampv2 && spec_.iht_enabled();
    if (!iht) return {from_vector(std::move(u), std::move(pruned))};
    auto [support, x] = iht_threshold(u, Scalar(spec_.mu_value()), s_);
    return {from_vector(std::move(x), std::move(support))};
  }

  StepOutcome<Scalar> step_htpv2(const Iterate<Scalar>& cur) {
    const Index width = std::min<Index>((spec_.alpha_value() + 1) * s_, std::min(m_, n_));
    const Vector<Scalar> proxy = cur.x + Scalar(spec_.mu_prime_value()) * gradient(cur);
    const IndexSet merged = top_k_indices(proxy, width);
    const auto merged_fit = fit(merged);
    const IndexSet pruned = top_k_indices(merged_fit.estimate, s_);
    const Vector<Scalar> u = restrict_to(merged_fit.estimate, pruned);
    const IndexSet support = iht_identify<Scalar>(u, Scalar(spec_.mu_value()), phi_, y_, s_);
    return {from_fit(fit(support), support)};
  }

  StepOutcome<Scalar> step_samp(const Iterate<Scalar>& cur) {
    const Index stage = stage_;
    const IndexSet delta =
        detail::identify<Scalar>(gradient(cur), merge_width(stage, cur.support.size(), m_, n_));
    const IndexSet merged = set_union(cur.support, delta);
    const auto merged_fit = fit(merged);
    const Index keep = std::min(stage, merged.size());
    const IndexSet pruned = top_k_indices(merged_fit.estimate, keep);
    const IndexSet candidate =
        spec_.iht_enabled()
            ? iht_identify<Scalar>(restrict_to(merged_fit.estimate, pruned),
                                   Scalar(spec_.mu_value()), phi_, y_, keep)
            : pruned;
    auto candidate_fit = fit(candidate);

    StepOutcome<Scalar> out;
    if (candidate_fit.residual_norm < cur.residual_norm) {
      out.next = from_fit(std::move(candidate_fit), candidate);
    } else {
      out.next = cur;
      stage_ += spec_.nu0_value();
      // Stop growing once the candidate support could no longer be
      // overdetermined by a factor of two.
      out.finished = 2 * stage_ > m_;
    }
    return out;
  }

  StepOutcome<Scalar> step_fbp(const Iterate<Scalar>& cur) {
    const IndexSet delta = detail::identify<Scalar>(
        gradient(cur), merge_width(spec_.nu_value(), cur.support.size(), m_, n_));
    const IndexSet merged = set_union(cur.support, delta);
    const auto merged_fit = fit(merged);
    const Index keep =
        std::clamp<Index>(merged.size() - spec_.chi_value(), 1, std::max<Index>(1, m_ - 1));
    const IndexSet pruned = top_k_indices(merged_fit.estimate, keep);
    const IndexSet support =
        spec_.iht_enabled()
            ? iht_identify<Scalar>(restrict_to(merged_fit.estimate, pruned),
                                   Scalar(spec_.mu_value()), phi_, y_, keep)
            : pruned;
    return {from_fit(fit(support), support)};
  }

  void note(const RestrictedLsSolution<Scalar>& sol, const IndexSet& support) {
    max_orthogonality_ = std::max(
        max_orthogonality_, residual_orthogonality<Scalar>(phi_, sol.residual, support, y_norm_));
    iteration_rank_deficient_ = iteration_rank_deficient_ || sol.rank_deficient;
    any_rank_deficient_ = any_rank_deficient_ || sol.rank_deficient;
  }

  const AlgorithmSpec& spec_;
  const Matrix<Scalar>& phi_;
  const Vector<Scalar>& y_;
  Index s_;
  StoppingCriteria stop_;
  Scalar y_norm_;
  Index m_;
  Index n_;
  Index k_identify_{1};
  Index stage_;
  Scalar max_orthogonality_{0};
  bool any_rank_deficient_{false};
  bool iteration_rank_deficient_{false};
};

}  // namespace detail

/// Runs `spec` on (Φ, y) with target sparsity s until `stop` fires.
/// SAMPv2 and FBPv2 adapt their support size and ignore s.
template <typename Scalar>
BasicRecoveryResult<Scalar> recover(const AlgorithmSpec& spec, const Matrix<Scalar>& phi,
                                    const Vector<Scalar>& y, Index s,
                                    const StoppingCriteria& stop) {
  spec.validate();
  if (spec.id == AlgorithmId::l1)
    throw std::invalid_argument("run_algorithm: l1 is handled by basis_pursuit");
  if (phi.rows() != y.size())
    throw std::invalid_argument("run_algorithm: y has length " + std::to_string(y.size()) +
                                ", expected " + std::to_string(phi.rows()));
  if (s < 1 || s > phi.rows() || s > phi.cols())
    throw std::invalid_argument("run_algorithm: need 1 <= s <= min(m, n), got s=" +
                                std::to_string(s));
  if (stop.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(stop.residual_tolerance >= 0.0))
    throw std::invalid_argument("residual_tolerance must be >= 0");
  return detail::Runner<Scalar>(spec, phi, y, s, stop).run();
}

inline RecoveryResult run_algorithm(const AlgorithmSpec& spec, const MeasurementInstance& inst,
                                    Index s, const StoppingCriteria& stop) {
  return recover<double>(spec, inst.phi, inst.y, s, stop);
}

/// Advances an STP (or STPv2, via k_identify) state by one iteration.
inline StpState<double> stp_iterate(const StpState<double>& state, const AlgorithmSpec& spec,
                                    const MeasurementInstance& inst, Index s,
                                    Index k_identify) {
  auto d = stp_step<double>(inst.phi, inst.y, state, spec.mu_value(), s, k_identify);
  return {std::move(d.fit.estimate), std::move(d.support), state.iteration + 1};
}

}  // namespace pursuitlab
