#pragma once

// Convergence constants for STP, admissible step weights, the iteration
// bound, exact restricted isometry constants on small matrices and numerical
// checks of the supporting inequalities.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Eigenvalues>

#include "pursuitlab/linalg.hpp"
#include "pursuitlab/problem_gen.hpp"
#include "pursuitlab/pursuit.hpp"
#include "pursuitlab/rng.hpp"

namespace pursuitlab {

/// ρ(μ, δ) = 2δ(|μ−1|+μδ)√(1+2δ²)/(1−δ²).
double rho(double mu, double delta3s);

/// (1−ρ)τ, the noise term before division.
double tau_numerator(double mu, double delta3s);

/// τ = tau_numerator/(1−ρ). Throws when ρ ≥ 1.
double tau(double mu, double delta3s);

struct Interval {
  double lo{0.0};
  double hi{0.0};
  bool empty() const { return !(lo < hi); }
  /// Open interval membership.
  bool contains(double v) const { return lo < v && v < hi; }
};

struct MuRange {
  Interval below_one;  ///< (max(0, lower), 1)
  Interval above_one;  ///< (1, upper)
  bool unit_admissible{false};
  double lower_raw{0.0};
  double upper_raw{0.0};
};

/// Values of μ with ρ(μ, δ) < 1, split around μ = 1.
MuRange mu_admissible_range(double delta3s);

/// Largest δ with ρ(μ, δ) < 1, by bisection on [0, 1−1e-9].
double delta_max(double mu);

struct IterationBound {
  long long raw{0};    ///< min of the two ceilings, may be 0
  long long bound{1};  ///< raw floored at 1
  long long magnitude_term{0};
  long long sparsity_term{0};
};

IterationBound iteration_bound(const SparseSignal& x, double rho_value);
IterationBound iteration_bound(double norm_over_xi, Index s, double rho_value);

// Exact restricted isometry constants.

enum class RicMethod { exhaustive, sampled };
std::string_view to_string(RicMethod method);

struct RicReport {
  Index order{0};
  double delta{0.0};
  IndexSet argmax_support;
  RicMethod method{RicMethod::exhaustive};
  std::uint64_t supports_examined{0};
};

inline constexpr std::uint64_t kRicEnumerationCap = 1'000'000;

/// C(n, k), saturating at uint64 max.
std::uint64_t binomial(Index n, Index k);

namespace detail {

template <typename Scalar>
double support_deviation(const Matrix<Scalar>& gram, const std::vector<Index>& support) {
  const Matrix<Scalar> sub = gram(support, support);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(sub, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  const double hi = static_cast<double>(ev(ev.size() - 1)) - 1.0;
  const double lo = 1.0 - static_cast<double>(ev(0));
  return std::max(hi, lo);
}

inline void validate_order(Index m, Index n, Index s) {
  if (s < 1) throw std::invalid_argument("exact_ric: order must be >= 1");
  if (s > m || s > n)
    throw std::invalid_argument("exact_ric: order " + std::to_string(s) + " exceeds min(m, n)");
}

}  // namespace detail

/// δ_s by enumerating every size-s support. Throws when C(n, s) > cap.
template <typename Scalar>
RicReport exact_ric(const Matrix<Scalar>& phi, Index s,
                    std::uint64_t cap = kRicEnumerationCap) {
  const Index n = phi.cols();
  detail::validate_order(phi.rows(), n, s);
  const std::uint64_t count = binomial(n, s);
  if (count > cap)
    throw std::invalid_argument("exact_ric: C(" + std::to_string(n) + "," + std::to_string(s) +
                                ") supports exceed the enumeration cap of " +
                                std::to_string(cap) + "; use sampled mode");
  const Matrix<Scalar> gram = phi.transpose() * phi;
  RicReport report;
  report.order = s;
  report.method = RicMethod::exhaustive;
  report.delta = -std::numeric_limits<double>::infinity();

  std::vector<Index> support(static_cast<std::size_t>(s));
  for (Index i = 0; i < s; ++i) support[i] = i;
  for (;;) {
    const double dev = detail::support_deviation(gram, support);
    ++report.supports_examined;
    if (dev > report.delta) {
      report.delta = dev;
      report.argmax_support = IndexSet(support);
    }
    Index i = s - 1;
    while (i >= 0 && support[i] == n - s + i) --i;
    if (i < 0) break;
    ++support[i];
    for (Index j = i + 1; j < s; ++j) support[j] = support[j - 1] + 1;
  }
  return report;
}

/// Lower estimate of δ_s from `samples` uniformly drawn supports.
template <typename Scalar>
RicReport sampled_ric(const Matrix<Scalar>& phi, Index s, std::uint64_t samples,
                      const RngStream& stream) {
  const Index n = phi.cols();
  detail::validate_order(phi.rows(), n, s);
  if (samples == 0) throw std::invalid_argument("sampled_ric: samples must be >= 1");
  const Matrix<Scalar> gram = phi.transpose() * phi;
  Rng rng(stream);
  RicReport report;
  report.order = s;
  report.method = RicMethod::sampled;
  report.delta = -std::numeric_limits<double>::infinity();
  std::vector<Index> pool(static_cast<std::size_t>(n));
  for (std::uint64_t k = 0; k < samples; ++k) {
    for (Index i = 0; i < n; ++i) pool[i] = i;
    for (Index i = 0; i < s; ++i) {
      const Index j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
      std::swap(pool[i], pool[j]);
    }
    std::vector<Index> support(pool.begin(), pool.begin() + s);
    std::sort(support.begin(), support.end());
    const double dev = detail::support_deviation(gram, support);
    ++report.supports_examined;
    if (dev > report.delta) {
      report.delta = dev;
      report.argmax_support = IndexSet(std::move(support));
    }
  }
  return report;
}

/// δ_0 = 0, δ_1, …, δ_order, each exhaustive.
template <typename Scalar>
std::vector<double> ric_profile(const Matrix<Scalar>& phi, Index order) {
  std::vector<double> out{0.0};
  for (Index k = 1; k <= order; ++k) out.push_back(exact_ric(phi, k).delta);
  return out;
}

// Inequality checks on actual STP iterates.

enum class LemmaId {
  L1_monotonicity,
  L1_rip_products,
  L2_noise,
  L4_orthogonality,
  L5_sp_identification,
  L6_iht_identification,
};
std::string_view to_string(LemmaId id);

struct LemmaCheck {
  LemmaId lemma_id{LemmaId::L1_monotonicity};
  std::string inequality;  ///< which sub-inequality, e.g. "orthogonality-2 T=S~"
  double lhs{0.0};
  double rhs{0.0};
  double slack{0.0};  ///< rhs − lhs; +inf when the precondition fails and the bound is vacuous
};

/// Everything one STP iteration needs to be checked against.
struct LemmaContext {
  const Matrix<double>& phi;
  const Vector<double>& x_true;   ///< x_S
  const Vector<double>& e_prime;  ///< y − Φx_S
  const std::vector<double>& delta;  ///< delta[k] = δ_k, delta[0] = 0
  Index s;
  double mu;
  const Vector<double>& x_prev;            ///< xⁿ⁻¹
  const StpStepDetail<double>& step;       ///< the n-th iteration
};

/// Every sub-inequality of `id`. Throws when an order beyond `delta` is needed.
std::vector<LemmaCheck> check_lemma(LemmaId id, const LemmaContext& ctx);

/// All lemmas, concatenated.
std::vector<LemmaCheck> check_lemmas(const LemmaContext& ctx);

}  // namespace pursuitlab
