#include "pursuitlab/ric_theory.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pursuitlab {

namespace {

void require_delta(double delta) {
  if (!(delta >= 0.0 && delta < 1.0))
    throw std::invalid_argument("delta3s must lie in [0, 1), got " + std::to_string(delta));
}

void require_mu(double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu))
    throw std::invalid_argument("mu must be a finite value >= 0, got " + std::to_string(mu));
}

double contraction(double mu, double delta) { return std::abs(mu - 1.0) + mu * delta; }

}  // namespace

double rho(double mu, double delta3s) {
  require_mu(mu);
  require_delta(delta3s);
  const double d = delta3s;
  return 2.0 * d * contraction(mu, d) * std::sqrt(1.0 + 2.0 * d * d) / (1.0 - d * d);
}

double tau_numerator(double mu, double delta3s) {
  require_mu(mu);
  require_delta(delta3s);
  const double d = delta3s;
  const double c = contraction(mu, d);
  const double first = std::sqrt(2.0 + std::sqrt(2.0)) * d * c / std::sqrt(1.0 - d * d) + 1.0;
  const double second = (std::sqrt(2.0 * (1.0 - d)) + std::sqrt(1.0 + d)) / (1.0 - d);
  const double third = std::sqrt(4.0 + std::sqrt(2.0)) * c / std::sqrt(1.0 - d);
  return first * second + third;
}

double tau(double mu, double delta3s) {
  const double r = rho(mu, delta3s);
  if (!(r < 1.0))
    throw std::invalid_argument("tau undefined: rho(" + std::to_string(mu) + ", " +
                                std::to_string(delta3s) + ") = " + std::to_string(r) + " >= 1");
  return tau_numerator(mu, delta3s) / (1.0 - r);
}

MuRange mu_admissible_range(double delta3s) {
  if (!(delta3s > 0.0 && delta3s < 1.0))
    throw std::invalid_argument("mu_admissible_range: delta3s must lie in (0, 1)");
  const double d = delta3s;
  const double root = std::sqrt(1.0 + 2.0 * d * d);
  MuRange out;
  out.lower_raw = 1.0 / (1.0 - d) - (1.0 + d) / (2.0 * d * root);
  out.upper_raw = 1.0 / (1.0 + d) + (1.0 - d) / (2.0 * d * root);
  out.below_one = {std::max(0.0, out.lower_raw), 1.0};
  out.above_one = {1.0, out.upper_raw};
  if (out.below_one.empty()) out.below_one = {1.0, 1.0};
  if (out.above_one.empty()) out.above_one = {1.0, 1.0};
  out.unit_admissible = rho(1.0, d) < 1.0;
  return out;
}

double delta_max(double mu) {
  require_mu(mu);
  double lo = 0.0;
  double hi = 1.0 - 1e-9;
  if (!(rho(mu, lo) < 1.0)) return 0.0;
  if (rho(mu, hi) < 1.0) return hi;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (rho(mu, mid) < 1.0 ? lo : hi) = mid;
  }
  return lo;
}

IterationBound iteration_bound(double norm_over_xi, Index s, double rho_value) {
  if (!(rho_value > 0.0 && rho_value < 1.0))
    throw std::invalid_argument("iteration_bound: rho must lie in (0, 1), got " +
                                std::to_string(rho_value));
  if (!(norm_over_xi >= 1.0)) throw std::invalid_argument("iteration_bound: need ||x||/xi >= 1");
  if (s < 1) throw std::invalid_argument("iteration_bound: signal must be nonzero");
  const double rate = std::log(1.0 / rho_value);
  IterationBound out;
  out.magnitude_term = static_cast<long long>(std::ceil(std::log(norm_over_xi) / rate));
  out.sparsity_term = static_cast<long long>(std::ceil(1.5 * static_cast<double>(s) / rate));
  out.raw = std::min(out.magnitude_term, out.sparsity_term);
  out.bound = std::max<long long>(1, out.raw);
  return out;
}

IterationBound iteration_bound(const SparseSignal& x, double rho_value) {
  if (x.sparsity() == 0) throw std::invalid_argument("iteration_bound: signal must be nonzero");
  return iteration_bound(x.values.norm() / x.min_magnitude(), x.sparsity(), rho_value);
}

std::string_view to_string(RicMethod method) {
  return method == RicMethod::exhaustive ? "exhaustive" : "sampled";
}

std::uint64_t binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t c = 1;
  for (Index i = 1; i <= k; ++i) {
    const auto num = static_cast<std::uint64_t>(n - k + i);
    // c·num/i is exact since c·num is divisible by i.
    if (c > kMax / num) return kMax;
    c = c * num / static_cast<std::uint64_t>(i);
  }
  return c;
}

std::string_view to_string(LemmaId id) {
  switch (id) {
    case LemmaId::L1_monotonicity: return "L1_monotonicity";
    case LemmaId::L1_rip_products: return "L1_rip_products";
    case LemmaId::L2_noise: return "L2_noise";
    case LemmaId::L4_orthogonality: return "L4_orthogonality";
    case LemmaId::L5_sp_identification: return "L5_sp_identification";
    case LemmaId::L6_iht_identification: return "L6_iht_identification";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm_on(const Vector<double>& v, const IndexSet& set) {
  double acc = 0.0;
  for (Index i : set) acc += v(i) * v(i);
  return std::sqrt(acc);
}

double delta_at(const LemmaContext& ctx, Index order) {
  if (order < 0 || order >= static_cast<Index>(ctx.delta.size()))
    throw std::invalid_argument("lemma check needs delta_" + std::to_string(order) + " but only " +
                                std::to_string(ctx.delta.size() - 1) + " orders were supplied");
  return ctx.delta[static_cast<std::size_t>(order)];
}

LemmaCheck make(LemmaId id, std::string what, double lhs, double rhs) {
  return {id, std::move(what), lhs, rhs, rhs - lhs};
}

IndexSet symmetric_difference(const IndexSet& a, const IndexSet& b) {
  return set_union(set_difference(a, b), set_difference(b, a));
}

/// ‖((I − μΦ*Φ)v)_U‖ against (|μ−1| + μδ_t)‖v‖ with t = |U ∪ supp v|.
LemmaCheck restricted_product(const LemmaContext& ctx, std::string what, const Vector<double>& v,
                              const IndexSet& U) {
  const Vector<double> w = v - ctx.mu * (ctx.phi.transpose() * (ctx.phi * v));
  const Index t = set_union(U, support_of(v)).size();
  const double rhs = (std::abs(ctx.mu - 1.0) + ctx.mu * delta_at(ctx, t)) * v.norm();
  return make(LemmaId::L1_rip_products, std::move(what), norm_on(w, U), rhs);
}

std::vector<LemmaCheck> monotonicity(const LemmaContext& ctx) {
  std::vector<LemmaCheck> out;
  for (std::size_t k = 1; k + 1 < ctx.delta.size(); ++k)
    out.push_back(make(LemmaId::L1_monotonicity,
                       "delta_" + std::to_string(k) + " <= delta_" + std::to_string(k + 1),
                       ctx.delta[k], ctx.delta[k + 1]));
  return out;
}

std::vector<LemmaCheck> rip_products(const LemmaContext& ctx) {
  const auto& d = ctx.step;
  const Vector<double> u = ctx.x_true - ctx.x_prev;
  const Vector<double> v = ctx.x_true - d.pruned_estimate;
  std::vector<LemmaCheck> out;

  const Index t = set_union(support_of(u), support_of(v)).size();
  const Vector<double> w = v - ctx.mu * (ctx.phi.transpose() * (ctx.phi * v));
  const double lhs = std::abs(u.dot(w));
  const double rhs =
      (std::abs(ctx.mu - 1.0) + ctx.mu * delta_at(ctx, t)) * u.norm() * v.norm();
  out.push_back(make(LemmaId::L1_rip_products, "inner product u=x-x_prev v=x-u_n", lhs, rhs));

  const IndexSet truth = support_of(ctx.x_true);
  out.push_back(restricted_product(ctx, "restricted v=x-u_n U=S^S_n", v,
                                   symmetric_difference(truth, d.support)));
  out.push_back(restricted_product(ctx, "restricted v=x-x_prev U=S~", u, d.merged));
  return out;
}

std::vector<LemmaCheck> noise(const LemmaContext& ctx) {
  const Vector<double> g = ctx.phi.transpose() * ctx.e_prime;
  const double e = ctx.e_prime.norm();
  std::vector<LemmaCheck> out;
  for (const auto& [name, U] : {std::pair<const char*, const IndexSet&>{"U=S~", ctx.step.merged},
                                {"U=S_n", ctx.step.support}}) {
    const double rhs = std::sqrt(1.0 + delta_at(ctx, U.size())) * e;
    out.push_back(make(LemmaId::L2_noise, name, norm_on(g, U), rhs));
  }
  return out;
}

std::vector<LemmaCheck> orthogonality(const LemmaContext& ctx) {
  const auto& d = ctx.step;
  const double e = ctx.e_prime.norm();
  const Index n = ctx.phi.cols();
  std::vector<LemmaCheck> out;

  auto check_fit = [&](const char* tag, const IndexSet& T, const Vector<double>& z) {
    const Index t = T.size();
    const double dst = delta_at(ctx, ctx.s + t);
    const double dt = delta_at(ctx, t);
    const Vector<double> diff = ctx.x_true - z;
    const double err = diff.norm();
    const std::string suffix = std::string(" T=") + tag;

    out.push_back(make(LemmaId::L4_orthogonality, "orthogonality-1" + suffix, norm_on(diff, T),
                       dst * err + std::sqrt(1.0 + dt) * e));

    const double outside = norm_on(ctx.x_true, complement(T, n));
    const double rhs2 = dst < 1.0 ? std::sqrt(1.0 / (1.0 - dst * dst)) * outside +
                                        std::sqrt(1.0 + dt) / (1.0 - dst) * e
                                  : kInf;
    out.push_back(make(LemmaId::L4_orthogonality, "orthogonality-2" + suffix, err, rhs2));

    if (t > ctx.s) {
      // The t − s smallest-magnitude entries of z on T.
      std::vector<Index> order(T.begin(), T.end());
      std::stable_sort(order.begin(), order.end(),
                       [&](Index a, Index b) { return std::abs(z(a)) < std::abs(z(b)); });
      order.resize(static_cast<std::size_t>(t - ctx.s));
      const IndexSet small(std::move(order));
      out.push_back(make(LemmaId::L4_orthogonality, "orthogonality-3" + suffix,
                         norm_on(ctx.x_true, small),
                         std::sqrt(2.0) * dst * err + std::sqrt(2.0 * (1.0 + dt)) * e));
    }
  };
  check_fit("S~", d.merged, d.merged_fit.estimate);
  check_fit("S_n", d.support, d.fit.estimate);
  return out;
}

std::vector<LemmaCheck> sp_identification(const LemmaContext& ctx) {
  const Index n = ctx.phi.cols();
  const double lhs = norm_on(ctx.x_true, complement(ctx.step.merged, n));
  const double rhs = std::sqrt(2.0) * delta_at(ctx, 3 * ctx.s) * (ctx.x_true - ctx.x_prev).norm() +
                     std::sqrt(2.0 * (1.0 + delta_at(ctx, 2 * ctx.s))) * ctx.e_prime.norm();
  return {make(LemmaId::L5_sp_identification, "x outside S~", lhs, rhs)};
}

std::vector<LemmaCheck> iht_identification(const LemmaContext& ctx) {
  const Index n = ctx.phi.cols();
  const double lhs = norm_on(ctx.x_true, complement(ctx.step.support, n));
  const double c = std::abs(ctx.mu - 1.0) + ctx.mu * delta_at(ctx, 3 * ctx.s);
  const double rhs = std::sqrt(2.0) * c * (ctx.x_true - ctx.step.pruned_estimate).norm() +
                     std::sqrt(2.0 * (1.0 + delta_at(ctx, 2 * ctx.s))) * ctx.mu *
                         ctx.e_prime.norm();
  return {make(LemmaId::L6_iht_identification, "x outside S_n", lhs, rhs)};
}

}  // namespace

std::vector<LemmaCheck> check_lemma(LemmaId id, const LemmaContext& ctx) {
  if (ctx.x_true.size() != ctx.phi.cols() || ctx.x_prev.size() != ctx.phi.cols() ||
      ctx.e_prime.size() != ctx.phi.rows())
    throw std::invalid_argument("check_lemma: dimension mismatch");
  switch (id) {
    case LemmaId::L1_monotonicity: return monotonicity(ctx);
    case LemmaId::L1_rip_products: return rip_products(ctx);
    case LemmaId::L2_noise: return noise(ctx);
    case LemmaId::L4_orthogonality: return orthogonality(ctx);
    case LemmaId::L5_sp_identification: return sp_identification(ctx);
    case LemmaId::L6_iht_identification: return iht_identification(ctx);
  }
  throw std::invalid_argument("check_lemma: unknown lemma");
}

std::vector<LemmaCheck> check_lemmas(const LemmaContext& ctx) {
  std::vector<LemmaCheck> out;
  for (LemmaId id : {LemmaId::L1_monotonicity, LemmaId::L1_rip_products, LemmaId::L2_noise,
                     LemmaId::L4_orthogonality, LemmaId::L5_sp_identification,
                     LemmaId::L6_iht_identification}) {
    auto part = check_lemma(id, ctx);
    out.insert(out.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  return out;
}

}  // namespace pursuitlab
