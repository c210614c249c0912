#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "pursuitlab/ric_theory.hpp"

using namespace pursuitlab;

TEST(Rho, KnownValues) {
  EXPECT_NEAR(rho(1.0, 0.3), 0.214868, 1e-6);
  EXPECT_EQ(rho(1.0, 0.0), 0.0);
  EXPECT_NEAR(rho(1.0, 0.534), 0.99976, 1e-5);
  // |μ−1| + μδ at μ = 2, δ = 0.1 is 1.2.
  EXPECT_NEAR(rho(2.0, 0.1), 2 * 0.1 * 1.2 * std::sqrt(1.02) / 0.99, 1e-15);
}

TEST(Rho, RejectsBadArguments) {
  EXPECT_THROW(rho(-0.5, 0.3), std::invalid_argument);
  EXPECT_THROW(rho(1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(rho(1.0, -0.1), std::invalid_argument);
  EXPECT_THROW(rho(std::nan(""), 0.1), std::invalid_argument);
}

TEST(Tau, KnownValue) {
  EXPECT_NEAR(tau(1.0, 0.3), 6.027, 1e-3);
  EXPECT_NEAR(tau(1.0, 0.3) * (1.0 - rho(1.0, 0.3)), tau_numerator(1.0, 0.3), 1e-12);
}

TEST(Tau, NoiselessLimitAtZeroDelta) {
  // δ = 0, μ = 1: (√2 + 1) + 0.
  EXPECT_NEAR(tau(1.0, 0.0), std::sqrt(2.0) + 1.0, 1e-15);
}

TEST(Tau, DivergesAtTheEdge) {
  const double edge = delta_max(1.0);
  EXPECT_GT(tau(1.0, edge - 1e-9), 1e6);
  EXPECT_THROW(tau(1.0, 0.6), std::invalid_argument);
}

TEST(MuRange, KnownBounds) {
  const auto r = mu_admissible_range(0.3);
  EXPECT_NEAR(r.upper_raw, 1.84323, 1e-5);
  EXPECT_TRUE(r.unit_admissible);
  EXPECT_EQ(r.below_one.hi, 1.0);
  EXPECT_NEAR(r.above_one.hi, r.upper_raw, 0.0);
  EXPECT_NEAR(r.lower_raw, 1.0 / 0.7 - 1.3 / (0.6 * std::sqrt(1.18)), 1e-15);
}

TEST(MuRange, EmptyPastDeltaMax) {
  const auto r = mu_admissible_range(0.6);
  EXPECT_FALSE(r.unit_admissible);
  EXPECT_TRUE(r.below_one.empty());
  EXPECT_TRUE(r.above_one.empty());
  EXPECT_THROW(mu_admissible_range(0.0), std::invalid_argument);
  EXPECT_THROW(mu_admissible_range(1.0), std::invalid_argument);
}

TEST(MuRange, AgreesWithRhoOnAGrid) {
  for (double delta : {0.05, 0.2, 0.3, 0.45, 0.5, 0.53}) {
    const auto r = mu_admissible_range(delta);
    for (int k = 1; k <= 1000; ++k) {
      const double mu = 4.0 * k / 1000.0;
      const bool inside = r.below_one.contains(mu) || r.above_one.contains(mu) ||
                          (mu == 1.0 && r.unit_admissible);
      const double near_edge =
          std::min(std::abs(mu - r.lower_raw), std::abs(mu - r.upper_raw));
      if (near_edge < 1e-9) continue;
      EXPECT_EQ(inside, rho(mu, delta) < 1.0) << "delta=" << delta << " mu=" << mu;
    }
  }
}

TEST(DeltaMax, KnownValueAndShape) {
  const double peak = delta_max(1.0);
  EXPECT_NEAR(peak, 0.5340412, 1e-7);
  EXPECT_LT(rho(1.0, peak), 1.0);
  EXPECT_GE(rho(1.0, peak + 1e-9), 1.0);
  double prev = 0.0;
  for (int k = 0; k <= 20; ++k) {
    const double mu = 0.05 * k;
    const double d = delta_max(mu);
    EXPECT_GE(d, prev) << mu;  // nondecreasing up to μ = 1
    EXPECT_LE(d, peak + 1e-12);
    prev = d;
  }
  for (int k = 0; k <= 40; ++k) {
    const double mu = 1.0 + 0.05 * k;
    const double d = delta_max(mu);
    EXPECT_LE(d, prev + 1e-12) << mu;  // nonincreasing beyond
    prev = d;
  }
}

TEST(IterationBound, Examples) {
  const auto a = iteration_bound(4.0, 3, 0.5);
  EXPECT_EQ(a.magnitude_term, 2);
  EXPECT_EQ(a.sparsity_term, 7);
  EXPECT_EQ(a.raw, 2);
  EXPECT_EQ(a.bound, 2);

  const auto flat = iteration_bound(1.0, 5, 0.5);
  EXPECT_EQ(flat.raw, 0);
  EXPECT_EQ(flat.bound, 1);

  // ±1 signal of sparsity 4: ‖x‖/ξ = 2.
  const auto x = sparse_signal(50, 4, SignalKind::cars, {1, 1});
  EXPECT_EQ(iteration_bound(x, 0.25).raw, 1);
}

TEST(IterationBound, Errors) {
  EXPECT_THROW(iteration_bound(2.0, 3, 1.0), std::invalid_argument);
  EXPECT_THROW(iteration_bound(2.0, 3, 0.0), std::invalid_argument);
  EXPECT_THROW(iteration_bound(0.5, 3, 0.5), std::invalid_argument);
  EXPECT_THROW(iteration_bound(2.0, 0, 0.5), std::invalid_argument);
}

TEST(Binomial, Values) {
  EXPECT_EQ(binomial(12, 2), 66u);
  EXPECT_EQ(binomial(5, 0), 1u);
  EXPECT_EQ(binomial(5, 6), 0u);
  EXPECT_EQ(binomial(1000, 500), std::numeric_limits<std::uint64_t>::max());
}

TEST(ExactRic, IdentityIsZero) {
  const Matrix<double> phi = Matrix<double>::Identity(6, 6);
  for (Index s = 1; s <= 6; ++s) EXPECT_NEAR(exact_ric(phi, s).delta, 0.0, 1e-14);
}

TEST(ExactRic, DuplicateColumnsGiveOne) {
  Matrix<double> phi = Matrix<double>::Identity(4, 5);
  phi.col(4) = phi.col(2);
  const auto r = exact_ric(phi, 2);
  EXPECT_NEAR(r.delta, 1.0, 1e-14);
  EXPECT_EQ(r.argmax_support, IndexSet({2, 4}));
}

TEST(ExactRic, MatchesSvdOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto phi = gaussian_matrix(6, 12, {seed, 41});
    for (Index s : {1, 2, 3}) {
      const auto r = exact_ric(phi, s);
      EXPECT_NEAR(r.delta, oracle::ric(phi, s), 1e-12);
      EXPECT_EQ(r.supports_examined, binomial(12, s));
    }
  }
}

TEST(ExactRic, PermutationInvariant) {
  const auto phi = gaussian_matrix(6, 10, {3, 42});
  std::vector<Index> perm(10);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[2], perm[7]);
  const Matrix<double> shuffled = phi(Eigen::all, perm);
  EXPECT_NEAR(exact_ric(phi, 3).delta, exact_ric(shuffled, 3).delta, 1e-13);
}

TEST(ExactRic, ProfileIsMonotone) {
  const auto phi = gaussian_matrix(8, 14, {4, 43});
  const auto profile = ric_profile(phi, 4);
  ASSERT_EQ(profile.size(), 5u);
  EXPECT_EQ(profile[0], 0.0);
  for (std::size_t k = 1; k < profile.size(); ++k) EXPECT_GE(profile[k], profile[k - 1]);
}

TEST(ExactRic, CapAndOrderErrors) {
  const auto phi = gaussian_matrix(10, 40, {1, 44});
  EXPECT_THROW(exact_ric(phi, 5, 1000), std::invalid_argument);
  EXPECT_THROW(exact_ric(phi, 0), std::invalid_argument);
  EXPECT_THROW(exact_ric(phi, 11), std::invalid_argument);
}

TEST(SampledRic, LowerBoundsExact) {
  const auto phi = gaussian_matrix(8, 16, {5, 45});
  const double exact = exact_ric(phi, 3).delta;
  const auto sampled = sampled_ric(phi, 3, 200, {5, 46});
  EXPECT_LE(sampled.delta, exact + 1e-14);
  EXPECT_GT(sampled.delta, 0.0);
  EXPECT_EQ(sampled.supports_examined, 200u);
  EXPECT_EQ(sampled.method, RicMethod::sampled);
  EXPECT_EQ(sampled.delta, sampled_ric(phi, 3, 200, {5, 46}).delta);
}

namespace {

/// Runs STP on `inst` and applies every lemma check to each iteration.
std::vector<LemmaCheck> lemma_run(const MeasurementInstance& inst, Index s, double mu,
                                  const std::vector<double>& delta, int iterations) {
  std::vector<LemmaCheck> all;
  const Vector<double>& x = inst.truth->values;
  const Vector<double> e_prime = inst.y - inst.phi * x;
  StpState<double> state = StpState<double>::initial(inst.n());
  for (int it = 0; it < iterations; ++it) {
    const auto d = stp_step<double>(inst.phi, inst.y, state, mu, s, s);
    const LemmaContext ctx{inst.phi, x, e_prime, delta, s, mu, state.x_prev, d};
    const auto checks = check_lemmas(ctx);
    all.insert(all.end(), checks.begin(), checks.end());
    state = {d.fit.estimate, d.support, state.iteration + 1};
  }
  return all;
}

}  // namespace

TEST(LemmaChecks, HoldOnSmallGaussianInstances) {
  const Index s = 2;
  for (double noise : {0.0, 0.05}) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const auto inst = build_instance(12, 16, s, SignalKind::gaussian, noise, {seed, 47});
      const auto delta = ric_profile(inst.phi, 3 * s);
      for (double mu : {0.7, 1.0, 1.5}) {
        for (const auto& c : lemma_run(inst, s, mu, delta, 4)) {
          EXPECT_GE(c.slack, -1e-9 * (1.0 + std::abs(c.rhs)))
              << to_string(c.lemma_id) << " " << c.inequality << " seed=" << seed
              << " mu=" << mu << " noise=" << noise;
        }
      }
    }
  }
}

TEST(LemmaChecks, CoverEverySubInequality) {
  const auto inst = build_instance(12, 16, 2, SignalKind::cars, 0.01, {1, 48});
  const auto delta = ric_profile(inst.phi, 6);
  const auto checks = lemma_run(inst, 2, 1.0, delta, 3);
  std::vector<std::string> names;
  for (const auto& c : checks) names.push_back(c.inequality);
  for (const char* want : {"orthogonality-1 T=S~", "orthogonality-2 T=S~", "orthogonality-3 T=S~",
                           "orthogonality-1 T=S_n", "orthogonality-2 T=S_n", "x outside S~",
                           "x outside S_n", "U=S~", "U=S_n", "delta_5 <= delta_6"})
    EXPECT_NE(std::find(names.begin(), names.end(), want), names.end()) << want;
}

TEST(LemmaChecks, MissingOrderThrows) {
  const auto inst = build_instance(12, 16, 2, SignalKind::cars, 0.0, {1, 49});
  const auto delta = ric_profile(inst.phi, 3);
  const auto d = stp_step<double>(inst.phi, inst.y, StpState<double>::initial(16), 1.0, 2, 2);
  const Vector<double> e = Vector<double>::Zero(12);
  const Vector<double> x0 = Vector<double>::Zero(16);
  const LemmaContext ctx{inst.phi, inst.truth->values, e, delta, 2, 1.0, x0, d};
  EXPECT_THROW(check_lemma(LemmaId::L5_sp_identification, ctx), std::invalid_argument);
}

TEST(LemmaChecks, ContractionOnNearOrthonormalMatrix) {
  // δ₆ = 1/2 < δ_max(1): the error must shrink by at least ρ per iteration.
  const Index s = 2;
  const auto phi = oracle::near_orthonormal(32, 2, {7, 50});
  const double d6 = exact_ric(phi, 3 * s, 2'000'000).delta;
  EXPECT_NEAR(d6, 0.5, 1e-12);
  const double r = rho(1.0, d6);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = make_instance(phi, sparse_signal(34, s, SignalKind::gaussian, {seed, 51}));
    StpState<double> state = StpState<double>::initial(34);
    double err = inst.truth->values.norm();
    for (int it = 0; it < 5 && err > 1e-12; ++it) {
      state = stp_iterate(state, AlgorithmSpec::make(AlgorithmId::stp), inst, s, s);
      const double next = (inst.truth->values - state.x_prev).norm();
      EXPECT_LE(next, r * err + 1e-12) << seed;
      err = next;
    }
  }
}
