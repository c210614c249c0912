#include <gtest/gtest.h>

#include <sstream>

#include "pursuitlab/algorithm_spec.hpp"

using namespace pursuitlab;

TEST(ParseAlgorithm, Defaults) {
  const auto stp = parse_algorithm("stp");
  EXPECT_EQ(stp.id, AlgorithmId::stp);
  EXPECT_EQ(stp.mu, 1.0);
  EXPECT_FALSE(stp.alpha);
  EXPECT_EQ(parse_algorithm("htpv2").alpha_value(), 1);
  EXPECT_EQ(parse_algorithm("cosamp").alpha_value(), 2);
  EXPECT_FALSE(parse_algorithm("sp").mu);
}

TEST(ParseAlgorithm, Parameters) {
  const auto a = parse_algorithm("fbpv2:mu=1.5, nu=10,chi=8");
  EXPECT_EQ(a.id, AlgorithmId::fbpv2);
  EXPECT_EQ(a.mu, 1.5);
  EXPECT_EQ(a.nu, 10);
  EXPECT_EQ(a.chi, 8);
  EXPECT_EQ(a.label(), "fbpv2:mu=1.5,nu=10,chi=8");
  EXPECT_EQ(a.params(';'), "mu=1.5;nu=10;chi=8");
}

TEST(ParseAlgorithm, AliasesDisableIhtStep) {
  const auto samp = parse_algorithm("samp");
  EXPECT_EQ(samp.id, AlgorithmId::sampv2);
  EXPECT_FALSE(samp.iht_enabled());
  EXPECT_EQ(samp.name(), "samp");
  EXPECT_EQ(parse_algorithm("fbp").name(), "fbp");
  EXPECT_EQ(parse_algorithm("bp").id, AlgorithmId::l1);
}

TEST(ParseAlgorithm, Rejections) {
  EXPECT_THROW(parse_algorithm("nope"), std::invalid_argument);
  EXPECT_THROW(parse_algorithm("sp:mu=2"), std::invalid_argument);
  EXPECT_THROW(parse_algorithm("stp:mu=abc"), std::invalid_argument);
  EXPECT_THROW(parse_algorithm("stp:mu=-1"), std::invalid_argument);
  EXPECT_THROW(parse_algorithm("stp:mu"), std::invalid_argument);
  EXPECT_THROW(parse_algorithm("stpv2:gamma=0"), std::invalid_argument);
  EXPECT_THROW(parse_algorithm("fbpv2:nu=5,chi=5"), std::invalid_argument);
  EXPECT_THROW(parse_algorithm("cosamp:alpha=0"), std::invalid_argument);
  EXPECT_THROW(parse_algorithm(""), std::invalid_argument);
}

TEST(ParseAlgorithmList, ContinuationTokens) {
  const auto list = parse_algorithm_list("sp,htp,stp:mu=2.5,stp:mu=3,l1");
  ASSERT_EQ(list.size(), 5u);
  EXPECT_EQ(list[2].mu, 2.5);
  EXPECT_EQ(list[3].mu, 3.0);
  EXPECT_EQ(list[4].id, AlgorithmId::l1);

  const auto grouped = parse_algorithm_list("fbpv2:nu=20,chi=18,sp");
  ASSERT_EQ(grouped.size(), 2u);
  EXPECT_EQ(grouped[0].nu, 20);
  EXPECT_EQ(grouped[0].chi, 18);
  EXPECT_EQ(grouped[1].id, AlgorithmId::sp);
}

TEST(ParseAlgorithmList, Rejections) {
  EXPECT_THROW(parse_algorithm_list("mu=3,stp"), std::invalid_argument);
  EXPECT_THROW(parse_algorithm_list("sp,,stp"), std::invalid_argument);
  EXPECT_THROW(parse_algorithm_list("sp,mu=2"), std::invalid_argument);
}

TEST(LabelRoundTrip, EveryAlgorithm) {
  for (const char* text : {"omp", "sp", "cosamp:alpha=3", "iht", "niht", "htp", "stp:mu=2",
                           "stpv2:mu=1,gamma=0.4", "cosampv2:mu=2,alpha=1",
                           "htpv2:mu=1,mu_prime=0.5,alpha=0", "sampv2:mu=1,nu0=3", "samp",
                           "fbpv2:mu=1,nu=20,chi=18", "fbp", "l1"}) {
    const auto spec = parse_algorithm(text);
    EXPECT_EQ(parse_algorithm(spec.label()), spec) << text;
  }
}

TEST(StoppingMet, Cases) {
  StoppingCriteria stop;
  EXPECT_TRUE(stopping_met(0.0, 1.0, 1, stop, false));
  EXPECT_TRUE(stopping_met(1.0, 1.0, 200, stop, false));
  EXPECT_FALSE(stopping_met(2e-10, 1.0, 5, stop, false));
  EXPECT_FALSE(stopping_met(1.0, 1.0, 5, stop, true));
  stop.native_rule_enabled = true;
  EXPECT_TRUE(stopping_met(1.0, 1.0, 5, stop, true));
}

TEST(Trace, JsonLines) {
  std::ostringstream out;
  write_trace_jsonl(out, {{1, IndexSet{2, 5}, 0.5, false}, {2, IndexSet{2}, 0.0, true}});
  EXPECT_EQ(out.str(),
            "{\"iteration\":1,\"ls_rank_deficient\":false,\"residual_norm\":0.5,\"support\":[2,5]}\n"
            "{\"iteration\":2,\"ls_rank_deficient\":true,\"residual_norm\":0.0,\"support\":[2]}\n");
}
