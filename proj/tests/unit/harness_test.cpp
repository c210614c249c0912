#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pursuitlab/harness.hpp"
#include "pursuitlab/results_io.hpp"

using namespace pursuitlab;

namespace {

ExperimentPlan small_plan() {
  ExperimentPlan plan;
  plan.m = 30;
  plan.n = 90;
  plan.signal_kind = SignalKind::cars;
  plan.sweep = {1, 4, 8, 12};
  plan.trials = 6;
  plan.algorithms = parse_algorithm_list("sp,stp:mu=2,l1");
  plan.master_seed = 99;
  return plan;
}

RateCurve curve_from(std::vector<std::pair<int, int>> successes) {
  RateCurve c;
  c.algorithm = parse_algorithm("sp");
  Index s = 1;
  for (auto [ok, total] : successes) {
    RatePoint p;
    p.s = s++;
    p.successes = ok;
    p.trials = total;
    p.rate = total ? static_cast<double>(ok) / total : 0.0;
    c.points.push_back(p);
  }
  return c;
}

}  // namespace

TEST(Plan, Validation) {
  auto plan = small_plan();
  EXPECT_NO_THROW(plan.validate());
  plan.sweep = {1, 30};
  try {
    plan.validate();
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("smaller than m=30"), std::string::npos) << e.what();
  }
  plan = small_plan();
  plan.sweep = {4, 4};
  EXPECT_THROW(plan.validate(), std::invalid_argument);
  plan = small_plan();
  plan.m = 90;
  EXPECT_THROW(plan.validate(), std::invalid_argument);
  plan = small_plan();
  plan.algorithms.clear();
  EXPECT_THROW(plan.validate(), std::invalid_argument);
  plan = small_plan();
  plan.trials = 0;
  EXPECT_THROW(plan.validate(), std::invalid_argument);
}

TEST(Sweep, Construction) {
  EXPECT_EQ(make_sweep(2, 10, 4), (std::vector<Index>{2, 6, 10}));
  EXPECT_EQ(make_sweep(3, 3, 1), (std::vector<Index>{3}));
  EXPECT_EQ(make_sweep(1, 6, 4), (std::vector<Index>{1, 5}));
  EXPECT_THROW(make_sweep(5, 4, 1), std::invalid_argument);
  EXPECT_THROW(make_sweep(1, 4, 0), std::invalid_argument);
}

TEST(TrialInstance, DistinctPerPointAndTrial) {
  const auto plan = small_plan();
  const auto a = trial_instance(plan, 4, 0);
  EXPECT_EQ(instance_hash(a), instance_hash(trial_instance(plan, 4, 0)));
  EXPECT_NE(instance_hash(a), instance_hash(trial_instance(plan, 4, 1)));
  EXPECT_NE(instance_hash(a), instance_hash(trial_instance(plan, 8, 0)));
  EXPECT_EQ(a.truth->sparsity(), 4);
}

TEST(RunTrial, ScoresExactRecovery) {
  const auto plan = small_plan();
  const auto inst = trial_instance(plan, 4, 2);
  const auto ok = run_trial(parse_algorithm("stp"), inst, 4, {}, {}, 1e-6);
  EXPECT_TRUE(ok.success);
  EXPECT_TRUE(ok.error.empty());
  const auto l1 = run_trial(parse_algorithm("l1"), inst, 4, {}, {}, 1e-6);
  EXPECT_TRUE(l1.success);
}

TEST(RunTrial, ExceptionIsAFailure) {
  const auto plan = small_plan();
  const auto inst = trial_instance(plan, 4, 2);
  StoppingCriteria bad;
  bad.max_iterations = 0;
  const auto out = run_trial(parse_algorithm("sp"), inst, 4, bad, {}, 1e-6);
  EXPECT_FALSE(out.success);
  EXPECT_FALSE(out.error.empty());
}

TEST(RateCurve, SparsityOneAlwaysRecovered) {
  auto plan = small_plan();
  plan.sweep = {1};
  plan.trials = 20;
  for (const auto& c : run_rate_curve(plan, {1, {}})) {
    ASSERT_EQ(c.points.size(), 1u);
    EXPECT_EQ(c.points[0].rate, 1.0) << c.algorithm.label();
    EXPECT_EQ(c.points[0].errors, 0);
  }
}

TEST(RateCurve, DeterministicAcrossWorkerCounts) {
  const auto plan = small_plan();
  const auto one = run_rate_curve(plan, {1, {}});
  const auto four = run_rate_curve(plan, {4, {}});
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t a = 0; a < one.size(); ++a) {
    ASSERT_EQ(one[a].points.size(), four[a].points.size());
    for (std::size_t i = 0; i < one[a].points.size(); ++i) {
      EXPECT_EQ(one[a].points[i].successes, four[a].points[i].successes);
      EXPECT_EQ(one[a].points[i].mean_iterations, four[a].points[i].mean_iterations);
      EXPECT_EQ(one[a].points[i].digest, four[a].points[i].digest);
    }
  }
}

TEST(RateCurve, AlgorithmOrderDoesNotChangeResults) {
  auto plan = small_plan();
  const auto forward = run_rate_curve(plan, {2, {}});
  std::reverse(plan.algorithms.begin(), plan.algorithms.end());
  const auto backward = run_rate_curve(plan, {2, {}});
  for (std::size_t a = 0; a < forward.size(); ++a) {
    const auto& f = forward[a];
    const auto& b = backward[forward.size() - 1 - a];
    ASSERT_EQ(f.algorithm, b.algorithm);
    for (std::size_t i = 0; i < f.points.size(); ++i)
      EXPECT_EQ(f.points[i].digest, b.points[i].digest);
  }
}

TEST(RateCurve, OnPointCallbackSeesEveryPoint) {
  const auto plan = small_plan();
  std::size_t calls = 0;
  HarnessOptions opts{2, [&](std::size_t, const RatePoint&) { ++calls; }};
  run_rate_curve(plan, opts);
  EXPECT_EQ(calls, plan.sweep.size() * plan.algorithms.size());
}

TEST(RateCurve, StopAfterFailureTruncates) {
  auto plan = small_plan();
  plan.sweep = {2, 20, 25, 28};
  plan.algorithms = parse_algorithm_list("sp");
  plan.stop_after_failure = true;
  const auto curves = run_rate_curve(plan, {1, {}});
  ASSERT_FALSE(curves[0].points.empty());
  EXPECT_LT(curves[0].points.back().rate, 1.0);
  EXPECT_LT(curves[0].points.size(), plan.sweep.size());
  EXPECT_EQ(find_critical_sparsity(curves[0]).critical_s, 2);
}

TEST(CriticalSparsity, ContiguousPrefixRule) {
  EXPECT_EQ(find_critical_sparsity(curve_from({{5, 5}, {5, 5}, {4, 5}, {5, 5}})).critical_s, 2);
  EXPECT_EQ(find_critical_sparsity(curve_from({{4, 5}, {5, 5}})).critical_s, 0);
  EXPECT_EQ(find_critical_sparsity(curve_from({{5, 5}, {5, 5}})).critical_s, 2);
  EXPECT_EQ(find_critical_sparsity(curve_from({})).critical_s, 0);
  EXPECT_EQ(find_critical_sparsity(curve_from({{5, 5}})).trials, 5);
}

TEST(ResolveWorkers, ExplicitWins) {
  EXPECT_EQ(resolve_workers(3), 3u);
  EXPECT_GE(resolve_workers(0), 1u);
}

TEST(ResultsCsv, HeaderOnlyWhenEmpty) {
  std::ostringstream out;
  write_results_csv(out, {});
  EXPECT_EQ(out.str(), "algorithm,mu,params,s,trials,successes,rate,mean_iterations,mean_wall_ms\n");
}

TEST(ResultsCsv, Rows) {
  RateCurve c;
  c.algorithm = parse_algorithm("stp:mu=2.5");
  RatePoint p;
  p.s = 7;
  p.trials = 4;
  p.successes = 3;
  p.rate = 0.75;
  p.mean_iterations = 5.5;
  p.mean_wall_ms = 1.23456;
  c.points.push_back(p);
  RateCurve l1;
  l1.algorithm = parse_algorithm("l1");
  l1.points.push_back(p);
  std::ostringstream out;
  write_results_csv(out, {c, l1});
  std::istringstream lines(out.str());
  std::string header, row1, row2;
  std::getline(lines, header);
  std::getline(lines, row1);
  std::getline(lines, row2);
  EXPECT_EQ(row1, "stp,2.5,mu=2.5,7,4,3,0.75,5.5,1.235");
  EXPECT_EQ(row2, "l1,,,7,4,3,0.75,5.5,1.235");
}

TEST(ResultsJson, CarriesPlanCurvesAndReports) {
  const auto plan = small_plan();
  const auto curves = run_rate_curve(plan, {2, {}});
  std::vector<CriticalSparsityReport> reports;
  for (const auto& c : curves) reports.push_back(find_critical_sparsity(c));
  const auto doc = nlohmann::json::parse(results_to_json(plan, curves, reports));
  EXPECT_EQ(doc.at("artifact_version"), "1.0.0");
  EXPECT_EQ(doc.at("plan").at("seed"), 99);
  ASSERT_EQ(doc.at("curves").size(), 3u);
  EXPECT_EQ(doc.at("curves")[1].at("algorithm").at("label"), "stp:mu=2");
  EXPECT_EQ(doc.at("curves")[0].at("points").size(), 4u);
  EXPECT_EQ(doc.at("reports")[2].at("critical_s"), reports[2].critical_s);
  EXPECT_EQ(doc.at("curves")[0].at("points")[0].at("digest").get<std::string>().size(), 16u);
}

TEST(PlanJson, RoundTrip) {
  auto plan = small_plan();
  plan.stop.max_iterations = 77;
  plan.stop.native_rule_enabled = true;
  plan.stop_after_failure = true;
  plan.success_tolerance = 1e-5;
  const auto back = plan_from_json(plan_to_json(plan));
  EXPECT_EQ(back.m, plan.m);
  EXPECT_EQ(back.n, plan.n);
  EXPECT_EQ(back.signal_kind, plan.signal_kind);
  EXPECT_EQ(back.sweep, plan.sweep);
  EXPECT_EQ(back.trials, plan.trials);
  EXPECT_EQ(back.algorithms, plan.algorithms);
  EXPECT_EQ(back.master_seed, plan.master_seed);
  EXPECT_EQ(back.stop.max_iterations, 77);
  EXPECT_TRUE(back.stop.native_rule_enabled);
  EXPECT_TRUE(back.stop_after_failure);
  EXPECT_EQ(back.success_tolerance, 1e-5);
}

TEST(PlanJson, Rejections) {
  EXPECT_THROW(plan_from_json("{"), std::invalid_argument);
  EXPECT_THROW(plan_from_json(R"({"m":10,"n":20,"bogus":1})"), std::invalid_argument);
  EXPECT_THROW(plan_from_json(R"({"m":10})"), std::invalid_argument);
  EXPECT_THROW(
      plan_from_json(
          R"({"m":10,"n":20,"signal":"cars","sweep":[1,10],"trials":2,"algorithms":["sp"],"seed":1})"),
      std::invalid_argument);
  EXPECT_THROW(load_plan("/nonexistent/plan.json"), std::runtime_error);
}

TEST(Export, WritesFileAndNamesBadPath) {
  const auto plan = small_plan();
  const auto path = std::filesystem::temp_directory_path() / "pursuitlab_export_test.csv";
  export_results(plan, {}, {}, path, ResultFormat::csv);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("algorithm,mu,", 0), 0u);
  std::filesystem::remove(path);
  try {
    export_results(plan, {}, {}, "/nonexistent/dir/out.json", ResultFormat::json);
    FAIL() << "expected failure";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/out.json"), std::string::npos);
  }
  EXPECT_THROW(result_format_from_string("xml"), std::invalid_argument);
}
