#include "pursuitlab/results_io.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

namespace pursuitlab {

namespace {

using nlohmann::json;

std::string mu_field(const AlgorithmSpec& spec) {
  return spec.mu ? fmt::format("{}", *spec.mu) : std::string{};
}

json plan_json(const ExperimentPlan& plan) {
  json algos = json::array();
  for (const auto& a : plan.algorithms) algos.push_back(a.label());
  return {
      {"m", plan.m},
      {"n", plan.n},
      {"signal", std::string(to_string(plan.signal_kind))},
      {"sweep", plan.sweep},
      {"trials", plan.trials},
      {"algorithms", algos},
      {"max_iterations", plan.stop.max_iterations},
      {"residual_tolerance", plan.stop.residual_tolerance},
      {"native_stop", plan.stop.native_rule_enabled},
      {"seed", plan.master_seed},
      {"success_tolerance", plan.success_tolerance},
      {"stop_after_failure", plan.stop_after_failure},
      {"l1_tolerance", plan.l1.tolerance},
      {"l1_max_iterations", plan.l1.max_iterations},
  };
}

json spec_json(const AlgorithmSpec& spec) {
  json j{{"name", spec.name()}, {"label", spec.label()}};
  if (spec.mu) j["mu"] = *spec.mu;
  if (spec.mu_prime) j["mu_prime"] = *spec.mu_prime;
  if (spec.alpha) j["alpha"] = *spec.alpha;
  if (spec.gamma) j["gamma"] = *spec.gamma;
  if (spec.nu0) j["nu0"] = *spec.nu0;
  if (spec.nu) j["nu"] = *spec.nu;
  if (spec.chi) j["chi"] = *spec.chi;
  if (spec.iht_identification) j["iht"] = *spec.iht_identification;
  return j;
}

}  // namespace

ResultFormat result_format_from_string(std::string_view name) {
  if (name == "csv") return ResultFormat::csv;
  if (name == "json") return ResultFormat::json;
  throw std::invalid_argument("unknown output format '" + std::string(name) + "' (csv or json)");
}

void write_results_csv(std::ostream& out, const std::vector<RateCurve>& curves) {
  out << "algorithm,mu,params,s,trials,successes,rate,mean_iterations,mean_wall_ms\n";
  for (const auto& c : curves) {
    const std::string name = c.algorithm.name();
    const std::string mu = mu_field(c.algorithm);
    const std::string params = c.algorithm.params(';');
    for (const auto& p : c.points)
      out << fmt::format("{},{},{},{},{},{},{},{},{:.3f}\n", name, mu, params, p.s, p.trials,
                         p.successes, p.rate, p.mean_iterations, p.mean_wall_ms);
  }
}

std::string results_to_json(const ExperimentPlan& plan, const std::vector<RateCurve>& curves,
                            const std::vector<CriticalSparsityReport>& reports) {
  json doc;
  doc["artifact_version"] = std::string(kArtifactVersion);
  doc["plan"] = plan_json(plan);
  doc["success_rule"] = "relative l2 error <= success_tolerance; l1 estimates are debiased";
  json jc = json::array();
  for (const auto& c : curves) {
    json pts = json::array();
    for (const auto& p : c.points)
      pts.push_back({{"s", p.s},
                     {"successes", p.successes},
                     {"trials", p.trials},
                     {"rate", p.rate},
                     {"mean_iterations", p.mean_iterations},
                     {"mean_wall_ms", p.mean_wall_ms},
                     {"errors", p.errors},
                     {"first_error", p.first_error},
                     {"max_orthogonality", p.max_orthogonality},
                     {"digest", fmt::format("{:016x}", p.digest)}});
    jc.push_back({{"algorithm", spec_json(c.algorithm)}, {"points", pts}});
  }
  doc["curves"] = jc;
  json jr = json::array();
  for (const auto& r : reports)
    jr.push_back({{"algorithm", spec_json(r.algorithm)},
                  {"critical_s", r.critical_s},
                  {"rule", "last_full_rate"},
                  {"trials", r.trials}});
  doc["reports"] = jr;
  return doc.dump(2);
}

void export_results(const ExperimentPlan& plan, const std::vector<RateCurve>& curves,
                    const std::vector<CriticalSparsityReport>& reports,
                    const std::filesystem::path& path, ResultFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  if (format == ResultFormat::csv)
    write_results_csv(out, curves);
  else
    out << results_to_json(plan, curves, reports) << '\n';
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string plan_to_json(const ExperimentPlan& plan) { return plan_json(plan).dump(2); }

ExperimentPlan plan_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("plan is not valid JSON: ") + e.what());
  }
  static const char* const kKeys[] = {
      "m", "n", "signal", "sweep", "trials", "algorithms", "max_iterations", "residual_tolerance",
      "native_stop", "seed", "success_tolerance", "stop_after_failure", "l1_tolerance",
      "l1_max_iterations"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys))
      throw std::invalid_argument("unknown plan field '" + key + "'");
  }
  ExperimentPlan plan;
  try {
    plan.m = j.at("m").get<Index>();
    plan.n = j.at("n").get<Index>();
    plan.signal_kind = signal_kind_from_string(j.at("signal").get<std::string>());
    plan.sweep = j.at("sweep").get<std::vector<Index>>();
    plan.trials = j.at("trials").get<int>();
    for (const auto& a : j.at("algorithms")) plan.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    plan.master_seed = j.at("seed").get<std::uint64_t>();
    plan.stop.max_iterations = j.value("max_iterations", plan.stop.max_iterations);
    plan.stop.residual_tolerance = j.value("residual_tolerance", plan.stop.residual_tolerance);
    plan.stop.native_rule_enabled = j.value("native_stop", plan.stop.native_rule_enabled);
    plan.success_tolerance = j.value("success_tolerance", plan.success_tolerance);
    plan.stop_after_failure = j.value("stop_after_failure", plan.stop_after_failure);
    plan.l1.tolerance = j.value("l1_tolerance", plan.l1.tolerance);
    plan.l1.max_iterations = j.value("l1_max_iterations", plan.l1.max_iterations);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed plan: ") + e.what());
  }
  plan.validate();
  return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open plan " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return plan_from_json(buf.str());
}

}  // namespace pursuitlab
