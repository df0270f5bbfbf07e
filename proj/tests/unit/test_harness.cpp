#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "tracekit/error.hpp"
#include "tracekit/harness.hpp"

using namespace tracekit;
using nlohmann::json;

namespace {

FamilySpec bnd(const std::string& kind, int d) { return {kind, {{"d", d}}, {}}; }
FamilySpec hat() { return {"hat", {}, {}}; }
FamilySpec over(const std::string& kind, FamilySpec eta) { return {kind, {}, {std::move(eta)}}; }

HarnessOptions options(int workers = 1) {
  HarnessOptions o;
  o.workers = workers;
  return o;
}

CheckInstance instance(CheckKind kind, FamilySpec f, ExponentConfig cfg, json extra = json::object()) {
  return {kind, std::move(f), std::move(cfg), std::move(extra)};
}

}  // namespace

TEST(Harness, KindNames) {
  for (auto k : all_check_kinds()) EXPECT_EQ(check_kind_from_string(to_string(k)), k);
  EXPECT_EQ(to_string(CheckKind::besov_trace), "besov-trace");
  EXPECT_THROW(check_kind_from_string("besov_trace"), ConfigError);
  EXPECT_FALSE(is_empirical(CheckKind::hardy));
  EXPECT_TRUE(is_empirical(CheckKind::extension_bound));
}

TEST(Harness, InstanceJsonRoundTrip) {
  const auto inst = instance(CheckKind::convolution, bnd("bump", 2), ExponentConfig::make({1.0, 2.0}, 2.0, 0.0),
                             {{"delta", 0.125}});
  const auto back = CheckInstance::from_json(inst.to_json());
  EXPECT_EQ(back.key(), inst.key());
  EXPECT_EQ(back.family, inst.family);
  EXPECT_EQ(back.cfg, inst.cfg);
  EXPECT_THROW(CheckInstance::from_json(json{{"kind", "nope"}}), ConfigError);
}

TEST(Harness, BesovTraceRampCutoff) {
  const auto r = run_instance(instance(CheckKind::besov_trace, over("ramp-cutoff", bnd("bump", 1)),
                                       ExponentConfig::make({2.0}, 2.0, 0.0)),
                              options());
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].status, Status::pass);
  EXPECT_TRUE(std::isfinite(r[0].lhs / r[0].rhs));
  EXPECT_GT(r[0].lhs, 0.0);
}

TEST(Harness, LpTraceOfVerticalPowerIsZero) {
  const auto r = run_instance(instance(CheckKind::lp_trace, {"vertical-power", {{"m", 1.0}}, {bnd("bump", 1)}},
                                       ExponentConfig::make({2.0}, 2.0, 0.0)),
                              options());
  EXPECT_EQ(r[0].lhs, 0.0);
  EXPECT_EQ(r[0].status, Status::pass);
}

TEST(Harness, VanishingTraceClosedForm) {
  const auto r = run_instance(instance(CheckKind::vanishing_trace, over("log-decay", bnd("bump", 1)),
                                       ExponentConfig::make({2.0}, 2.0, -1.0)),
                              options());
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].status, Status::pass);
  EXPECT_NEAR(r[0].lhs / r[0].rhs, 1.0 / 21.0, 1e-6);
  EXPECT_LT(r[0].lhs, 0.05 * r[0].rhs);
}

TEST(Harness, VanishingTraceRequiresWindow) {
  EXPECT_THROW(run_instance(instance(CheckKind::vanishing_trace, over("log-decay", bnd("bump", 1)),
                                     ExponentConfig::make({2.0}, 2.0, 0.0)),
                            options()),
               DomainError);
}

TEST(Harness, ConvolutionYieldsTwoReports) {
  const auto r = run_instance(
      instance(CheckKind::convolution, hat(), ExponentConfig::make({1.0}, 2.0, 0.0), {{"delta", 0.25}}), options());
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].check_id, "convolution/approximation");
  EXPECT_EQ(r[1].check_id, "convolution/derivative");
  EXPECT_EQ(r[0].constant, 1.0);
}

TEST(Harness, BesovEquivalenceClosedFormInstance) {
  const auto r = run_instance(instance(CheckKind::besov_equivalence, bnd("indicator", 1),
                                       ExponentConfig::make({1.0}, 1.0, -0.5), {{"closed_form", 16.0}}),
                              options());
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].check_id, "besov-equivalence/closed-form");
  EXPECT_NEAR(r[0].lhs / 16.0, 1.0, 0.01);
  EXPECT_EQ(r[0].status, Status::pass);
}

TEST(Harness, DefaultMatricesAreNonEmpty) {
  for (auto k : all_check_kinds()) {
    std::vector<std::string> excluded;
    const auto v = default_instances(k, &excluded);
    EXPECT_FALSE(v.empty()) << to_string(k);
    std::set<std::string> keys;
    for (const auto& i : v) keys.insert(i.key());
    EXPECT_EQ(keys.size(), v.size()) << "duplicate instances in " << to_string(k);
  }
  EXPECT_GE(default_instances(CheckKind::hardy).size(), 54u);
}

TEST(Harness, CampaignDeterministicAcrossWorkerCounts) {
  auto inst = default_instances(CheckKind::hardy_polar);
  const auto a = run_campaign(CheckKind::hardy_polar, inst, options(1));
  std::reverse(inst.begin(), inst.end());
  const auto b = run_campaign(CheckKind::hardy_polar, inst, options(3));
  ASSERT_EQ(a.reports.size(), b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i) EXPECT_EQ(serialize(a.reports[i]), serialize(b.reports[i]));
  EXPECT_EQ(a.summary.c_emp, b.summary.c_emp);
}

TEST(Harness, EmpiricalConstantMonotoneUnderGrowth) {
  const auto all = default_instances(CheckKind::hardy_polar);
  const std::vector<CheckInstance> half(all.begin(), all.begin() + static_cast<long>(all.size() / 2));
  const auto small = run_campaign(CheckKind::hardy_polar, half, options());
  const auto big = run_campaign(CheckKind::hardy_polar, all, options());
  EXPECT_GE(big.summary.c_emp, small.summary.c_emp);
  EXPECT_TRUE(big.summary.ok(Tolerances{}));
  EXPECT_EQ(big.summary.total, big.reports.size());
}

TEST(Harness, HardyCampaignAllPass) {
  std::vector<std::string> excluded;
  const auto inst = default_instances(CheckKind::hardy, &excluded);
  const auto res = run_campaign(CheckKind::hardy, inst, options(), excluded);
  EXPECT_EQ(res.summary.passed, res.summary.total);
  EXPECT_EQ(res.summary.failed, 0u);
}

TEST(Harness, RefinementOfClosedFormHardy) {
  const auto inst = instance(CheckKind::hardy, {}, ExponentConfig{},
                             {{"q", 2.0}, {"sigma", 0.0}, {"a", 1.0}, {"shape", "near-extremal"}, {"eps", 0.01}});
  const auto r = refinement_study(inst, 2, options());
  EXPECT_EQ(r.status, Status::pass);
  EXPECT_LE(r.lhs, 1e-8);
  EXPECT_THROW(refinement_study(inst, 1, options()), DomainError);
  EXPECT_THROW(refinement_study(inst, 5, options()), DomainError);
}

TEST(Harness, RefinementOfBesovEquivalenceHat) {
  const auto r = refinement_study(instance(CheckKind::besov_equivalence, hat(), ExponentConfig::make({2.0}, 2.0, 0.0)),
                                  2, options());
  EXPECT_EQ(r.status, Status::pass);
  EXPECT_LE(r.lhs, 0.02);
}

TEST(Harness, RefinementOfConstantExtensionLimit) {
  const auto r = refinement_study(instance(CheckKind::extension_limit, {"constant", {{"d", 1}, {"value", 1.0}}, {}},
                                           ExponentConfig::make({2.0}, 2.0, 0.0)),
                                  2, options());
  EXPECT_EQ(r.status, Status::pass);
  for (const auto& run : r.params.at("runs"))
    for (const auto& rep : run) {
      EXPECT_LE(rep.at("lhs").get<double>(), 1e-8);
      EXPECT_LE(rep.at("rhs").get<double>(), 1e-8);
    }
}

TEST(Harness, EllIndependence) {
  const std::vector<ExponentConfig> one = {ExponentConfig::make({2.0, 3.0}, 2.0, 0.0)};
  const auto r = ell_independence_check(bnd("bump", 2), one, options());
  EXPECT_EQ(r.status, Status::pass);
  const std::vector<ExponentConfig> mixed = {ExponentConfig::make({2.0, 3.0}, 2.0, 0.0),
                                             ExponentConfig::make({1.0, 1.0}, 3.0, 0.0)};
  EXPECT_THROW(ell_independence_check(bnd("bump", 2), mixed, options()), DomainError);
  const std::vector<ExponentConfig> dims = {ExponentConfig::make({2.0, 3.0}, 2.0, 0.0),
                                            ExponentConfig::make({2.0}, 2.0, 0.0)};
  EXPECT_THROW(ell_independence_check(bnd("bump", 2), dims, options()), DomainError);
}

TEST(Harness, ReportSchemaAndRoundTrip) {
  const auto r = run_instance(instance(CheckKind::hardy, {}, ExponentConfig{},
                                       {{"q", 2.0}, {"sigma", 0.0}, {"a", 1.0}, {"shape", "constant"}, {"eps", 0.01}}),
                              options())[0];
  const std::string s = serialize(r);
  const json j = json::parse(s);
  // serialize keeps schema order
  const std::vector<std::string> schema = {"check_id", "params", "lhs",        "rhs",       "constant",
                                           "ratio",    "status", "mesh_level", "runtime_ms"};
  for (std::size_t pos = 0, i = 0; i < schema.size(); ++i) {
    const auto at = s.find("\"" + schema[i] + "\":", pos);
    ASSERT_NE(at, std::string::npos) << schema[i];
    pos = at;
  }
  EXPECT_EQ(serialize(ComparisonReport::from_json(j)), s);
  EXPECT_EQ(j.at("runtime_ms"), 0);
  EXPECT_EQ(j.at("status"), "PASS");
}

TEST(Harness, ResolveWorkers) {
  EXPECT_EQ(resolve_workers(3), 3);
  EXPECT_GE(resolve_workers(0), 1);
}
