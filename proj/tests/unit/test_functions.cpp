#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tracekit/error.hpp"
#include "tracekit/functions.hpp"
#include "tracekit/report.hpp"

using namespace tracekit;

namespace {

FamilySpec boundary_spec(const std::string& kind, int d, std::map<std::string, double> extra = {}) {
  extra["d"] = d;
  return {kind, extra, {}};
}

FamilySpec over(const std::string& kind, FamilySpec eta, std::map<std::string, double> params = {}) {
  return {kind, params, {std::move(eta)}};
}

FamilySpec tensor_hat() { return {"tensor", {}, {{"hat", {}, {}}, {"hat", {}, {}}}}; }

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

}  // namespace

TEST(Functions, RegistryExamples) {
  const auto g = family_instantiate(boundary_spec("gaussian-bump", 2));
  const double zero[2] = {0.0, 0.0};
  EXPECT_DOUBLE_EQ(g.boundary->value(zero), 1.0);
  EXPECT_TRUE(std::isinf(g.support_radius()));

  const auto h = family_instantiate(boundary_spec("hat", 1));
  EXPECT_DOUBLE_EQ(h.support_radius(), 1.0);
  for (double x : {-1.5, -0.25, 0.0, 0.6, 1.0}) {
    const double xs[1] = {x};
    EXPECT_DOUBLE_EQ(h.boundary->value(xs), std::max(0.0, 1.0 - std::abs(x)));
  }

  const auto bump = family_instantiate(boundary_spec("bump", 1));
  const auto u = family_instantiate(over("vertical-power", boundary_spec("bump", 1), {{"m", 0.1}}));
  ASSERT_EQ(u.domain, DomainTag::halfspace);
  for (double x : {-0.7, 0.0, 0.3})
    for (double y : {0.01, 0.5, 0.9}) {
      const double xs[1] = {x};
      EXPECT_NEAR(u.halfspace->value(xs, y), bump.boundary->value(xs) * std::pow(y, 0.1), 1e-15);
    }
}

TEST(Functions, IndicatorAndConstant) {
  const auto ind = family_instantiate(boundary_spec("indicator", 2));
  const double in[2] = {0.5, 0.2}, out[2] = {0.5, 1.2};
  EXPECT_EQ(ind.boundary->value(in), 1.0);
  EXPECT_EQ(ind.boundary->value(out), 0.0);
  EXPECT_FALSE(ind.has_gradient());
  const auto c = family_instantiate(boundary_spec("constant", 1, {{"value", 3.0}}));
  const double x[1] = {100.0};
  EXPECT_EQ(c.boundary->value(x), 3.0);
}

TEST(Functions, TensorFactorizes) {
  const auto t = family_instantiate(tensor_hat());
  ASSERT_EQ(t.dim(), 2);
  const double x[2] = {0.25, -0.5};
  EXPECT_DOUBLE_EQ(t.boundary->value(x), 0.75 * 0.5);
  EXPECT_EQ(t.boundary->factors().size(), 2u);
}

TEST(Functions, RejectsBadSpecs) {
  EXPECT_THROW(family_instantiate({"nope", {}, {}}), DomainError);
  EXPECT_THROW(family_instantiate(boundary_spec("hat", 2)), DomainError);
  EXPECT_THROW(family_instantiate(boundary_spec("bump", 4)), DomainError);
  EXPECT_THROW(family_instantiate(boundary_spec("bump", 1, {{"radius", -1.0}})), DomainError);
  EXPECT_THROW(family_instantiate(boundary_spec("bump", 1, {{"colour", 1.0}})), DomainError);
  EXPECT_THROW(family_instantiate(over("vertical-power", boundary_spec("bump", 1), {{"m", -0.5}})), DomainError);
  EXPECT_THROW(family_instantiate(over("ramp-cutoff", boundary_spec("bump", 1), {{"d", 1}})), DomainError);
}

TEST(Functions, SpecJsonRoundTrip) {
  const FamilySpec s = over("ramp-cutoff", tensor_hat());
  EXPECT_EQ(family_from_json(to_json(s)), s);
  const FamilySpec b = boundary_spec("gaussian-bump", 2, {{"scale", 0.5}});
  EXPECT_EQ(family_from_json(to_json(b)), b);
}

// Central differences (step 1e-4) against the hand-coded gradients.
TEST(Functions, GradientsMatchCentralDifferences) {
  const std::vector<FamilySpec> boundary = {
      boundary_spec("gaussian-bump", 1), boundary_spec("gaussian-bump", 2, {{"scale", 0.7}}),
      boundary_spec("bump", 1),          boundary_spec("bump", 2, {{"radius", 1.5}}),
      boundary_spec("bump", 3),          boundary_spec("hat", 1, {{"scale", 2.0}}),
      boundary_spec("constant", 2, {{"value", 2.0}}), tensor_hat(),
      {"tensor", {}, {boundary_spec("gaussian-bump", 1), boundary_spec("bump", 1)}}};
  std::mt19937_64 rng(42);
  const double h = 1e-4;
  for (const auto& s : boundary) {
    const auto f = family_instantiate(s);
    ASSERT_TRUE(f.has_gradient()) << s.kind;
    const int d = f.dim();
    std::uniform_real_distribution<double> U(-0.95, 0.95);
    std::vector<double> x(d), xp(d), xm(d), g(d);
    int checked = 0;
    while (checked < 100) {
      for (auto& c : x) c = U(rng);
      // stay away from the kinks of the hat factors
      bool near_kink = false;
      for (double c : x) near_kink = near_kink || std::abs(c) < 1e-3;
      if (near_kink && (s.kind == "hat" || s.kind == "tensor")) continue;
      f.boundary->gradient(x, g);
      for (int a = 0; a < d; ++a) {
        xp = x;
        xm = x;
        xp[a] += h;
        xm[a] -= h;
        const double fd = (f.boundary->value(xp) - f.boundary->value(xm)) / (2 * h);
        EXPECT_LE(std::abs(fd - g[a]), 1e-5 * (1.0 + norm2(g))) << s.kind << " axis " << a;
      }
      ++checked;
    }
  }

  const std::vector<FamilySpec> half = {over("vertical-power", boundary_spec("bump", 1), {{"m", 1.5}}),
                                        over("vertical-power", boundary_spec("gaussian-bump", 2), {{"m", 0.0}}),
                                        over("log-decay", boundary_spec("bump", 2)),
                                        over("ramp-cutoff", boundary_spec("gaussian-bump", 1))};
  for (const auto& s : half) {
    const auto u = family_instantiate(s);
    const int d = u.dim();
    std::uniform_real_distribution<double> U(-0.95, 0.95), Y(0.05, 0.95);
    std::vector<double> x(d), xp(d), xm(d), g(d + 1);
    for (int n = 0; n < 100; ++n) {
      for (auto& c : x) c = U(rng);
      const double y = Y(rng);
      u.halfspace->gradient(x, y, g);
      for (int a = 0; a < d; ++a) {
        xp = x;
        xm = x;
        xp[a] += h;
        xm[a] -= h;
        const double fd = (u.halfspace->value(xp, y) - u.halfspace->value(xm, y)) / (2 * h);
        EXPECT_LE(std::abs(fd - g[a]), 1e-5 * (1.0 + norm2(g))) << s.kind;
      }
      const double fdy = (u.halfspace->value(x, y + h) - u.halfspace->value(x, y - h)) / (2 * h);
      EXPECT_LE(std::abs(fdy - g[d]), 1e-5 * (1.0 + norm2(g))) << s.kind << " y";
    }
  }
}

TEST(Functions, BoundaryRestrictionConsistency) {
  for (const auto& s : {over("ramp-cutoff", boundary_spec("bump", 1)),
                        over("ramp-cutoff", boundary_spec("gaussian-bump", 2)),
                        over("vertical-power", boundary_spec("bump", 1), {{"m", 1.0}}),
                        over("vertical-power", boundary_spec("bump", 2), {{"m", 0.0}})}) {
    const auto u = family_instantiate(s);
    const auto g = u.halfspace->trace();
    ASSERT_TRUE(g) << s.kind;
    std::vector<double> x(static_cast<std::size_t>(u.dim()));
    for (double c : {-0.8, -0.1, 0.0, 0.45}) {
      std::fill(x.begin(), x.end(), c);
      EXPECT_LE(std::abs(u.halfspace->value(x, 1e-8) - g->value(x)), 1e-6) << s.kind;
    }
  }
}
