#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "tracekit/error.hpp"
#include "tracekit/functions.hpp"
#include "tracekit/norms.hpp"

using namespace tracekit;

namespace {

std::shared_ptr<const BoundaryFunction> boundary(const std::string& kind, int d,
                                                 std::map<std::string, double> params = {}) {
  if (kind != "hat") params["d"] = d;
  return family_instantiate({kind, params, {}}).boundary;
}

// a·f + b·g for the norm axioms.
class Combination final : public BoundaryFunction {
 public:
  Combination(std::shared_ptr<const BoundaryFunction> f, std::shared_ptr<const BoundaryFunction> g, double a,
              double b)
      : f_(std::move(f)), g_(std::move(g)), a_(a), b_(b) {}
  int dim() const override { return f_->dim(); }
  double value(std::span<const double> x) const override { return a_ * f_->value(x) + b_ * g_->value(x); }
  Interval support(int axis) const override {
    const Interval s = f_->support(axis), t = g_->support(axis);
    return {std::min(s.lo, t.lo), std::max(s.hi, t.hi)};
  }
  std::vector<double> breakpoints(int axis) const override {
    auto v = f_->breakpoints(axis);
    for (double b : g_->breakpoints(axis)) v.push_back(b);
    return v;
  }
  std::string kind() const override { return "combination"; }

 private:
  std::shared_ptr<const BoundaryFunction> f_, g_;
  double a_, b_;
};

class Scaled final : public HalfSpaceFunction {
 public:
  Scaled(std::shared_ptr<const HalfSpaceFunction> u, double c) : u_(std::move(u)), c_(c) {}
  int dim() const override { return u_->dim(); }
  double value(std::span<const double> x, double y) const override { return c_ * u_->value(x, y); }
  bool has_gradient() const override { return true; }
  void gradient(std::span<const double> x, double y, std::span<double> out) const override {
    u_->gradient(x, y, out);
    for (double& v : out) v *= c_;
  }
  Interval support(int axis, double y) const override { return u_->support(axis, y); }
  std::vector<double> breakpoints(int axis, double y) const override { return u_->breakpoints(axis, y); }
  std::string kind() const override { return "scaled"; }

 private:
  std::shared_ptr<const HalfSpaceFunction> u_;
  double c_;
};

}  // namespace

TEST(Norms, TensorProductFactorizes) {
  QuadratureSpec s;
  const auto f = family_instantiate({"tensor", {}, {{"hat", {}, {}}, {"gaussian-bump", {{"d", 1}}, {}}}}).boundary;
  const double p[] = {3.0, 1.5};
  const double hat3 = std::pow(2.0 / 4.0, 1.0 / 3.0);  // ∫(1−|x|)^3 = 1/2
  const double gauss15 = std::pow(std::sqrt(2 * std::numbers::pi / 1.5), 1.0 / 1.5);
  EXPECT_NEAR(mixed_lebesgue_norm(*f, p, s), hat3 * gauss15, 1e-9);
}

TEST(Norms, IndicatorHasUnitNorm) {
  QuadratureSpec s;
  for (int d : {1, 2, 3}) {
    const auto f = boundary("indicator", d);
    const std::vector<double> p = {1.0, 2.5, 4.0};
    EXPECT_NEAR(mixed_lebesgue_norm(*f, std::span(p).first(d), s), 1.0, 1e-12) << d;
  }
}

TEST(Norms, GaussianMixedClosedForm) {
  QuadratureSpec s;
  const double p[] = {1.0, 2.0};
  const double expect = std::sqrt(2 * std::numbers::pi) * std::pow(std::numbers::pi, 0.25);
  EXPECT_NEAR(mixed_lebesgue_norm(*boundary("gaussian-bump", 2), p, s), expect, 1e-9);
}

TEST(Norms, EqualExponentsReduceToLp) {
  QuadratureSpec s;
  const auto f = boundary("bump", 2, {{"radius", 1.3}});
  const double p[] = {2.5, 2.5};
  QuadratureSpec box = s;
  box.box_radius = 1.3;
  box.panels_per_axis = 128;
  const double direct = std::pow(
      integrate_box([&](std::span<const double> x) { return std::pow(std::abs(f->value(x)), 2.5); }, 2, box),
      1.0 / 2.5);
  EXPECT_NEAR(mixed_lebesgue_norm(*f, p, s) / direct, 1.0, 1e-8);
}

TEST(Norms, HomogeneityAndTriangle) {
  QuadratureSpec s;
  const std::vector<std::shared_ptr<const BoundaryFunction>> fs = {
      boundary("gaussian-bump", 1), boundary("bump", 1), boundary("hat", 1), boundary("indicator", 1)};
  const double p[] = {1.7};
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t j = 0; j < fs.size(); ++j) {
      const double nf = mixed_lebesgue_norm(*fs[i], p, s), ng = mixed_lebesgue_norm(*fs[j], p, s);
      const Combination scaled(fs[i], fs[i], -1.5, -1.0);
      EXPECT_NEAR(mixed_lebesgue_norm(scaled, p, s), 2.5 * nf, 1e-8 * nf);
      const Combination sum(fs[i], fs[j], 1.0, 1.0);
      EXPECT_LE(mixed_lebesgue_norm(sum, p, s), (nf + ng) * (1 + 1e-8));
    }
}

TEST(Norms, WeightedVerticalPowerClosedForm) {
  QuadratureSpec s;
  for (double m : {0.0, 0.5, 2.0})
    for (double alpha : {-0.5, 0.0, 1.0}) {
      const auto u = family_instantiate({"vertical-power", {{"m", m}}, {{"bump", {{"d", 2}}, {}}}});
      const auto cfg = ExponentConfig::make({1.0, 2.0}, 2.0, alpha);
      const double eta = mixed_lebesgue_norm(*boundary("bump", 2), cfg.p, s);
      const double expect = eta * std::pow(1.0 / (m * cfg.q + alpha + 1.0), 1.0 / cfg.q);
      EXPECT_NEAR(weighted_mixed_norm(*u.halfspace, cfg, s) / expect, 1.0, 1e-8) << m << " " << alpha;
    }
}

TEST(Norms, WeightedSeparable) {
  QuadratureSpec s;
  // ramp-cutoff: η(x)(1−y); vertical factor (∫(1−y)^q y^α)^{1/q} from the reference integrator
  const auto u = family_instantiate({"ramp-cutoff", {}, {{"gaussian-bump", {{"d", 1}}, {}}}});
  const auto cfg = ExponentConfig::make({3.0}, 1.5, -0.5);
  const double eta = std::pow(std::sqrt(2 * std::numbers::pi / 3.0), 1.0 / 3.0);
  const double vert =
      std::pow(oracle::ts([](double y) { return std::pow(1 - y, 1.5) * std::pow(y, -0.5); }, 0.0, 1.0), 1.0 / 1.5);
  EXPECT_NEAR(weighted_mixed_norm(*u.halfspace, cfg, s) / (eta * vert), 1.0, 1e-6);
}

TEST(Norms, WeightedRejectsAlphaBelowMinusOne) {
  QuadratureSpec s;
  const auto u = family_instantiate({"log-decay", {}, {{"bump", {{"d", 1}}, {}}}});
  EXPECT_THROW(weighted_mixed_norm(*u.halfspace, ExponentConfig::make({2.0}, 2.0, -1.0), s), DomainError);
}

TEST(Norms, SobolevClosedForm) {
  QuadratureSpec s;
  // u = η(x)·y, p = q = 2: ‖|Du|(·,y)‖² = y²‖η'‖² + ‖η‖², integrated against y^α on (0, 1).
  const auto eta = boundary("bump", 1);
  const auto u = family_instantiate({"vertical-power", {{"m", 1.0}}, {{"bump", {{"d", 1}}, {}}}});
  const auto b = [&](double x) {
    const double xs[1] = {x};
    return eta->value(xs);
  };
  const auto db = [&](double x) {
    const double xs[1] = {x};
    double g[1];
    eta->gradient(xs, g);
    return g[0];
  };
  const double A = oracle::gk([&](double x) { return db(x) * db(x); }, -1, 1);
  const double B = oracle::gk([&](double x) { return b(x) * b(x); }, -1, 1);
  for (double alpha : {0.0, -0.5}) {
    const auto cfg = ExponentConfig::make({2.0}, 2.0, alpha);
    const double value = std::sqrt(B / (3 + alpha));
    const double grad = std::sqrt(A / (3 + alpha) + B / (1 + alpha));
    const double got = sobolev_norm(*u.halfspace, cfg, s);
    EXPECT_NEAR(got / (value + grad), 1.0, 1e-7) << alpha;
    // homogeneity
    const Scaled scaled(u.halfspace, 3.5);
    EXPECT_NEAR(sobolev_norm(scaled, cfg, s) / got, 3.5, 1e-10);
  }
}

TEST(Norms, SobolevNeedsGradient) {
  QuadratureSpec s;
  const auto u = family_instantiate({"ramp-cutoff", {}, {{"indicator", {{"d", 1}}, {}}}});
  EXPECT_THROW(sobolev_norm(*u.halfspace, ExponentConfig::make({2.0}, 2.0, 0.0), s), DomainError);
}

// Finite-difference gradient in place of the analytic one.
TEST(Norms, SobolevMatchesFiniteDifferences) {
  QuadratureSpec s;
  const auto base = family_instantiate({"ramp-cutoff", {}, {{"gaussian-bump", {{"d", 2}}, {}}}}).halfspace;
  class FiniteDiff final : public HalfSpaceFunction {
   public:
    explicit FiniteDiff(std::shared_ptr<const HalfSpaceFunction> u) : u_(std::move(u)) {}
    int dim() const override { return u_->dim(); }
    double value(std::span<const double> x, double y) const override { return u_->value(x, y); }
    bool has_gradient() const override { return true; }
    void gradient(std::span<const double> x, double y, std::span<double> out) const override {
      const double h = 1e-5;
      std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
      for (int a = 0; a < dim(); ++a) {
        xp[a] += h;
        xm[a] -= h;
        out[a] = (u_->value(xp, y) - u_->value(xm, y)) / (2 * h);
        xp[a] = xm[a] = x[a];
      }
      out[dim()] = (u_->value(x, y + h) - u_->value(x, y - h)) / (2 * h);
    }
    Interval support(int axis, double y) const override { return u_->support(axis, y); }
    std::string kind() const override { return "finite-diff"; }

   private:
    std::shared_ptr<const HalfSpaceFunction> u_;
  };
  const FiniteDiff fd(base);
  const auto cfg = ExponentConfig::make({2.0, 3.0}, 2.0, 0.0);
  EXPECT_NEAR(sobolev_norm(fd, cfg, s) / sobolev_norm(*base, cfg, s), 1.0, 1e-4);
}

TEST(Norms, ModulusBasics) {
  QuadratureSpec s;
  const double p1[] = {1.0};
  EXPECT_EQ(modulus(*boundary("constant", 1, {{"value", 0.0}}), 0.5, p1, s), 0.0);
  for (const auto& f : {boundary("hat", 1), boundary("indicator", 1), boundary("gaussian-bump", 1)}) {
    const double norm = mixed_lebesgue_norm(*f, p1, s);
    double prev = 0.0;
    for (double delta : {0.01, 0.05, 0.2, 0.5, 1.0, 4.0}) {
      const double w = modulus(*f, delta, p1, s);
      EXPECT_GE(w + 1e-12, prev) << f->kind() << " " << delta;
      EXPECT_LE(w, 2 * norm * (1 + 1e-10));
      prev = w;
    }
  }
}

TEST(Norms, ModulusOfHatMatchesBruteForce) {
  QuadratureSpec s;
  const auto hat = [](double x) { return std::max(0.0, 1.0 - std::abs(x)); };
  double best = 0.0;
  for (int i = 1; i <= 10000; ++i) {
    const double h = 0.5 * i / 10000.0;
    for (double sign : {-1.0, 1.0}) {
      const double hh = sign * h;
      const double v = oracle::gk([&](double x) { return std::abs(hat(x + hh) - hat(x)); }, -1.5, 1.5,
                                  {-1.0, 0.0, 1.0, -1.0 - hh, -hh, 1.0 - hh}, 1e-10);
      best = std::max(best, v);
    }
  }
  const double p1[] = {1.0};
  EXPECT_NEAR(modulus(*boundary("hat", 1), 0.5, p1, s), best, 1e-8);
}

TEST(Norms, DifferenceNormBoundedByGradient) {
  QuadratureSpec s;
  const auto f = boundary("gaussian-bump", 2);
  const double p[] = {1.0, 2.0};
  const double g = gradient_norm(*f, p, s);
  for (double t : {0.01, 0.1, 0.5}) {
    const double h[] = {t * 0.6, t * 0.8};
    EXPECT_LE(difference_norm(*f, h, p, s), t * g * (1 + 1e-8));
  }
}

TEST(Norms, BesovZeroFunction) {
  QuadratureSpec s;
  const auto zero = boundary("constant", 1, {{"value", 0.0}});
  const auto cfg = ExponentConfig::make({2.0}, 2.0, 0.0);
  for (auto v : {BesovVariant::direct(), BesovVariant::integral(1.0), BesovVariant::dyadic()})
    EXPECT_EQ(besov_norm(zero, cfg, v, s).total(), 0.0);
}

TEST(Norms, BesovIndicatorClosedForm) {
  QuadratureSpec s;
  // ‖Δ_h 1_[0,1]‖_1 = 2 min(|h|, 1): seminorm 4(1/(1−ℓ) + 1/ℓ) = 16 at ℓ = 1/2.
  const auto cfg = ExponentConfig::make({1.0}, 1.0, -0.5);
  const double semi = besov_seminorm_direct(boundary("indicator", 1), cfg, s);
  EXPECT_NEAR(semi / 16.0, 1.0, 0.01);
}

TEST(Norms, BesovDilationCovariance) {
  QuadratureSpec s;
  // f_λ(x) = f(λx): seminorm scales by λ^{ℓ − 1/p}. gaussian scale 1/2 is the λ = 2 dilation.
  const auto cfg = ExponentConfig::make({2.0}, 2.0, 0.0);
  const double ell = smoothness_order(cfg);
  const double a = besov_seminorm_direct(boundary("gaussian-bump", 1), cfg, s);
  const double b = besov_seminorm_direct(boundary("gaussian-bump", 1, {{"scale", 0.5}}), cfg, s);
  EXPECT_NEAR(b / a, std::pow(2.0, ell - 0.5), 1e-3);
}

TEST(Norms, BesovIntegralTailBound) {
  QuadratureSpec s;
  const auto f = boundary("hat", 1);
  const auto cfg = ExponentConfig::make({2.0}, 2.0, 0.0);
  const double ell = smoothness_order(cfg);
  const double lp = mixed_lebesgue_norm(*f, cfg.p, s);
  const double one = besov_norm(f, cfg, BesovVariant::integral(1.0), s).total();
  const double inf = besov_norm(f, cfg, BesovVariant::integral(INFINITY), s).total();
  EXPECT_GE(inf, one);
  // ∫_1^∞ (2‖f‖/t^ℓ)^q dt/t = (2‖f‖)^q/(qℓ)
  EXPECT_LE(inf - one, 2 * lp * std::pow(1.0 / (cfg.q * ell), 1.0 / cfg.q));
}

TEST(Norms, BesovVariantsEquivalentForHat) {
  QuadratureSpec s;
  const auto f = boundary("hat", 1);
  const auto cfg = ExponentConfig::make({2.0}, 2.0, 0.0);
  const double n0 = besov_norm(f, cfg, BesovVariant::direct(), s).total();
  const double n1 = besov_norm(f, cfg, BesovVariant::integral(1.0), s).total();
  const double n2 = besov_norm(f, cfg, BesovVariant::dyadic(), s).total();
  for (double r : {n1 / n0, n0 / n1, n2 / n1, n1 / n2}) {
    EXPECT_LE(r, 50.0);
    EXPECT_GE(r, 1.0 / 50.0);
  }
  const auto fine = s.refined(1);
  const double m1 = besov_norm(f, cfg, BesovVariant::integral(1.0), fine).total();
  EXPECT_NEAR(m1 / n1, 1.0, 0.02);
}
