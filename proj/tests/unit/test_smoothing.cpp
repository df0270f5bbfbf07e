#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <thread>

#include "oracles.hpp"
#include "tracekit/error.hpp"
#include "tracekit/norms.hpp"
#include "tracekit/smoothing.hpp"

using namespace tracekit;

namespace {

std::shared_ptr<const BoundaryFunction> boundary(const std::string& kind, int d,
                                                 std::map<std::string, double> params = {}) {
  if (kind != "hat") params["d"] = d;
  return family_instantiate({kind, params, {}}).boundary;
}

double eval(const BoundaryFunction& f, double x) {
  const double xs[1] = {x};
  return f.value(xs);
}

}  // namespace

TEST(Mollifier, NormalizedInEveryDimension) {
  for (int d : {1, 2, 3}) {
    const Mollifier phi = Mollifier::build(d);
    // ∫φ = c_d |S^{d-1}| ∫_0^1 profile(r) r^{d-1} dr
    const double radial = oracle::gk([&](double r) { return Mollifier::profile(r) * std::pow(r, d - 1); }, 0, 1);
    EXPECT_NEAR(phi.normalization() * sphere_measure(d) * radial, 1.0, 1e-10) << d;
  }
}

TEST(Mollifier, SupportSymmetryAndMoments) {
  const Mollifier phi = Mollifier::build(1);
  const double out[1] = {1.0001}, edge[1] = {-1.0};
  EXPECT_EQ(phi.value(out), 0.0);
  EXPECT_EQ(phi.value(edge), 0.0);
  const auto v = [&](double x) {
    const double xs[1] = {x};
    return phi.value(xs);
  };
  EXPECT_NEAR(oracle::gk(v, -1, 1), 1.0, 1e-10);
  EXPECT_NEAR(oracle::gk([&](double x) { return x * v(x); }, -1, 1), 0.0, 1e-12);

  const Mollifier phi2 = Mollifier::build(2);
  const double a[2] = {0.3, 0.4}, b[2] = {0.5, 0.0}, c[2] = {0.0, -0.5};
  EXPECT_EQ(phi2.value(a), phi2.value(b));
  EXPECT_EQ(phi2.value(b), phi2.value(c));
  const double scaled_arg[2] = {0.15, 0.2};
  EXPECT_NEAR(phi2.scaled(scaled_arg, 0.5), 4.0 * phi2.value(a), 1e-14);
}

TEST(Mollifier, GradientMatchesFiniteDifference) {
  const Mollifier phi = Mollifier::build(2);
  const double z[2] = {0.2, -0.35};
  double g[2];
  phi.gradient(z, g);
  const double h = 1e-6;
  for (int a = 0; a < 2; ++a) {
    double zp[2] = {z[0], z[1]}, zm[2] = {z[0], z[1]};
    zp[a] += h;
    zm[a] -= h;
    EXPECT_NEAR((phi.value(zp) - phi.value(zm)) / (2 * h), g[a], 1e-6);
  }
}

TEST(PartitionOfUnity, SumsToOne) {
  const int K = 16;
  for (int i = 0; i <= 4000; ++i) {
    const double y = std::ldexp(1.0, -K + 2) * std::pow(2.0, (2.0 * K - 4) * i / 4000.0);
    double sum = 0.0;
    for (int k = -K; k <= K; ++k) sum += PartitionOfUnity::psi(k, y);
    ASSERT_NEAR(sum, 1.0, 1e-12) << y;
  }
}

TEST(PartitionOfUnity, SupportContainment) {
  for (int k = -4; k <= 12; ++k) {
    const auto [lo, hi] = PartitionOfUnity::support(k);
    EXPECT_DOUBLE_EQ(lo, 7.0 * std::ldexp(1.0, -(k + 4)));
    EXPECT_DOUBLE_EQ(hi, 9.0 * std::ldexp(1.0, -(k + 3)));
    for (double y : {lo, std::nextafter(lo, 0.0), lo * 0.5, hi, std::nextafter(hi, INFINITY), hi * 2})
      EXPECT_EQ(PartitionOfUnity::psi(k, y), 0.0) << k << " " << y;
    for (double f : {1e-9, 0.5, 1 - 1e-9}) {
      const double y = lo + f * (hi - lo);
      const double v = PartitionOfUnity::psi(k, y);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    // S_k = (2^{-k-1}, 2^{-k}) sits inside the support where ψ_k > 0
    EXPECT_GT(PartitionOfUnity::psi(k, 0.75 * std::ldexp(1.0, -k)), 0.0);
  }
}

TEST(PartitionOfUnity, DerivativeScaling) {
  const PartitionOfUnity pu;
  const double n0 = pu.derivative_bound();
  EXPECT_GT(n0, 0.0);
  for (int k = -4; k <= 12; ++k) {
    const auto [lo, hi] = PartitionOfUnity::support(k);
    double best = 0.0;
    for (int i = 1; i < 20000; ++i) {
      const double y = lo + (hi - lo) * i / 20000.0;
      best = std::max(best, std::abs(PartitionOfUnity::psi_prime(k, y)));
    }
    const double scaled = best * std::ldexp(1.0, -k);
    static double first = scaled;
    EXPECT_NEAR(scaled, first, 1e-9 * first) << k;
    EXPECT_LE(scaled, n0 * (1 + 1e-9));
  }
}

TEST(PartitionOfUnity, ChiDerivativeMatchesFiniteDifference) {
  for (double t : {0.9, 0.95, 1.0, 1.05, 1.1}) {
    const double h = 1e-6;
    EXPECT_NEAR((PartitionOfUnity::chi(t + h) - PartitionOfUnity::chi(t - h)) / (2 * h),
                PartitionOfUnity::chi_prime(t), 1e-6);
  }
  EXPECT_EQ(PartitionOfUnity::chi(7.0 / 8.0), 1.0);
  EXPECT_EQ(PartitionOfUnity::chi(9.0 / 8.0), 0.0);
}

TEST(PartitionOfUnity, PairwiseOverlap) {
  for (int i = 1; i < 5000; ++i) {
    const double y = std::pow(2.0, -14.0 + 14.0 * i / 5000.0);
    int active = 0;
    for (int k = -2; k <= 20; ++k) active += PartitionOfUnity::psi(k, y) != 0.0;
    EXPECT_LE(active, 2) << y;
    EXPECT_GE(active, 1) << y;
  }
}

TEST(Mollify, ReproducesConstants) {
  const QuadratureSpec s;
  for (int d : {1, 2}) {
    const auto g = mollify(boundary("constant", d, {{"value", 2.5}}), 3, s);
    std::vector<double> x(static_cast<std::size_t>(d), 0.3);
    EXPECT_NEAR(g->value(x), 2.5, 1e-12);
  }
}

TEST(Mollify, ReproducesLinearPieces) {
  // the hat is linear on (0, 1); odd moments of φ vanish away from the kinks
  const QuadratureSpec s;
  const auto g = mollify(boundary("hat", 1), 4, s);
  for (double x : {0.2, 0.5, 0.8}) EXPECT_NEAR(eval(*g, x), 1.0 - x, 1e-12);
}

TEST(Mollify, GaussianMatchesDenseConvolution) {
  const QuadratureSpec s;
  const int k = 6;
  const double delta = std::ldexp(1.0, -k);
  const Mollifier phi = Mollifier::build(1);
  const auto g = mollify(boundary("gaussian-bump", 1), k, s);
  for (double x : {-1.3, 0.0, 0.4, 2.0}) {
    const double ref = oracle::gk(
        [&](double z) {
          const double zs[1] = {z};
          return phi.value(zs) * std::exp(-(x - delta * z) * (x - delta * z) / 2);
        },
        -1, 1);
    EXPECT_NEAR(eval(*g, x), ref, 1e-6) << x;
  }
}

TEST(Mollify, GridMatchesPointwise) {
  const QuadratureSpec s;
  const auto f = boundary("bump", 2);
  const Grid grid = f->grid(s, 0.25);
  const auto m = convolve_on_grid(*f, 0.25, grid, Mollifier::build(2), s, true);
  const auto g = mollify(f, 2, s);
  std::vector<double> x(2);
  for (std::size_t i = 0; i < grid.size(); i += 97) {
    grid.point(i, x);
    EXPECT_NEAR(m.values[i], g->value(x), 1e-12);
  }
  ASSERT_EQ(m.grad.size(), 2u);
}

TEST(ConvolutionBounds, ZeroFunction) {
  const double p[] = {2.0};
  const auto [a, b] = convolution_bounds_check(boundary("constant", 1, {{"value", 0.0}}), 0.25, p, QuadratureSpec{},
                                               4.0, 5e-2);
  EXPECT_EQ(a.lhs, 0.0);
  EXPECT_EQ(a.rhs, 0.0);
  EXPECT_EQ(b.lhs, 0.0);
  EXPECT_EQ(a.status, Status::pass);
  EXPECT_EQ(b.status, Status::pass);
}

TEST(ConvolutionBounds, HatAgainstBruteForce) {
  const double delta = 0.25;
  const double p[] = {1.0};
  const auto [a, b] = convolution_bounds_check(boundary("hat", 1), delta, p, QuadratureSpec{}, 4.0, 5e-2);
  const Mollifier phi = Mollifier::build(1);
  const auto hat = [](double x) { return std::max(0.0, 1.0 - std::abs(x)); };
  const auto conv = [&](double x) {
    return oracle::gk(
        [&](double z) {
          const double zs[1] = {z};
          return phi.value(zs) * hat(x - delta * z);
        },
        -1, 1, {(x - 1) / delta, x / delta, (x + 1) / delta}, 1e-12);
  };
  const double lhs =
      oracle::gk([&](double x) { return std::abs(conv(x) - hat(x)); }, -1.25, 1.25, {-1, -0.75, 0, 0.75, 1}, 1e-9);
  double omega = 0.0;
  for (int i = 1; i <= 2000; ++i) {
    const double h = delta * i / 2000.0;
    omega = std::max(omega, oracle::gk([&](double x) { return std::abs(hat(x + h) - hat(x)); }, -1.5, 1.5,
                                       {-1, 0, 1, -1 - h, -h, 1 - h}, 1e-10));
  }
  EXPECT_NEAR(a.lhs / lhs, 1.0, 1e-4);
  EXPECT_NEAR(a.rhs / omega, 1.0, 1e-6);
  EXPECT_LE(a.lhs, a.rhs);
  EXPECT_EQ(a.status, Status::pass);
  EXPECT_EQ(b.status, Status::pass);
}

TEST(ConvolutionBounds, GaussianAcrossScales) {
  const double p[] = {2.0};
  for (int k = 1; k <= 8; ++k) {
    const auto [a, b] =
        convolution_bounds_check(boundary("gaussian-bump", 1), std::ldexp(1.0, -k), p, QuadratureSpec{}, 4.0, 5e-2);
    EXPECT_EQ(a.status, Status::pass) << k;
    EXPECT_EQ(b.status, Status::pass) << k;
    EXPECT_EQ(a.constant, 1.0);
  }
}

TEST(Extension, ConstantIsReproduced) {
  const QuadratureSpec s;
  const auto cfg = ExponentConfig::make({2.0}, 2.0, 0.0);
  const auto e = extend(boundary("constant", 1, {{"value", 1.5}}), cfg, 12, s);
  const double x[1] = {0.2};
  for (double y : {1e-3, 0.01, 0.1, 0.3, 0.43}) EXPECT_NEAR(e->value(x, y), 1.5, 1e-12) << y;
}

TEST(Extension, VerticalSupport) {
  const QuadratureSpec s;
  const auto cfg = ExponentConfig::make({2.0}, 2.0, 0.0);
  const auto e = extend(boundary("gaussian-bump", 1), cfg, 12, s);
  const double x[1] = {0.0};
  EXPECT_EQ(e->value(x, 0.9), 0.0);
  EXPECT_EQ(e->value(x, 9.0 / 16.0), 0.0);
  EXPECT_TRUE(e->terms(0.6).empty());
  for (double y : {1e-4, 0.01, 0.2, 0.5}) {
    const auto t = e->terms(y);
    EXPECT_LE(t.size(), 2u) << y;
  }
}

TEST(Extension, SliceCloseToSource) {
  const QuadratureSpec s;
  const auto cfg = ExponentConfig::make({1.0}, 2.0, 0.0);
  const auto g = boundary("hat", 1);
  const auto e = extend(g, cfg, 12, s);
  const double dev = extension_deviation(*e, std::ldexp(1.0, -5), cfg.p, s);
  EXPECT_LE(dev, modulus(*g, std::ldexp(1.0, -4), cfg.p, s));
}

TEST(Extension, LimitProfileLipschitz) {
  const QuadratureSpec s;
  const auto cfg = ExponentConfig::make({2.0}, 2.0, 0.0);
  for (const auto& g : {boundary("hat", 1), boundary("bump", 1), boundary("gaussian-bump", 1)}) {
    const auto e = extend(g, cfg, 12, s);
    const auto L = extension_limit_profile(*e, cfg, 4, 9, s);
    ASSERT_EQ(L.size(), 6u);
    for (std::size_t i = 1; i < L.size(); ++i) EXPECT_LT(L[i], L[i - 1]) << g->kind();
    EXPECT_LT(L.back(), 0.2 * L.front()) << g->kind();
  }
}

TEST(Extension, LimitProfileConstantAndIndicator) {
  const QuadratureSpec s;
  const auto cfg = ExponentConfig::make({1.0}, 1.0, -0.5);
  const auto c = extend(boundary("constant", 1, {{"value", 1.0}}), cfg, 12, s);
  for (double v : extension_limit_profile(*c, cfg, 4, 9, s)) EXPECT_LE(v, 1e-8);
  const auto ind = extend(boundary("indicator", 1), cfg, 12, s);
  const auto L = extension_limit_profile(*ind, cfg, 4, 9, s);
  for (double v : L) {
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_LE(v, 2.0 * L.front());
  }
}

TEST(Extension, Preconditions) {
  const QuadratureSpec s;
  const auto g = boundary("hat", 1);
  EXPECT_THROW(extend(g, ExponentConfig::make({2.0}, 2.0, 0.0), 2, s), DomainError);
  EXPECT_THROW(extend(g, ExponentConfig::make({2.0}, 2.0, 1.0), 12, s), DomainError);
  EXPECT_THROW(extend(g, ExponentConfig::make({2.0}, 2.0, -1.0), 12, s), DomainError);
  const auto cfg = ExponentConfig::make({2.0}, 2.0, 0.0);
  const auto e = extend(g, cfg, 12, s);
  EXPECT_THROW(extension_limit_profile(*e, cfg, 2, 9, s), DomainError);
  EXPECT_THROW(extension_limit_profile(*e, cfg, 4, 11, s), DomainError);
}

TEST(Extension, ConcurrentEvaluationIsDeterministic) {
  const QuadratureSpec s;
  const auto g = boundary("bump", 2);
  const ExtensionHandle a(g, 12, s);
  const ExtensionHandle b(g, 12, s);
  const std::vector<double> ys = {0.3, 0.1, 0.04, 0.01, 0.003};
  const std::vector<double> p = {1.0, 2.0};
  std::vector<double> seq;
  for (double y : ys) seq.push_back(extension_deviation(a, y, p, s));
  std::vector<double> par(ys.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < ys.size(); ++i)
    pool.emplace_back([&, i] { par[i] = extension_deviation(b, ys[i], p, s); });
  for (auto& t : pool) t.join();
  EXPECT_EQ(seq, par);
  EXPECT_GT(b.cache_size(), 0u);
}

TEST(Trace, ClosedFormRestrictions) {
  const auto ramp = family_instantiate({"ramp-cutoff", {}, {{"gaussian-bump", {{"d", 1}}, {}}}});
  const auto g = trace_restrict(*ramp.halfspace);
  for (double x : {-1.0, 0.0, 0.7}) EXPECT_DOUBLE_EQ(eval(*g, x), std::exp(-x * x / 2));
  const auto vp = family_instantiate({"vertical-power", {{"m", 0.5}}, {{"bump", {{"d", 1}}, {}}}});
  const auto z = trace_restrict(*vp.halfspace);
  EXPECT_EQ(eval(*z, 0.0), 0.0);
  const QuadratureSpec s;
  const ExtensionHandle e(boundary("hat", 1), 12, s);
  EXPECT_THROW(trace_restrict(e), DomainError);
}

TEST(Trace, ExtensionApproachesSourceNearBoundary) {
  const QuadratureSpec s;
  const auto g = boundary("gaussian-bump", 1);
  const ExtensionHandle e(g, 12, s);
  // the smallest active scale is 2^{-12}; deviation there is mollification error at that scale
  const double p[] = {2.0};
  EXPECT_LE(extension_deviation(e, std::ldexp(1.0, -13), p, s), 1e-5);
}
