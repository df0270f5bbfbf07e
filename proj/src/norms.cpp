#include "tracekit/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tracekit/error.hpp"

namespace tracekit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double abs_pow(double v, double p) {
  const double a = std::abs(v);
  if (p == 1.0) return a;
  if (p == 2.0) return a * a;
  if (p == 3.0) return a * a * a;
  return std::pow(a, p);
}

inline double root(double s, double p) {
  if (p == 1.0) return s;
  if (p == 2.0) return std::sqrt(s);
  return std::pow(s, 1.0 / p);
}

void check_exponents(std::span<const double> p, int d) {
  if (static_cast<int>(p.size()) != d) throw DomainError("p vector length must equal the dimension");
  for (double pi : p) {
    if (!std::isfinite(pi) || pi < 1.0) throw DomainError("every p_i must lie in [1, inf)");
  }
}

Rule1D shifted_axis_rule(const BoundaryFunction& f, int axis, double h, const QuadratureSpec& spec) {
  const Interval s = f.support(axis);
  const double lo = std::max(s.lo, -spec.box_radius);
  const double hi = std::min(s.hi, spec.box_radius);
  if (!(hi > lo)) return {};
  std::vector<double> splits;
  for (double b : f.breakpoints(axis)) {
    splits.push_back(b);
    splits.push_back(b - h);
  }
  const double width = (hi - lo) / spec.panels_per_axis;
  if (h == 0.0) return composite_rule(lo, hi, spec.panels_per_axis, spec.points_per_panel, splits);
  return union_rule({{lo, hi}, {lo - h, hi - h}}, width, spec.points_per_panel, splits);
}

double nested_norm(const Grid& grid, std::vector<double> cur, std::span<const double> p) {
  for (std::size_t a = 0; a < grid.axes.size(); ++a) {
    const Rule1D& rule = grid.axes[a];
    const std::size_t n = rule.size();
    const std::size_t m = cur.size() / n;
    const double pa = p[a];
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      const double* row = cur.data() + j * n;
      for (std::size_t i = 0; i < n; ++i) s += rule.weights[i] * abs_pow(row[i], pa);
      cur[j] = root(s, pa);
    }
    cur.resize(m);
  }
  const double out = cur.empty() ? 0.0 : cur.front();
  if (!std::isfinite(out)) throw NumericError("mixed norm: non-finite value");
  return out;
}

// Head contribution ∫_0^{r0} (c r^s)^q r^{-ℓq-1} dr fitted through v0 = value
// at r0 and v1 = value at 2 r0.
double power_head(double v0, double v1, double r0, double ell, double q, bool& divergent) {
  if (v0 <= 0.0) return 0.0;
  const double s = std::log2(v1 / v0);
  if (!(s > ell + 1e-9)) {
    divergent = true;
    return kInf;
  }
  return std::pow(v0, q) * std::pow(r0, -ell * q) / (q * (s - ell));
}

// Earlier direction equal to ±ξ, or to ξ with coordinate signs flipped when f
// is axis-symmetric; returns j itself when there is none.
std::size_t mirror_of(const DirectionSet& dirs, std::size_t j, bool symmetric) {
  const int anti = dirs.antipode[j];
  if (anti >= 0 && static_cast<std::size_t>(anti) < j) return static_cast<std::size_t>(anti);
  if (!symmetric) return j;
  const auto xi = dirs.direction(j);
  for (std::size_t k = 0; k < j; ++k) {
    const auto other = dirs.direction(k);
    bool same = true;
    for (int a = 0; a < dirs.d && same; ++a) same = std::abs(std::abs(other[a]) - std::abs(xi[a])) < 1e-12;
    if (same) return k;
  }
  return j;
}

// Radius beyond which ‖Δ_{rξ} f‖ no longer depends on r: the shifted support
// is disjoint from the support along the last axis with ξ_a ≠ 0. +∞ when that
// support is unbounded.
double separation_radius(const BoundaryFunction& f, std::span<const double> xi, const QuadratureSpec& spec) {
  for (int a = f.dim() - 1; a >= 0; --a) {
    if (std::abs(xi[a]) < 1e-12) continue;
    const Interval s = f.support(a);
    if (!std::isfinite(s.lo) || !std::isfinite(s.hi)) return kInf;
    const double lo = std::max(s.lo, -spec.box_radius);
    const double hi = std::min(s.hi, spec.box_radius);
    return (hi - lo) / std::abs(xi[a]) * (1.0 + 1e-9);
  }
  return kInf;
}

}  // namespace

double mixed_norm_on_grid(const Grid& grid, std::span<const double> values, std::span<const double> p) {
  if (grid.size() == 0) return 0.0;
  if (values.size() != grid.size()) throw DomainError("mixed norm: value count does not match the grid");
  return nested_norm(grid, std::vector<double>(values.begin(), values.end()), p);
}

double mixed_lebesgue_norm(const BoundaryFunction& f, std::span<const double> p, const QuadratureSpec& spec) {
  spec.validate();
  check_exponents(p, f.dim());
  const Grid grid = f.grid(spec);
  std::vector<double> values(grid.size());
  std::vector<double> x(static_cast<std::size_t>(f.dim()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.point(i, x);
    values[i] = f.value(x);
  }
  return mixed_norm_on_grid(grid, values, p);
}

double gradient_norm(const BoundaryFunction& f, std::span<const double> p, const QuadratureSpec& spec) {
  spec.validate();
  check_exponents(p, f.dim());
  if (!f.has_gradient()) throw DomainError("family '" + f.kind() + "' has no gradient");
  const Grid grid = f.grid(spec);
  std::vector<double> values(grid.size());
  std::vector<double> x(static_cast<std::size_t>(f.dim()));
  std::vector<double> g(static_cast<std::size_t>(f.dim()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.point(i, x);
    f.gradient(x, g);
    double s = 0.0;
    for (double c : g) s += c * c;
    values[i] = std::sqrt(s);
  }
  return mixed_norm_on_grid(grid, values, p);
}

double difference_norm(const BoundaryFunction& f, std::span<const double> h, std::span<const double> p,
                       const QuadratureSpec& spec) {
  const int d = f.dim();
  check_exponents(p, d);
  if (std::all_of(h.begin(), h.begin() + d, [](double c) { return c == 0.0; })) return 0.0;
  std::vector<Rule1D> rules;
  for (int a = 0; a < d; ++a) rules.push_back(shifted_axis_rule(f, a, h[a], spec));
  const Grid grid(std::move(rules));
  if (grid.size() == 0) return 0.0;
  std::vector<double> values(grid.size());

  auto factors = f.factors();
  if (!factors.empty()) {
    std::vector<std::vector<double>> shifted(static_cast<std::size_t>(d));
    std::vector<std::vector<double>> plain(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
      const auto& nodes = grid.axes[static_cast<std::size_t>(a)].nodes;
      for (double t : nodes) {
        const double ts = t + h[a];
        shifted[static_cast<std::size_t>(a)].push_back(factors[static_cast<std::size_t>(a)]->value({&ts, 1}));
        plain[static_cast<std::size_t>(a)].push_back(factors[static_cast<std::size_t>(a)]->value({&t, 1}));
      }
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double vs = 1.0;
      double vp = 1.0;
      std::size_t rest = i;
      for (int a = 0; a < d; ++a) {
        const std::size_t n = grid.axes[static_cast<std::size_t>(a)].size();
        vs *= shifted[static_cast<std::size_t>(a)][rest % n];
        vp *= plain[static_cast<std::size_t>(a)][rest % n];
        rest /= n;
      }
      values[i] = vs - vp;
    }
  } else {
    std::vector<double> x(static_cast<std::size_t>(d));
    std::vector<double> xs(static_cast<std::size_t>(d));
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    for (int a = 0; a < d; ++a) x[a] = grid.axes[static_cast<std::size_t>(a)].nodes[0];
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (int a = 0; a < d; ++a) xs[a] = x[a] + h[a];
      values[i] = f.value(xs) - f.value(x);
      for (std::size_t a = 0; a < idx.size(); ++a) {
        const auto& nodes = grid.axes[a].nodes;
        if (++idx[a] < nodes.size()) {
          x[a] = nodes[idx[a]];
          break;
        }
        idx[a] = 0;
        x[a] = nodes[0];
      }
    }
  }
  return nested_norm(grid, std::move(values), p);
}

double slice_norm(const HalfSpaceFunction& u, double y, std::span<const double> p, const QuadratureSpec& spec) {
  check_exponents(p, u.dim());
  const Grid grid = u.slice_grid(y, spec);
  std::vector<double> values(grid.size());
  u.slice(y, grid, values, {});
  return mixed_norm_on_grid(grid, values, p);
}

WeightedNorms weighted_norms(const HalfSpaceFunction& u, const ExponentConfig& cfg, const QuadratureSpec& spec,
                             bool with_gradient) {
  cfg.validate();
  spec.validate();
  if (cfg.d != u.dim()) throw DomainError("configuration dimension does not match the function");
  if (with_gradient && !u.has_gradient()) throw DomainError("family '" + u.kind() + "' has no gradient");
  const double cap = std::min(spec.vertical_cap, u.vertical_extent());
  const auto breaks = u.vertical_breakpoints();
  const Rule1D rule = weighted_vertical_rule(cfg.alpha, cap, spec, breaks);
  double sv = 0.0;
  double sg = 0.0;
  std::vector<double> values;
  std::vector<double> grads;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double y = rule.nodes[k];
    const Grid grid = u.slice_grid(y, spec);
    values.assign(grid.size(), 0.0);
    grads.assign(with_gradient ? grid.size() : 0, 0.0);
    u.slice(y, grid, values, grads);
    sv += rule.weights[k] * std::pow(mixed_norm_on_grid(grid, values, cfg.p), cfg.q);
    if (with_gradient) sg += rule.weights[k] * std::pow(mixed_norm_on_grid(grid, grads, cfg.p), cfg.q);
  }
  WeightedNorms out;
  out.value = std::pow(sv, 1.0 / cfg.q);
  out.gradient = std::pow(sg, 1.0 / cfg.q);
  if (!std::isfinite(out.value) || !std::isfinite(out.gradient)) {
    throw NumericError("weighted norm: non-finite value");
  }
  return out;
}

double weighted_mixed_norm(const HalfSpaceFunction& u, const ExponentConfig& cfg, const QuadratureSpec& spec) {
  return weighted_norms(u, cfg, spec, false).value;
}

double sobolev_norm(const HalfSpaceFunction& u, const ExponentConfig& cfg, const QuadratureSpec& spec) {
  const WeightedNorms n = weighted_norms(u, cfg, spec, true);
  return n.value + n.gradient;
}

double modulus(const BoundaryFunction& f, double delta, std::span<const double> p, const QuadratureSpec& spec,
               int radii) {
  spec.validate();
  if (!(delta > 0.0)) throw DomainError("modulus needs delta > 0");
  if (radii < 1) throw DomainError("modulus needs at least one radius");
  const int d = f.dim();
  const DirectionSet dirs = DirectionSet::make(d, spec.direction_count(d), spec.seed);
  double best = 0.0;
  std::vector<double> h(static_cast<std::size_t>(d));
  for (std::size_t j = 0; j < dirs.size(); ++j) {
    if (dirs.antipode[j] >= 0 && static_cast<std::size_t>(dirs.antipode[j]) < j) continue;
    const auto xi = dirs.direction(j);
    for (int m = 0; m < radii; ++m) {
      const double r = delta * std::exp2(-0.5 * m);
      for (int a = 0; a < d; ++a) h[a] = r * xi[a];
      best = std::max(best, difference_norm(f, h, p, spec));
    }
  }
  return best;
}

std::shared_ptr<const DifferenceProfile> DifferenceProfile::build(std::shared_ptr<const BoundaryFunction> f,
                                                                  std::vector<double> p,
                                                                  const QuadratureSpec& spec) {
  spec.validate();
  if (!f) throw DomainError("difference profile: missing function");
  check_exponents(p, f->dim());
  auto prof = std::shared_ptr<DifferenceProfile>(new DifferenceProfile());
  const int d = f->dim();
  prof->f_ = std::move(f);
  prof->p_ = std::move(p);
  prof->spec_ = spec;
  prof->dirs_ = DirectionSet::make(d, spec.direction_count(d), spec.seed);
  prof->lo_exp_ = -std::max(spec.radial_octaves, kDyadicDepth);
  prof->hi_exp_ = spec.radial_octaves;
  const int ppo = d == 1 ? 2 * spec.points_per_panel : spec.points_per_panel;
  const Rule1D& gl = gauss_legendre(ppo);
  for (int e = prof->lo_exp_; e < prof->hi_exp_; ++e) {
    const double a = std::ldexp(1.0, e);
    prof->radii_.push_back(a);
    prof->weights_.push_back(0.0);
    for (std::size_t i = 0; i < gl.size(); ++i) {
      prof->radii_.push_back(a + 0.5 * a * (gl.nodes[i] + 1.0));
      prof->weights_.push_back(0.5 * a * gl.weights[i]);
    }
  }
  prof->radii_.push_back(std::ldexp(1.0, prof->hi_exp_));
  prof->weights_.push_back(0.0);

  const std::size_t nr = prof->radii_.size();
  const std::size_t nd = prof->dirs_.size();
  prof->n_.assign(nd * nr, 0.0);
  std::vector<double> h(static_cast<std::size_t>(d));
  const bool symmetric = prof->f_->axis_symmetric();
  for (std::size_t j = 0; j < nd; ++j) {
    const auto xi = prof->dirs_.direction(j);
    const std::size_t twin = mirror_of(prof->dirs_, j, symmetric);
    if (twin < j) {
      std::copy_n(prof->n_.begin() + static_cast<std::ptrdiff_t>(twin * nr), nr,
                  prof->n_.begin() + static_cast<std::ptrdiff_t>(j * nr));
      continue;
    }
    const double settle = separation_radius(*prof->f_, xi, spec);
    double settled = -1.0;
    for (std::size_t i = 0; i < nr; ++i) {
      if (settled >= 0.0) {
        prof->n_[j * nr + i] = settled;
        continue;
      }
      for (int a = 0; a < d; ++a) h[a] = prof->radii_[i] * xi[a];
      const double v = difference_norm(*prof->f_, h, prof->p_, spec);
      prof->n_[j * nr + i] = v;
      if (prof->radii_[i] > settle) settled = v;
    }
  }
  prof->omega_run_.assign(nr, 0.0);
  double run = 0.0;
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = 0; j < nd; ++j) run = std::max(run, prof->n_[j * nr + i]);
    prof->omega_run_[i] = run;
  }
  return prof;
}

std::vector<double> DifferenceProfile::sample_all(double r) const {
  const int d = f_->dim();
  std::vector<double> out(dirs_.size(), 0.0);
  std::vector<double> h(static_cast<std::size_t>(d));
  for (std::size_t j = 0; j < dirs_.size(); ++j) {
    const int anti = dirs_.antipode[j];
    if (anti >= 0 && static_cast<std::size_t>(anti) < j) {
      out[j] = out[static_cast<std::size_t>(anti)];
      continue;
    }
    const auto xi = dirs_.direction(j);
    for (int a = 0; a < d; ++a) h[a] = r * xi[a];
    out[j] = difference_norm(*f_, h, p_, spec_);
  }
  return out;
}

double DifferenceProfile::omega(double t) const {
  if (!(t > 0.0)) return 0.0;
  const auto it = std::upper_bound(radii_.begin(), radii_.end(), t);
  double best = 0.0;
  if (it != radii_.begin()) {
    const std::size_t idx = static_cast<std::size_t>(it - radii_.begin()) - 1;
    best = omega_run_[idx];
    if (radii_[idx] == t) return best;
  }
  for (double v : sample_all(t)) best = std::max(best, v);
  return best;
}

SeminormResult DifferenceProfile::direct(double ell, double q) const {
  if (!(ell > 0.0 && ell < 1.0)) throw DomainError("smoothness order must lie in (0, 1)");
  SeminormResult res;
  const std::size_t nr = radii_.size();
  const std::size_t second = static_cast<std::size_t>(
      std::find(radii_.begin(), radii_.end(), 2.0 * radii_.front()) - radii_.begin());
  const double r0 = radii_.front();
  const double rmax = radii_.back();
  double total = 0.0;
  for (std::size_t j = 0; j < dirs_.size(); ++j) {
    const double* n = n_.data() + j * nr;
    double body = 0.0;
    for (std::size_t i = 0; i < nr; ++i) {
      if (weights_[i] == 0.0) continue;
      body += weights_[i] * std::pow(n[i], q) * std::pow(radii_[i], -ell * q - 1.0);
    }
    const double head = power_head(n[0], n[second], r0, ell, q, res.divergent);
    const double tail = std::pow(n[nr - 1], q) * std::pow(rmax, -ell * q) / (ell * q);
    res.head += dirs_.weight[j] * head;
    res.tail += dirs_.weight[j] * tail;
    total += dirs_.weight[j] * (body + head + tail);
  }
  res.value = res.divergent ? kInf : std::pow(total, 1.0 / q);
  return res;
}

SeminormResult DifferenceProfile::integral(double ell, double q, double a) const {
  if (!(ell > 0.0 && ell < 1.0)) throw DomainError("smoothness order must lie in (0, 1)");
  const double r0 = radii_.front();
  const double rmax = radii_.back();
  if (!(a > 2.0 * r0)) throw DomainError("integral variant needs a > 2^-" + std::to_string(-lo_exp_ + 1));
  SeminormResult res;
  const std::size_t second = static_cast<std::size_t>(
      std::find(radii_.begin(), radii_.end(), 2.0 * r0) - radii_.begin());
  res.head = power_head(omega_run_[0], omega_run_[second], r0, ell, q, res.divergent);
  const double upper = std::min(a, rmax);
  const double top = std::ldexp(1.0, static_cast<int>(std::floor(std::log2(upper))));
  double body = 0.0;
  for (std::size_t i = 0; i < radii_.size() && radii_[i] <= top; ++i) {
    if (weights_[i] == 0.0) continue;
    body += weights_[i] * std::pow(omega_run_[i], q) * std::pow(radii_[i], -ell * q - 1.0);
  }
  if (upper > top) {
    const int ppo = f_->dim() == 1 ? 2 * spec_.points_per_panel : spec_.points_per_panel;
    const Rule1D part = composite_rule(top, upper, 1, ppo);
    for (std::size_t i = 0; i < part.size(); ++i) {
      body += part.weights[i] * std::pow(omega(part.nodes[i]), q) * std::pow(part.nodes[i], -ell * q - 1.0);
    }
  }
  if (a > rmax) {
    const double w = omega_run_.back();
    const double far = std::isinf(a) ? 0.0 : std::pow(a, -ell * q);
    res.tail = std::pow(w, q) * (std::pow(rmax, -ell * q) - far) / (ell * q);
  }
  res.value = res.divergent ? kInf : std::pow(res.head + body + res.tail, 1.0 / q);
  return res;
}

SeminormResult DifferenceProfile::dyadic(double ell, double q, double lipschitz) const {
  if (!(ell > 0.0 && ell < 1.0)) throw DomainError("smoothness order must lie in (0, 1)");
  SeminormResult res;
  double sum = 0.0;
  for (int k = 1; k <= kDyadicDepth; ++k) {
    sum += std::pow(std::exp2(k * ell) * omega(std::ldexp(1.0, -k)), q);
  }
  if (std::isfinite(lipschitz)) {
    const double x = std::exp2(-(1.0 - ell) * q);
    res.tail = std::pow(lipschitz, q) * std::pow(x, kDyadicDepth + 1) / (1.0 - x);
  } else {
    res.tail = kInf;
  }
  res.value = std::pow(sum, 1.0 / q);
  return res;
}

double besov_seminorm_direct(std::shared_ptr<const BoundaryFunction> f, const ExponentConfig& cfg,
                             const QuadratureSpec& spec) {
  const double ell = smoothness_order(cfg);
  return DifferenceProfile::build(std::move(f), cfg.p, spec)->direct(ell, cfg.q).value;
}

BesovNorm besov_norm(const DifferenceProfile& profile, const BoundaryFunction& f, const ExponentConfig& cfg,
                     BesovVariant variant, const QuadratureSpec& spec) {
  cfg.validate();
  const double ell = smoothness_order(cfg);
  BesovNorm out;
  out.lp = mixed_lebesgue_norm(f, cfg.p, spec);
  switch (variant.tag) {
    case BesovVariant::Tag::direct:
      out.seminorm = profile.direct(ell, cfg.q);
      break;
    case BesovVariant::Tag::integral:
      if (!(variant.a > 0.0)) throw DomainError("integral variant needs a > 0");
      out.seminorm = profile.integral(ell, cfg.q, variant.a);
      break;
    case BesovVariant::Tag::dyadic: {
      const double lip = f.has_gradient() ? gradient_norm(f, cfg.p, spec) : kInf;
      out.seminorm = profile.dyadic(ell, cfg.q, lip);
      break;
    }
  }
  return out;
}

BesovNorm besov_norm(std::shared_ptr<const BoundaryFunction> f, const ExponentConfig& cfg, BesovVariant variant,
                     const QuadratureSpec& spec) {
  cfg.validate();
  if (!f || f->dim() != cfg.d) throw DomainError("configuration dimension does not match the function");
  const auto profile = DifferenceProfile::build(f, cfg.p, spec);
  return besov_norm(*profile, *f, cfg, variant, spec);
}

}  // namespace tracekit
