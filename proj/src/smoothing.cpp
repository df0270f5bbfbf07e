#include "tracekit/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tracekit/error.hpp"
#include "tracekit/norms.hpp"

namespace tracekit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double step_b(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

int stencil_panels(int d, const QuadratureSpec& spec) {
  const int base = d == 1 ? 16 : (d == 2 ? 4 : 2);
  return base * std::max(1, spec.panels_per_axis / 32);
}

struct AxisStencil {
  std::vector<Rule1D> rules;              ///< rules[0] is the uncut stencil
  std::vector<std::size_t> rule_of_node;  ///< per grid node
  std::vector<std::vector<double>> g;     ///< factor samples per grid node (separable case)
  std::vector<std::vector<double>> dg;    ///< factor derivative samples, when requested
};

AxisStencil axis_stencil(const Rule1D& base, const Rule1D& nodes, std::span<const double> breaks, double delta,
                         int panels, int points, const BoundaryFunction* factor, bool derivs) {
  AxisStencil st;
  st.rules.push_back(base);
  std::vector<double> splits;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double x = nodes.nodes[i];
    splits.clear();
    for (double b : breaks) {
      const double z = (x - b) / delta;
      if (z > -1.0 && z < 1.0) splits.push_back(z);
    }
    if (splits.empty()) {
      st.rule_of_node.push_back(0);
    } else {
      st.rule_of_node.push_back(st.rules.size());
      st.rules.push_back(composite_rule(-1.0, 1.0, panels, points, splits));
    }
    if (factor) {
      const Rule1D& r = st.rules[st.rule_of_node.back()];
      std::vector<double> vals(r.size());
      std::vector<double> dvals(derivs ? r.size() : 0);
      for (std::size_t j = 0; j < r.size(); ++j) {
        const double t = x - delta * r.nodes[j];
        vals[j] = factor->value({&t, 1});
        if (derivs) factor->gradient({&t, 1}, {&dvals[j], 1});
      }
      st.g.push_back(std::move(vals));
      st.dg.push_back(std::move(dvals));
    }
  }
  return st;
}

class MollifiedFunction final : public BoundaryFunction {
 public:
  MollifiedFunction(std::shared_ptr<const BoundaryFunction> g, int k, const QuadratureSpec& spec)
      : g_(std::move(g)), delta_(std::ldexp(1.0, -k)), spec_(spec), phi_(Mollifier::build(g_->dim())) {}
  int dim() const override { return g_->dim(); }
  double value(std::span<const double> x) const override { return at(x, false).values[0]; }
  bool has_gradient() const override { return true; }
  void gradient(std::span<const double> x, std::span<double> out) const override {
    const Mollified m = at(x, true);
    for (int a = 0; a < dim(); ++a) out[a] = m.grad[static_cast<std::size_t>(a)][0];
  }
  Interval support(int axis) const override {
    const Interval s = g_->support(axis);
    return {s.lo - delta_, s.hi + delta_};
  }
  std::string kind() const override { return "mollified"; }

 private:
  Mollified at(std::span<const double> x, bool with_gradient) const {
    std::vector<Rule1D> rules;
    for (int a = 0; a < dim(); ++a) rules.push_back(Rule1D{{x[a]}, {1.0}});
    return convolve_on_grid(*g_, delta_, Grid(std::move(rules)), phi_, spec_, with_gradient);
  }

  std::shared_ptr<const BoundaryFunction> g_;
  double delta_;
  QuadratureSpec spec_;
  Mollifier phi_;
};

std::vector<double> layered_breaks(const BoundaryFunction& g, int axis, std::span<const double> scales) {
  std::vector<double> out;
  for (double b : g.breakpoints(axis)) {
    out.push_back(b);
    for (double s : scales) {
      for (int j = -2; j <= 2; ++j) {
        if (j != 0) out.push_back(b + j * 0.5 * s);
      }
    }
  }
  return out;
}

std::vector<double> grid_values(const BoundaryFunction& g, const Grid& grid) {
  std::vector<double> out(grid.size());
  std::vector<double> x(static_cast<std::size_t>(g.dim()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.point(i, x);
    out[i] = g.value(x);
  }
  return out;
}

}  // namespace

Mollifier Mollifier::build(int d) {
  if (d < 1 || d > 3) throw DomainError("dimension d must lie in {1, 2, 3}");
  Mollifier m;
  m.d_ = d;
  const Rule1D r = composite_rule(0.0, 1.0, 64, 16);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * profile(r.nodes[i]) * std::pow(r.nodes[i], d - 1);
  m.c_ = 1.0 / (sphere_measure(d) * s);
  return m;
}

double Mollifier::profile(double r) {
  if (!(r < 1.0)) return 0.0;
  return std::exp(-1.0 / (1.0 - r * r));
}

double Mollifier::value(std::span<const double> z) const {
  double r2 = 0.0;
  for (int a = 0; a < d_; ++a) r2 += z[a] * z[a];
  if (!(r2 < 1.0)) return 0.0;
  return c_ * std::exp(-1.0 / (1.0 - r2));
}

void Mollifier::gradient(std::span<const double> z, std::span<double> out) const {
  double r2 = 0.0;
  for (int a = 0; a < d_; ++a) r2 += z[a] * z[a];
  if (!(r2 < 1.0)) {
    for (int a = 0; a < d_; ++a) out[a] = 0.0;
    return;
  }
  const double s = 1.0 - r2;
  const double v = c_ * std::exp(-1.0 / s);
  for (int a = 0; a < d_; ++a) out[a] = -2.0 * z[a] * v / (s * s);
}

double Mollifier::scaled(std::span<const double> x, double delta) const {
  std::vector<double> z(static_cast<std::size_t>(d_));
  for (int a = 0; a < d_; ++a) z[a] = x[a] / delta;
  return value(z) / std::pow(delta, d_);
}

PartitionOfUnity::PartitionOfUnity() {
  const int n = 20000;
  double best = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = kLower + (kUpper - kLower) * i / n;
    best = std::max(best, std::abs(chi_prime(t)));
  }
  n0_ = 2.0 * best;
}

double PartitionOfUnity::chi(double t) {
  if (t <= kLower) return 1.0;
  if (t >= kUpper) return 0.0;
  const double bu = step_b((kUpper - t) / kWidth);
  const double bv = step_b((t - kLower) / kWidth);
  return bu / (bu + bv);
}

double PartitionOfUnity::chi_prime(double t) {
  if (t <= kLower || t >= kUpper) return 0.0;
  const double u = (kUpper - t) / kWidth;
  const double v = (t - kLower) / kWidth;
  const double bu = step_b(u);
  const double bv = step_b(v);
  const double s = bu + bv;
  const double du = bu / (u * u);
  const double dv = bv / (v * v);
  return -(du * bv + bu * dv) / (kWidth * s * s);
}

double PartitionOfUnity::psi(int k, double y) { return chi(std::ldexp(y, k)) - chi(std::ldexp(y, k + 1)); }

double PartitionOfUnity::psi_prime(int k, double y) {
  return std::ldexp(chi_prime(std::ldexp(y, k)), k) - std::ldexp(chi_prime(std::ldexp(y, k + 1)), k + 1);
}

std::pair<double, double> PartitionOfUnity::support(int k) {
  return {7.0 * std::ldexp(1.0, -(k + 4)), 9.0 * std::ldexp(1.0, -(k + 3))};
}

Mollified convolve_on_grid(const BoundaryFunction& g, double delta, const Grid& grid, const Mollifier& phi,
                           const QuadratureSpec& spec, bool with_gradient) {
  if (!(delta > 0.0)) throw DomainError("mollification scale must be positive");
  const int d = g.dim();
  const auto du = static_cast<std::size_t>(d);
  if (grid.dim() != d || phi.dim() != d) throw DomainError("mollification: dimension mismatch");
  const int panels = stencil_panels(d, spec);
  const Rule1D base = composite_rule(-1.0, 1.0, panels, spec.points_per_panel);
  auto factors = g.factors();
  if (d == 1) factors = {nullptr};
  const bool separable = !factors.empty();
  // With ∇g available the gradient is φ_δ∗∇g; otherwise (∇φ_δ)∗g.
  const bool grad_of_g = with_gradient && g.has_gradient();
  const bool grad_of_phi = with_gradient && !grad_of_g;

  std::vector<AxisStencil> axes;
  for (int a = 0; a < d; ++a) {
    const BoundaryFunction* factor = nullptr;
    if (separable) factor = d == 1 ? &g : factors[static_cast<std::size_t>(a)].get();
    axes.push_back(axis_stencil(base, grid.axes[static_cast<std::size_t>(a)], g.breakpoints(a), delta, panels,
                                spec.points_per_panel, factor, grad_of_g));
  }

  // Weighted φ and ∇φ on the uncut stencil.
  const std::size_t m = base.size();
  std::size_t full = 1;
  for (int a = 0; a < d; ++a) full *= m;
  std::vector<double> phi_tab(full);
  std::vector<double> dphi_tab(grad_of_phi ? full * du : 0);
  {
    std::vector<double> z(du);
    std::vector<double> gz(du);
    for (std::size_t t = 0; t < full; ++t) {
      std::size_t rest = t;
      double w = 1.0;
      for (int a = 0; a < d; ++a) {
        z[a] = base.nodes[rest % m];
        w *= base.weights[rest % m];
        rest /= m;
      }
      phi_tab[t] = w * phi.value(z);
      if (grad_of_phi) {
        phi.gradient(z, gz);
        for (std::size_t a = 0; a < du; ++a) dphi_tab[t * du + a] = w * gz[a];
      }
    }
  }

  Mollified out;
  out.values.assign(grid.size(), 0.0);
  if (with_gradient) out.grad.assign(du, std::vector<double>(grid.size(), 0.0));

  std::vector<std::size_t> idx(du, 0);
  std::vector<const Rule1D*> rules(du);
  std::vector<const std::vector<double>*> gvals(du);
  std::vector<const std::vector<double>*> dgvals(du);
  std::vector<double> x(du);
  std::vector<double> xs(du);
  std::vector<double> z(du);
  std::vector<double> gz(du);
  std::vector<double> dg(du);
  std::vector<double> t1(du);
  std::vector<double> tg(du);
  std::vector<std::size_t> sub(du);

  for (std::size_t i = 0; i < grid.size(); ++i) {
    bool uncut = true;
    std::size_t count = 1;
    for (int a = 0; a < d; ++a) {
      const auto& st = axes[static_cast<std::size_t>(a)];
      const std::size_t ri = st.rule_of_node[idx[a]];
      uncut = uncut && ri == 0;
      rules[a] = &st.rules[ri];
      if (separable) {
        gvals[a] = &st.g[idx[a]];
        if (grad_of_g) dgvals[a] = &st.dg[idx[a]];
      }
      x[a] = grid.axes[static_cast<std::size_t>(a)].nodes[idx[a]];
      count *= rules[a]->size();
    }
    double s1 = 0.0;
    double sg = 0.0;
    std::fill(t1.begin(), t1.end(), 0.0);
    std::fill(tg.begin(), tg.end(), 0.0);
    std::fill(sub.begin(), sub.end(), 0);
    for (std::size_t t = 0; t < count; ++t) {
      double wphi;
      bool inside;
      if (uncut) {
        wphi = phi_tab[t];
        inside = wphi != 0.0;
      } else {
        double w = 1.0;
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) {
          z[a] = rules[a]->nodes[sub[a]];
          w *= rules[a]->weights[sub[a]];
          r2 += z[a] * z[a];
        }
        inside = r2 < 1.0;
        wphi = 0.0;
        if (inside) {
          const double s = 1.0 - r2;
          wphi = w * phi.normalization() * std::exp(-1.0 / s);
          if (grad_of_phi) {
            for (int a = 0; a < d; ++a) gz[a] = -2.0 * z[a] * wphi / (s * s);
          }
        }
      }
      if (inside) {
        double gv;
        if (separable) {
          gv = 1.0;
          for (int a = 0; a < d; ++a) gv *= (*gvals[a])[sub[a]];
          if (grad_of_g) {
            for (int a = 0; a < d; ++a) {
              double v = (*dgvals[a])[sub[a]];
              for (int b = 0; b < d; ++b) {
                if (b != a) v *= (*gvals[b])[sub[b]];
              }
              dg[a] = v;
            }
          }
        } else {
          for (int a = 0; a < d; ++a) xs[a] = x[a] - delta * rules[a]->nodes[sub[a]];
          gv = g.value(xs);
          if (grad_of_g) g.gradient(xs, dg);
        }
        s1 += wphi;
        sg += wphi * gv;
        if (grad_of_g) {
          for (int a = 0; a < d; ++a) tg[a] += wphi * dg[a];
        } else if (grad_of_phi) {
          for (int a = 0; a < d; ++a) {
            const double dw = uncut ? dphi_tab[t * du + static_cast<std::size_t>(a)] : gz[a];
            t1[a] += dw;
            tg[a] += dw * gv;
          }
        }
      }
      for (int a = 0; a < d; ++a) {
        if (++sub[a] < rules[a]->size()) break;
        sub[a] = 0;
      }
    }
    const double av = sg / s1;
    out.values[i] = av;
    for (int a = 0; a < d && with_gradient; ++a) {
      out.grad[static_cast<std::size_t>(a)][i] = grad_of_g ? tg[a] / s1 : (tg[a] - av * t1[a]) / (delta * s1);
    }
    for (int a = 0; a < d; ++a) {
      if (++idx[a] < grid.axes[static_cast<std::size_t>(a)].size()) break;
      idx[a] = 0;
    }
  }
  return out;
}

std::shared_ptr<const BoundaryFunction> mollify(std::shared_ptr<const BoundaryFunction> g, int k,
                                                const QuadratureSpec& spec) {
  if (!g) throw DomainError("mollify: missing function");
  if (k < 0) throw DomainError("mollify needs k >= 0");
  return std::make_shared<MollifiedFunction>(std::move(g), k, spec);
}

std::pair<ComparisonReport, ComparisonReport> convolution_bounds_check(
    std::shared_ptr<const BoundaryFunction> f, double delta, std::span<const double> p,
    const QuadratureSpec& spec, double ceiling, double tol) {
  spec.validate();
  if (!(delta > 0.0)) throw DomainError("convolution check needs delta > 0");
  const int d = f->dim();
  const Mollifier phi = Mollifier::build(d);
  std::vector<Rule1D> rules;
  const double scales[] = {delta};
  for (int a = 0; a < d; ++a) {
    rules.push_back(axis_rule(f->support(a), layered_breaks(*f, a, scales), spec, delta));
  }
  const Grid grid(std::move(rules));
  const Mollified m = convolve_on_grid(*f, delta, grid, phi, spec, true);
  std::vector<double> diff = grid_values(*f, grid);
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = m.values[i] - diff[i];
  const double lhs1 = mixed_norm_on_grid(grid, diff, p);
  double lhs2 = 0.0;
  for (int a = 0; a < d; ++a) {
    lhs2 = std::max(lhs2, delta * mixed_norm_on_grid(grid, m.grad[static_cast<std::size_t>(a)], p));
  }
  const double omega = modulus(*f, delta, p, spec, 16);
  const double omega_dense = modulus(*f, delta, p, spec, 64);

  nlohmann::json common;
  common["delta"] = delta;
  common["p"] = std::vector<double>(p.begin(), p.end());
  common["omega_dense"] = omega_dense;
  common["omega_dense_drift"] = omega > 0.0 ? std::abs(omega_dense - omega) / omega : 0.0;
  common["quadrature"] = to_json(spec);

  ComparisonReport first;
  first.check_id = "convolution/approximation";
  first.params = common;
  first.lhs = lhs1;
  first.rhs = omega;
  first.constant = 1.0;
  first.decide(tol);

  ComparisonReport second;
  second.check_id = "convolution/derivative";
  second.params = common;
  second.lhs = lhs2;
  second.rhs = omega;
  second.constant = ceiling;
  second.decide(tol);
  return {first, second};
}

ExtensionHandle::ExtensionHandle(std::shared_ptr<const BoundaryFunction> g, int k_max, const QuadratureSpec& spec)
    : g_(std::move(g)), k_max_(k_max), spec_(spec), phi_(Mollifier::build(g_ ? g_->dim() : 1)) {
  if (!g_) throw DomainError("extend: missing function");
  if (k_max < 3) throw DomainError("k_max must be >= 3");
  spec.validate();
}

std::vector<ExtensionHandle::Term> ExtensionHandle::terms(double y) const {
  std::vector<Term> out;
  if (!(y > 0.0) || y >= vertical_extent()) return out;
  for (int k = 1; k <= k_max_; ++k) {
    double c;
    double dc;
    if (k < k_max_) {
      c = PartitionOfUnity::psi(k, y);
      dc = PartitionOfUnity::psi_prime(k, y);
    } else {
      c = PartitionOfUnity::chi(std::ldexp(y, k));
      dc = std::ldexp(PartitionOfUnity::chi_prime(std::ldexp(y, k)), k);
    }
    if (c != 0.0 || dc != 0.0) out.push_back({k, c, dc});
  }
  return out;
}

int ExtensionHandle::grid_level(double y) const {
  const auto t = terms(y);
  return t.empty() ? 0 : t.back().k;
}

double ExtensionHandle::value(std::span<const double> x, double y) const {
  double v = 0.0;
  for (const auto& t : terms(y)) v += t.c * mollify(g_, t.k, spec_)->value(x);
  return v;
}

void ExtensionHandle::gradient(std::span<const double> x, double y, std::span<double> out) const {
  const int d = dim();
  std::fill(out.begin(), out.begin() + d + 1, 0.0);
  std::vector<double> gx(static_cast<std::size_t>(d));
  for (const auto& t : terms(y)) {
    const auto a = mollify(g_, t.k, spec_);
    a->gradient(x, gx);
    for (int i = 0; i < d; ++i) out[i] += t.c * gx[i];
    out[d] += t.dc * a->value(x);
  }
}

Interval ExtensionHandle::support(int axis, double) const {
  const Interval s = g_->support(axis);
  return {s.lo - 0.5, s.hi + 0.5};
}

std::vector<double> ExtensionHandle::breakpoints(int axis, double y) const {
  const int m = grid_level(y);
  std::vector<double> scales;
  for (int k = std::max(1, m - 1); k <= m && m > 0; ++k) scales.push_back(std::ldexp(1.0, -k));
  return layered_breaks(*g_, axis, scales);
}

std::vector<double> ExtensionHandle::vertical_breakpoints() const {
  std::vector<double> out;
  for (int k = 1; k <= k_max_; ++k) {
    out.push_back(PartitionOfUnity::kLower * std::ldexp(1.0, -k));
    if (k > 1) out.push_back(PartitionOfUnity::kUpper * std::ldexp(1.0, -k));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Grid ExtensionHandle::slice_grid(double y, const QuadratureSpec& spec) const {
  const int m = grid_level(y);
  const double pad = m == 0 ? 0.0 : std::min(0.5, std::ldexp(1.0, -(m - 1)));
  std::vector<Rule1D> rules;
  for (int a = 0; a < dim(); ++a) rules.push_back(axis_rule(g_->support(a), breakpoints(a, y), spec, pad));
  return Grid(std::move(rules));
}

std::shared_ptr<const Mollified> ExtensionHandle::averaged(int k, const Grid& grid, bool) const {
  const auto key = std::make_pair(k, grid.fingerprint());
  std::lock_guard lock(mutex_);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  auto m = std::make_shared<const Mollified>(convolve_on_grid(*g_, std::ldexp(1.0, -k), grid, phi_, spec_, true));
  cache_.emplace(key, m);
  return m;
}

std::size_t ExtensionHandle::cache_size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

void ExtensionHandle::slice(double y, const Grid& grid, std::span<double> values,
                            std::span<double> grad_norm) const {
  const int d = dim();
  const bool want_grad = !grad_norm.empty();
  std::fill(values.begin(), values.end(), 0.0);
  std::vector<std::vector<double>> gx(want_grad ? static_cast<std::size_t>(d) : 0,
                                      std::vector<double>(grid.size(), 0.0));
  std::vector<double> gy(want_grad ? grid.size() : 0, 0.0);
  for (const auto& t : terms(y)) {
    const auto m = averaged(t.k, grid, want_grad);
    for (std::size_t i = 0; i < grid.size(); ++i) values[i] += t.c * m->values[i];
    if (want_grad) {
      for (int a = 0; a < d; ++a) {
        const auto& src = m->grad[static_cast<std::size_t>(a)];
        auto& dst = gx[static_cast<std::size_t>(a)];
        for (std::size_t i = 0; i < grid.size(); ++i) dst[i] += t.c * src[i];
      }
      for (std::size_t i = 0; i < grid.size(); ++i) gy[i] += t.dc * m->values[i];
    }
  }
  if (want_grad) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double s = gy[i] * gy[i];
      for (int a = 0; a < d; ++a) s += gx[static_cast<std::size_t>(a)][i] * gx[static_cast<std::size_t>(a)][i];
      grad_norm[i] = std::sqrt(s);
    }
  }
}

std::shared_ptr<const ExtensionHandle> extend(std::shared_ptr<const BoundaryFunction> g, const ExponentConfig& cfg,
                                              int k_max, const QuadratureSpec& spec) {
  cfg.validate();
  smoothness_order(cfg);
  if (!g || g->dim() != cfg.d) throw DomainError("configuration dimension does not match the function");
  return std::make_shared<const ExtensionHandle>(std::move(g), k_max, spec);
}

double extension_deviation(const ExtensionHandle& e, double y, std::span<const double> p,
                           const QuadratureSpec& spec) {
  const Grid grid = e.slice_grid(y, spec);
  std::vector<double> values(grid.size());
  e.slice(y, grid, values, {});
  const auto g = grid_values(e.source(), grid);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= g[i];
  return mixed_norm_on_grid(grid, values, p);
}

std::vector<double> extension_limit_profile(const ExtensionHandle& e, const ExponentConfig& cfg, int s_lo,
                                            int s_hi, const QuadratureSpec& spec) {
  const double ell = smoothness_order(cfg);
  if (s_lo < 3 || s_hi > e.k_max() - 2 || s_lo > s_hi) {
    throw DomainError("s range must lie within {3, ..., k_max - 2}");
  }
  std::vector<double> out;
  for (int s = s_lo; s <= s_hi; ++s) {
    out.push_back(std::exp2(s * ell) * extension_deviation(e, std::ldexp(1.0, -s), cfg.p, spec));
  }
  return out;
}

std::shared_ptr<const BoundaryFunction> trace_restrict(const HalfSpaceFunction& u) {
  auto t = u.trace();
  if (!t) {
    throw DomainError("family '" + u.kind() +
                      "' has no closed-form boundary restriction; use the extension limit profile");
  }
  return t;
}

}  // namespace tracekit
