#include "tracekit/functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <set>

#include "tracekit/error.hpp"

namespace tracekit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using BoundaryPtr = std::shared_ptr<const BoundaryFunction>;

void require_dim(int d) {
  if (d < 1 || d > 3) throw DomainError("dimension d must lie in {1, 2, 3}");
}

class Gaussian final : public BoundaryFunction {
 public:
  Gaussian(int d, double scale) : d_(d), scale_(scale) {}
  int dim() const override { return d_; }
  double value(std::span<const double> x) const override {
    double r2 = 0.0;
    for (int a = 0; a < d_; ++a) r2 += x[a] * x[a];
    return std::exp(-r2 / (2.0 * scale_ * scale_));
  }
  bool has_gradient() const override { return true; }
  void gradient(std::span<const double> x, std::span<double> out) const override {
    const double v = value(x);
    for (int a = 0; a < d_; ++a) out[a] = -x[a] / (scale_ * scale_) * v;
  }
  std::vector<BoundaryPtr> factors() const override {
    if (d_ == 1) return {};
    std::vector<BoundaryPtr> f;
    for (int a = 0; a < d_; ++a) f.push_back(std::make_shared<Gaussian>(1, scale_));
    return f;
  }
  bool axis_symmetric() const override { return true; }
  std::string kind() const override { return "gaussian-bump"; }

 private:
  int d_;
  double scale_;
};

class Bump final : public BoundaryFunction {
 public:
  Bump(int d, double radius) : d_(d), radius_(radius) {}
  int dim() const override { return d_; }
  double value(std::span<const double> x) const override {
    const double rho2 = radius2(x);
    if (rho2 >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - rho2));
  }
  bool has_gradient() const override { return true; }
  void gradient(std::span<const double> x, std::span<double> out) const override {
    const double rho2 = radius2(x);
    if (rho2 >= 1.0) {
      for (int a = 0; a < d_; ++a) out[a] = 0.0;
      return;
    }
    const double v = std::exp(1.0 - 1.0 / (1.0 - rho2));
    const double s = 1.0 - rho2;
    for (int a = 0; a < d_; ++a) out[a] = -v * 2.0 * x[a] / (radius_ * radius_ * s * s);
  }
  Interval support(int) const override { return {-radius_, radius_}; }
  bool axis_symmetric() const override { return true; }
  std::string kind() const override { return "bump"; }

 private:
  double radius2(std::span<const double> x) const {
    double r2 = 0.0;
    for (int a = 0; a < d_; ++a) r2 += x[a] * x[a];
    return r2 / (radius_ * radius_);
  }
  int d_;
  double radius_;
};

class Hat final : public BoundaryFunction {
 public:
  explicit Hat(double scale) : scale_(scale) {}
  int dim() const override { return 1; }
  double value(std::span<const double> x) const override {
    return std::max(0.0, 1.0 - std::abs(x[0]) / scale_);
  }
  bool has_gradient() const override { return true; }
  void gradient(std::span<const double> x, std::span<double> out) const override {
    const double t = x[0];
    if (std::abs(t) >= scale_ || t == 0.0) {
      out[0] = 0.0;
    } else {
      out[0] = (t > 0.0 ? -1.0 : 1.0) / scale_;
    }
  }
  Interval support(int) const override { return {-scale_, scale_}; }
  std::vector<double> breakpoints(int) const override { return {-scale_, 0.0, scale_}; }
  double besov_ceiling(std::span<const double> p) const override { return 1.0 + 1.0 / p[0]; }
  bool axis_symmetric() const override { return true; }
  std::string kind() const override { return "hat"; }

 private:
  double scale_;
};

class Indicator final : public BoundaryFunction {
 public:
  explicit Indicator(int d) : d_(d) {}
  int dim() const override { return d_; }
  double value(std::span<const double> x) const override {
    for (int a = 0; a < d_; ++a) {
      if (x[a] < 0.0 || x[a] > 1.0) return 0.0;
    }
    return 1.0;
  }
  Interval support(int) const override { return {0.0, 1.0}; }
  std::vector<double> breakpoints(int) const override { return {0.0, 1.0}; }
  std::vector<BoundaryPtr> factors() const override {
    if (d_ == 1) return {};
    std::vector<BoundaryPtr> f;
    for (int a = 0; a < d_; ++a) f.push_back(std::make_shared<Indicator>(1));
    return f;
  }
  double besov_ceiling(std::span<const double> p) const override {
    double c = kInf;
    for (int a = 0; a < d_; ++a) c = std::min(c, 1.0 / p[a]);
    return c;
  }
  std::string kind() const override { return "indicator"; }

 private:
  int d_;
};

class Constant final : public BoundaryFunction {
 public:
  Constant(int d, double v) : d_(d), v_(v) {}
  int dim() const override { return d_; }
  double value(std::span<const double>) const override { return v_; }
  bool has_gradient() const override { return true; }
  void gradient(std::span<const double>, std::span<double> out) const override {
    for (int a = 0; a < d_; ++a) out[a] = 0.0;
  }
  bool axis_symmetric() const override { return true; }
  std::string kind() const override { return "constant"; }

 private:
  int d_;
  double v_;
};

class Tensor final : public BoundaryFunction {
 public:
  explicit Tensor(std::vector<BoundaryPtr> f) : factors_(std::move(f)) {}
  int dim() const override { return static_cast<int>(factors_.size()); }
  double value(std::span<const double> x) const override {
    double v = 1.0;
    for (std::size_t a = 0; a < factors_.size(); ++a) v *= factors_[a]->value(x.subspan(a, 1));
    return v;
  }
  bool has_gradient() const override {
    return std::all_of(factors_.begin(), factors_.end(),
                       [](const BoundaryPtr& f) { return f->has_gradient(); });
  }
  void gradient(std::span<const double> x, std::span<double> out) const override {
    const std::size_t d = factors_.size();
    std::vector<double> vals(d);
    std::vector<double> ders(d);
    for (std::size_t a = 0; a < d; ++a) {
      vals[a] = factors_[a]->value(x.subspan(a, 1));
      factors_[a]->gradient(x.subspan(a, 1), std::span<double>(&ders[a], 1));
    }
    for (std::size_t a = 0; a < d; ++a) {
      double g = ders[a];
      for (std::size_t b = 0; b < d; ++b) {
        if (b != a) g *= vals[b];
      }
      out[a] = g;
    }
  }
  Interval support(int axis) const override { return factors_[static_cast<std::size_t>(axis)]->support(0); }
  std::vector<double> breakpoints(int axis) const override {
    return factors_[static_cast<std::size_t>(axis)]->breakpoints(0);
  }
  std::vector<BoundaryPtr> factors() const override { return factors_; }
  double besov_ceiling(std::span<const double> p) const override {
    double c = kInf;
    for (std::size_t a = 0; a < factors_.size(); ++a) {
      c = std::min(c, factors_[a]->besov_ceiling(p.subspan(a, 1)));
    }
    return c;
  }
  bool axis_symmetric() const override {
    return std::all_of(factors_.begin(), factors_.end(),
                       [](const BoundaryPtr& f) { return f->axis_symmetric(); });
  }
  std::string kind() const override { return "tensor"; }

 private:
  std::vector<BoundaryPtr> factors_;
};

// u(x, y) = η(x) h(y) for y < 1 and 0 beyond.
class ProductHalfSpace : public HalfSpaceFunction {
 public:
  explicit ProductHalfSpace(BoundaryPtr eta) : eta_(std::move(eta)) {}
  int dim() const override { return eta_->dim(); }
  bool has_gradient() const override { return eta_->has_gradient(); }
  Interval support(int axis, double) const override { return eta_->support(axis); }
  std::vector<double> breakpoints(int axis, double) const override { return eta_->breakpoints(axis); }

  double value(std::span<const double> x, double y) const override {
    if (y >= 1.0) return 0.0;
    return eta_->value(x) * factor(y);
  }

  void gradient(std::span<const double> x, double y, std::span<double> out) const override {
    const int d = dim();
    if (y >= 1.0) {
      std::fill(out.begin(), out.begin() + d + 1, 0.0);
      return;
    }
    eta_->gradient(x, out.first(static_cast<std::size_t>(d)));
    const double h = factor(y);
    for (int a = 0; a < d; ++a) out[a] *= h;
    out[d] = eta_->value(x) * factor_derivative(y);
  }

  void slice(double y, const Grid& grid, std::span<double> values,
             std::span<double> grad_norm) const override {
    const bool want_grad = !grad_norm.empty();
    const auto tables = profile_tables(grid, want_grad);
    const double h = y >= 1.0 ? 0.0 : factor(y);
    const double dh = y >= 1.0 ? 0.0 : factor_derivative(y);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      values[i] = tables->eta[i] * h;
      if (want_grad) {
        const double gx = tables->grad[i] * h;
        const double gy = tables->eta[i] * dh;
        grad_norm[i] = std::sqrt(gx * gx + gy * gy);
      }
    }
  }

 protected:
  virtual double factor(double y) const = 0;
  virtual double factor_derivative(double y) const = 0;

  BoundaryPtr eta_;

 private:
  struct Tables {
    std::vector<double> eta;
    std::vector<double> grad;
  };

  std::shared_ptr<const Tables> profile_tables(const Grid& grid, bool want_grad) const {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(grid.fingerprint());
    if (it != cache_.end() && (!want_grad || !it->second->grad.empty())) return it->second;
    auto t = std::make_shared<Tables>();
    const int d = dim();
    std::vector<double> x(static_cast<std::size_t>(d));
    std::vector<double> g(static_cast<std::size_t>(d));
    t->eta.resize(grid.size());
    if (want_grad) t->grad.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      grid.point(i, x);
      t->eta[i] = eta_->value(x);
      if (want_grad) {
        eta_->gradient(x, g);
        double s = 0.0;
        for (double c : g) s += c * c;
        t->grad[i] = std::sqrt(s);
      }
    }
    if (cache_.size() > 8) cache_.clear();
    cache_[grid.fingerprint()] = t;
    return t;
  }

  mutable std::mutex mutex_;
  mutable std::map<std::uint64_t, std::shared_ptr<const Tables>> cache_;
};

class VerticalPower final : public ProductHalfSpace {
 public:
  VerticalPower(BoundaryPtr eta, double m) : ProductHalfSpace(std::move(eta)), m_(m) {}
  std::shared_ptr<const BoundaryFunction> trace() const override {
    if (m_ == 0.0) return eta_;
    return std::make_shared<Constant>(dim(), 0.0);
  }
  std::string kind() const override { return "vertical-power"; }

 protected:
  double factor(double y) const override { return m_ == 0.0 ? 1.0 : std::pow(y, m_); }
  double factor_derivative(double y) const override {
    return m_ == 0.0 ? 0.0 : m_ * std::pow(y, m_ - 1.0);
  }

 private:
  double m_;
};

class LogDecay final : public ProductHalfSpace {
 public:
  using ProductHalfSpace::ProductHalfSpace;
  std::shared_ptr<const BoundaryFunction> trace() const override {
    return std::make_shared<Constant>(dim(), 0.0);
  }
  std::string kind() const override { return "log-decay"; }

 protected:
  double factor(double y) const override { return 1.0 / (1.0 - std::log2(y)); }
  double factor_derivative(double y) const override {
    const double denom = 1.0 - std::log2(y);
    return 1.0 / (y * std::numbers::ln2 * denom * denom);
  }
};

class RampCutoff final : public ProductHalfSpace {
 public:
  using ProductHalfSpace::ProductHalfSpace;
  std::shared_ptr<const BoundaryFunction> trace() const override { return eta_; }
  std::string kind() const override { return "ramp-cutoff"; }

 protected:
  double factor(double y) const override { return 1.0 - y; }
  double factor_derivative(double) const override { return -1.0; }
};

void check_params(const FamilySpec& spec, std::initializer_list<const char*> allowed) {
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [k, v] : spec.params) {
    if (!keys.contains(k)) throw DomainError("family '" + spec.kind + "': unknown parameter '" + k + "'");
    if (!std::isfinite(v)) throw DomainError("family '" + spec.kind + "': parameter '" + k + "' must be finite");
  }
}

int dim_param(const FamilySpec& spec) {
  const double d = spec.param("d", 1.0);
  if (d != std::floor(d)) throw DomainError("family '" + spec.kind + "': d must be an integer");
  require_dim(static_cast<int>(d));
  return static_cast<int>(d);
}

BoundaryPtr instantiate_boundary(const FamilySpec& spec);

BoundaryPtr profile_of(const FamilySpec& spec) {
  if (spec.children.size() > 1) throw DomainError("family '" + spec.kind + "' takes a single profile child");
  if (spec.children.empty()) return make_bump(dim_param(spec), 1.0);
  if (spec.params.contains("d")) throw DomainError("family '" + spec.kind + "': d is implied by the profile");
  return instantiate_boundary(spec.children.front());
}

BoundaryPtr instantiate_boundary(const FamilySpec& spec) {
  const std::string& k = spec.kind;
  if (k == "gaussian-bump") {
    check_params(spec, {"d", "scale"});
    return make_gaussian(dim_param(spec), spec.param("scale", 1.0));
  }
  if (k == "bump") {
    check_params(spec, {"d", "radius"});
    return make_bump(dim_param(spec), spec.param("radius", 1.0));
  }
  if (k == "hat") {
    check_params(spec, {"d", "scale"});
    if (dim_param(spec) != 1) throw DomainError("family 'hat' is one-dimensional (d=1)");
    return make_hat(spec.param("scale", 1.0));
  }
  if (k == "indicator") {
    check_params(spec, {"d"});
    return make_indicator(dim_param(spec));
  }
  if (k == "constant") {
    check_params(spec, {"d", "value"});
    return make_constant(dim_param(spec), spec.param("value", 0.0));
  }
  if (k == "tensor") {
    check_params(spec, {});
    std::vector<BoundaryPtr> factors;
    for (const auto& c : spec.children) factors.push_back(instantiate_boundary(c));
    return make_tensor(std::move(factors));
  }
  throw DomainError("unknown boundary family '" + k + "'");
}

}  // namespace

void BoundaryFunction::gradient(std::span<const double>, std::span<double>) const {
  throw DomainError("family '" + kind() + "' has no gradient");
}

Interval BoundaryFunction::support(int) const { return {}; }

std::vector<double> BoundaryFunction::breakpoints(int) const { return {}; }

double BoundaryFunction::besov_ceiling(std::span<const double>) const { return kInf; }

double BoundaryFunction::support_radius() const {
  double r = 0.0;
  for (int a = 0; a < dim(); ++a) {
    const Interval s = support(a);
    r = std::max({r, std::abs(s.lo), std::abs(s.hi)});
  }
  return r;
}

void HalfSpaceFunction::gradient(std::span<const double>, double, std::span<double>) const {
  throw DomainError("family '" + kind() + "' has no gradient");
}

Interval HalfSpaceFunction::support(int, double) const { return {}; }

std::vector<double> HalfSpaceFunction::breakpoints(int, double) const { return {}; }

Grid BoundaryFunction::grid(const QuadratureSpec& spec, double pad) const {
  std::vector<Rule1D> rules;
  for (int a = 0; a < dim(); ++a) rules.push_back(axis_rule(support(a), breakpoints(a), spec, pad));
  return Grid(std::move(rules));
}

Grid HalfSpaceFunction::slice_grid(double y, const QuadratureSpec& spec) const {
  std::vector<Rule1D> rules;
  for (int a = 0; a < dim(); ++a) rules.push_back(axis_rule(support(a, y), breakpoints(a, y), spec));
  return Grid(std::move(rules));
}

void HalfSpaceFunction::slice(double y, const Grid& grid, std::span<double> values,
                              std::span<double> grad_norm) const {
  const int d = dim();
  std::vector<double> x(static_cast<std::size_t>(d));
  std::vector<double> g(static_cast<std::size_t>(d) + 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.point(i, x);
    values[i] = value(x, y);
    if (!grad_norm.empty()) {
      gradient(x, y, g);
      double s = 0.0;
      for (double c : g) s += c * c;
      grad_norm[i] = std::sqrt(s);
    }
  }
}

double FamilySpec::param(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

int FunctionHandle::dim() const { return boundary ? boundary->dim() : halfspace->dim(); }

bool FunctionHandle::has_gradient() const {
  return boundary ? boundary->has_gradient() : halfspace->has_gradient();
}

double FunctionHandle::support_radius() const {
  if (boundary) return boundary->support_radius();
  double r = 0.0;
  for (int a = 0; a < halfspace->dim(); ++a) {
    const Interval s = halfspace->support(a, 0.0);
    r = std::max({r, std::abs(s.lo), std::abs(s.hi)});
  }
  return r;
}

std::vector<std::string> registered_kinds() {
  return {"gaussian-bump", "bump",           "hat",       "indicator",  "constant",
          "tensor",        "vertical-power", "log-decay", "ramp-cutoff"};
}

FunctionHandle family_instantiate(const FamilySpec& spec) {
  FunctionHandle h;
  h.spec = spec;
  const std::string& k = spec.kind;
  if (k == "vertical-power") {
    check_params(spec, {"d", "m"});
    const double m = spec.param("m", 1.0);
    if (m < 0.0) throw DomainError("family 'vertical-power': m must be >= 0");
    h.domain = DomainTag::halfspace;
    h.halfspace = make_vertical_power(profile_of(spec), m);
    return h;
  }
  if (k == "log-decay") {
    check_params(spec, {"d"});
    h.domain = DomainTag::halfspace;
    h.halfspace = make_log_decay(profile_of(spec));
    return h;
  }
  if (k == "ramp-cutoff") {
    check_params(spec, {"d"});
    h.domain = DomainTag::halfspace;
    h.halfspace = make_ramp_cutoff(profile_of(spec));
    return h;
  }
  h.domain = DomainTag::boundary;
  h.boundary = instantiate_boundary(spec);
  return h;
}

std::shared_ptr<const BoundaryFunction> make_gaussian(int d, double scale) {
  require_dim(d);
  if (!(scale > 0.0)) throw DomainError("gaussian-bump: scale must be positive");
  return std::make_shared<Gaussian>(d, scale);
}

std::shared_ptr<const BoundaryFunction> make_bump(int d, double radius) {
  require_dim(d);
  if (!(radius > 0.0)) throw DomainError("bump: radius must be positive");
  return std::make_shared<Bump>(d, radius);
}

std::shared_ptr<const BoundaryFunction> make_hat(double scale) {
  if (!(scale > 0.0)) throw DomainError("hat: scale must be positive");
  return std::make_shared<Hat>(scale);
}

std::shared_ptr<const BoundaryFunction> make_indicator(int d) {
  require_dim(d);
  return std::make_shared<Indicator>(d);
}

std::shared_ptr<const BoundaryFunction> make_constant(int d, double value) {
  require_dim(d);
  return std::make_shared<Constant>(d, value);
}

std::shared_ptr<const BoundaryFunction> make_tensor(std::vector<BoundaryPtr> factors) {
  require_dim(static_cast<int>(factors.size()));
  for (const auto& f : factors) {
    if (!f || f->dim() != 1) throw DomainError("tensor: every factor must be one-dimensional");
  }
  return std::make_shared<Tensor>(std::move(factors));
}

std::shared_ptr<const HalfSpaceFunction> make_vertical_power(BoundaryPtr eta, double m) {
  if (!eta) throw DomainError("vertical-power: missing profile");
  if (!(m >= 0.0)) throw DomainError("vertical-power: m must be >= 0");
  return std::make_shared<VerticalPower>(std::move(eta), m);
}

std::shared_ptr<const HalfSpaceFunction> make_log_decay(BoundaryPtr eta) {
  if (!eta) throw DomainError("log-decay: missing profile");
  return std::make_shared<LogDecay>(std::move(eta));
}

std::shared_ptr<const HalfSpaceFunction> make_ramp_cutoff(BoundaryPtr eta) {
  if (!eta) throw DomainError("ramp-cutoff: missing profile");
  return std::make_shared<RampCutoff>(std::move(eta));
}

}  // namespace tracekit
