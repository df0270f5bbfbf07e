#include "tracekit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "tracekit/error.hpp"
#include "tracekit/hardy.hpp"
#include "tracekit/norms.hpp"
#include "tracekit/smoothing.hpp"

namespace tracekit {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct KindName {
  CheckKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {CheckKind::hardy, "hardy"},
    {CheckKind::hardy_polar, "hardy-polar"},
    {CheckKind::convolution, "convolution"},
    {CheckKind::besov_equivalence, "besov-equivalence"},
    {CheckKind::lp_trace, "lp-trace"},
    {CheckKind::besov_trace, "besov-trace"},
    {CheckKind::extension_bound, "extension-bound"},
    {CheckKind::extension_limit, "extension-limit"},
    {CheckKind::vanishing_trace, "vanishing-trace"},
};

// Process-wide caches shared by concurrent instances. Values are computed
// outside the lock; a duplicate computation yields identical data.
template <class T>
class SharedCache {
 public:
  template <class Make>
  std::shared_ptr<const T> get(const std::string& key, Make make) {
    {
      std::lock_guard lock(mutex_);
      auto it = map_.find(key);
      if (it != map_.end()) return it->second;
    }
    std::shared_ptr<const T> value = make();
    std::lock_guard lock(mutex_);
    return map_.emplace(key, std::move(value)).first->second;
  }

 private:
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const T>> map_;
};

SharedCache<FunctionHandle>& handle_cache() {
  static SharedCache<FunctionHandle> c;
  return c;
}
SharedCache<DifferenceProfile>& profile_cache() {
  static SharedCache<DifferenceProfile> c;
  return c;
}
SharedCache<ExtensionHandle>& extension_cache() {
  static SharedCache<ExtensionHandle> c;
  return c;
}

std::shared_ptr<const FunctionHandle> handle_of(const FamilySpec& fam) {
  return handle_cache().get(to_json(fam).dump(),
                            [&] { return std::make_shared<const FunctionHandle>(family_instantiate(fam)); });
}

std::shared_ptr<const BoundaryFunction> boundary_of(const FamilySpec& fam) {
  auto h = handle_of(fam);
  if (!h->boundary) throw DomainError("family '" + fam.kind + "' is not a boundary function");
  return h->boundary;
}

std::shared_ptr<const HalfSpaceFunction> halfspace_of(const FamilySpec& fam) {
  auto h = handle_of(fam);
  if (!h->halfspace) throw DomainError("family '" + fam.kind + "' is not a half-space function");
  return h->halfspace;
}

std::shared_ptr<const DifferenceProfile> profile_of(const std::string& fam_key,
                                                    std::shared_ptr<const BoundaryFunction> f,
                                                    const std::vector<double>& p, const QuadratureSpec& spec) {
  const std::string key = fam_key + "|" + json(p).dump() + "|" + to_json(spec).dump();
  return profile_cache().get(key, [&] { return DifferenceProfile::build(f, p, spec); });
}

std::shared_ptr<const ExtensionHandle> extension_of(const FamilySpec& fam, int k_max, const QuadratureSpec& spec) {
  const std::string key = to_json(fam).dump() + "|" + std::to_string(k_max) + "|" + to_json(spec).dump();
  return extension_cache().get(
      key, [&] { return std::make_shared<const ExtensionHandle>(boundary_of(fam), k_max, spec); });
}

double number_or_inf(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    throw ConfigError("expected a number or \"inf\", got '" + s + "'");
  }
  return j.get<double>();
}

json base_params(const CheckInstance& inst, const QuadratureSpec& spec) {
  json p = json::object();
  if (!inst.family.kind.empty()) p["family"] = to_json(inst.family);
  p["cfg"] = to_json(inst.cfg);
  for (const auto& [k, v] : inst.extra.items()) p[k] = v;
  p["quadrature"] = to_json(spec);
  return p;
}

std::vector<ComparisonReport> run_hardy(const CheckInstance& inst, const HarnessOptions& o) {
  const auto& e = inst.extra;
  HardyParams hp;
  hp.q = e.at("q").get<double>();
  hp.sigma = e.at("sigma").get<double>();
  hp.a = number_or_inf(e.at("a"));
  hp.validate();
  const std::string shape = e.at("shape").get<std::string>();
  const double eps = e.value("eps", 0.01);
  const bool closed = shape == "zero" || shape == "constant" || shape == "near-extremal";
  ComparisonReport r =
      hardy_check(hardy_shape(shape, hp, eps), hp, o.spec, closed ? o.tol.closed_form : o.tol.quadrature);
  return {r};
}

std::vector<ComparisonReport> run_hardy_polar(const CheckInstance& inst, const HarnessOptions& o) {
  auto f = boundary_of(inst.family);
  PolarHardyParams pp;
  pp.d = f->dim();
  pp.theta = inst.extra.at("theta").get<double>();
  pp.beta = inst.extra.at("beta").get<double>();
  pp.a = number_or_inf(inst.extra.at("a"));
  std::vector<double> breaks;
  const double r = f->support_radius();
  if (std::isfinite(r)) breaks.push_back(r);
  ComparisonReport rep = hardy_polar_check([f](std::span<const double> x) { return f->value(x); },
                                           inst.family.kind, pp, o.spec, o.ceilings.hardy_polar,
                                           o.tol.quadrature, breaks);
  rep.params["family"] = to_json(inst.family);
  return {rep};
}

std::vector<ComparisonReport> run_convolution(const CheckInstance& inst, const HarnessOptions& o) {
  auto f = boundary_of(inst.family);
  const double delta = inst.extra.at("delta").get<double>();
  auto [a, b] = convolution_bounds_check(f, delta, inst.cfg.p, o.spec, o.ceilings.convolution_derivative,
                                         o.tol.quadrature);
  for (ComparisonReport* r : {&a, &b}) {
    json p = base_params(inst, o.spec);
    for (const auto& [k, v] : r->params.items()) p[k] = v;
    r->params = std::move(p);
  }
  return {a, b};
}

std::vector<ComparisonReport> run_besov_equivalence(const CheckInstance& inst, const HarnessOptions& o) {
  auto f = boundary_of(inst.family);
  const std::string fam_key = to_json(inst.family).dump();
  auto prof = profile_of(fam_key, f, inst.cfg.p, o.spec);
  ComparisonReport r;
  r.params = base_params(inst, o.spec);
  const double ell = smoothness_order(inst.cfg);
  r.params["ell"] = ell;

  if (inst.extra.contains("closed_form")) {
    const SeminormResult s = prof->direct(ell, inst.cfg.q);
    r.check_id = "besov-equivalence/closed-form";
    r.lhs = s.value;
    r.rhs = inst.extra.at("closed_form").get<double>();
    r.constant = 1.0;
    r.decide_equal(0.01);
    return {r};
  }

  const BesovNorm direct = besov_norm(*prof, *f, inst.cfg, BesovVariant::direct(), o.spec);
  const BesovNorm integral = besov_norm(*prof, *f, inst.cfg, BesovVariant::integral(1.0), o.spec);
  const BesovNorm dyadic = besov_norm(*prof, *f, inst.cfg, BesovVariant::dyadic(), o.spec);
  const auto safe = [](double a, double b) { return (a == 0.0 && b == 0.0) ? 1.0 : a / b; };
  const double n0 = direct.total();
  const double n1 = integral.total();
  const double n2 = dyadic.total();
  const std::vector<double> ratios{safe(n0, n1), safe(n1, n0), safe(n1, n2), safe(n2, n1)};
  r.check_id = "besov-equivalence";
  r.params["norms"] = {{"direct", number(n0)}, {"integral", number(n1)}, {"dyadic", number(n2)}};
  r.params["ratios"] = ratios;
  r.lhs = *std::max_element(ratios.begin(), ratios.end());
  r.rhs = 1.0;
  r.constant = o.ceilings.besov_equivalence;
  r.decide(o.tol.quadrature);
  if (direct.seminorm.divergent || integral.seminorm.divergent || dyadic.seminorm.divergent) {
    r.mark_inconclusive("divergent: difference profile does not decay fast enough at small |h|");
  }
  return {r};
}

std::vector<ComparisonReport> run_lp_trace(const CheckInstance& inst, const HarnessOptions& o) {
  auto u = halfspace_of(inst.family);
  auto g = trace_restrict(*u);
  ComparisonReport r;
  r.check_id = "lp-trace";
  r.params = base_params(inst, o.spec);
  const WeightedNorms w = weighted_norms(*u, inst.cfg, o.spec, true);
  r.lhs = mixed_lebesgue_norm(*g, inst.cfg.p, o.spec);
  r.rhs = w.value + w.gradient;
  r.params["rhs_value"] = w.value;
  r.params["rhs_gradient"] = w.gradient;
  r.constant = o.ceilings.lp_trace;
  r.decide(o.tol.quadrature);
  return {r};
}

std::vector<ComparisonReport> run_besov_trace(const CheckInstance& inst, const HarnessOptions& o) {
  auto u = halfspace_of(inst.family);
  auto g = trace_restrict(*u);
  const double ell = smoothness_order(inst.cfg);
  ComparisonReport r;
  r.check_id = "besov-trace";
  r.params = base_params(inst, o.spec);
  r.params["ell"] = ell;
  const FamilySpec trace_key{"trace", {}, {inst.family}};
  auto prof = profile_of(to_json(trace_key).dump(), g, inst.cfg.p, o.spec);
  const SeminormResult s = prof->direct(ell, inst.cfg.q);
  const WeightedNorms w = weighted_norms(*u, inst.cfg, o.spec, true);
  r.lhs = s.value;
  r.rhs = w.gradient;
  r.constant = o.ceilings.besov_trace;
  r.decide(o.tol.quadrature);
  if (s.divergent) r.mark_inconclusive("divergent: trace seminorm head does not converge");
  return {r};
}

std::vector<ComparisonReport> run_extension_bound(const CheckInstance& inst, const HarnessOptions& o) {
  auto g = boundary_of(inst.family);
  const int k_max = inst.extra.value("k_max", 12);
  extend(g, inst.cfg, k_max, o.spec);
  auto e = extension_of(inst.family, k_max, o.spec);
  const std::string fam_key = to_json(inst.family).dump();
  auto prof = profile_of(fam_key, g, inst.cfg.p, o.spec);
  const BesovNorm b = besov_norm(*prof, *g, inst.cfg, BesovVariant::direct(), o.spec);
  const WeightedNorms w = weighted_norms(*e, inst.cfg, o.spec, true);
  ComparisonReport r;
  r.check_id = "extension-bound";
  r.params = base_params(inst, o.spec);
  r.params["ell"] = smoothness_order(inst.cfg);
  r.params["lhs_value"] = w.value;
  r.params["lhs_gradient"] = w.gradient;
  r.params["rhs_lp"] = b.lp;
  r.params["rhs_seminorm"] = number(b.seminorm.value);
  r.lhs = w.value + w.gradient;
  r.rhs = b.total();
  r.constant = o.ceilings.extension_bound;
  r.decide(o.tol.quadrature);
  if (b.seminorm.divergent) r.mark_inconclusive("divergent: source Besov seminorm does not converge");
  return {r};
}

std::vector<ComparisonReport> run_extension_limit(const CheckInstance& inst, const HarnessOptions& o) {
  auto g = boundary_of(inst.family);
  const int k_max = inst.extra.value("k_max", 12);
  const int s_lo = inst.extra.value("s_lo", 4);
  const int s_hi = inst.extra.value("s_hi", 9);
  extend(g, inst.cfg, k_max, o.spec);
  auto e = extension_of(inst.family, k_max, o.spec);
  const auto prof = extension_limit_profile(*e, inst.cfg, s_lo, s_hi, o.spec);
  ComparisonReport r;
  r.check_id = "extension-limit";
  r.params = base_params(inst, o.spec);
  r.params["ell"] = smoothness_order(inst.cfg);
  r.params["profile"] = prof;
  bool decreasing = true;
  for (std::size_t i = 1; i < prof.size(); ++i) decreasing = decreasing && prof[i] <= prof[i - 1];
  r.params["decreasing"] = decreasing;
  r.lhs = prof.back();
  r.rhs = prof.front();
  r.constant = o.ceilings.extension_limit;
  r.decide(o.tol.quadrature);
  return {r};
}

std::vector<ComparisonReport> run_vanishing_trace(const CheckInstance& inst, const HarnessOptions& o) {
  if (!inst.cfg.in_vanishing_window()) throw DomainError("vanishing-trace needs alpha in (-q, -1]");
  auto u = halfspace_of(inst.family);
  const int depth = inst.extra.value("depth", 20);
  std::vector<double> slices;
  for (int j = 1; j <= depth; ++j) slices.push_back(slice_norm(*u, std::ldexp(1.0, -j), inst.cfg.p, o.spec));
  bool decreasing = true;
  for (std::size_t i = 1; i < slices.size(); ++i) decreasing = decreasing && slices[i] <= slices[i - 1];
  const FamilySpec eta = inst.family.children.empty()
                             ? FamilySpec{"bump", {{"d", static_cast<double>(inst.cfg.d)}}, {}}
                             : inst.family.children.front();
  const double eta_norm = mixed_lebesgue_norm(*boundary_of(eta), inst.cfg.p, o.spec);
  ComparisonReport r;
  r.check_id = "vanishing-trace";
  r.params = base_params(inst, o.spec);
  r.params["slice_norms"] = slices;
  r.params["decreasing"] = decreasing;
  r.params["eta_norm"] = eta_norm;
  if (inst.family.kind == "log-decay") r.params["closed_form"] = eta_norm / (1.0 + depth);
  r.lhs = slices.back();
  r.rhs = eta_norm;
  r.constant = o.ceilings.vanishing_trace;
  r.decide(o.tol.quadrature);
  if (!decreasing) r.status = Status::fail;
  return {r};
}

FamilySpec fam(const std::string& kind, int d, std::map<std::string, double> extra = {}) {
  FamilySpec s{kind, std::move(extra), {}};
  if (kind != "hat" && kind != "tensor") s.params["d"] = d;
  return s;
}

FamilySpec tensor_hat() {
  return FamilySpec{"tensor", {}, {fam("hat", 1), fam("hat", 1)}};
}

FamilySpec over(const std::string& kind, FamilySpec eta, std::map<std::string, double> extra = {}) {
  return FamilySpec{kind, std::move(extra), {std::move(eta)}};
}

std::vector<ExponentConfig> matrix(const std::vector<std::vector<double>>& ps, const std::vector<double>& qs,
                                   bool near_endpoint = true) {
  std::vector<ExponentConfig> out;
  for (const auto& p : ps) {
    for (double q : qs) {
      std::vector<double> alphas{-0.5, 0.0};
      if (near_endpoint) alphas.push_back(q - 1.0 - 0.1);
      for (double a : alphas) out.push_back(ExponentConfig::make(p, q, a));
    }
  }
  return out;
}

double rel_drift(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) return a == b ? 0.0 : kInf;
  const double scale = std::max({std::abs(a), std::abs(b), 1e-12});
  return std::abs(a - b) / scale;
}

}  // namespace

std::string to_string(CheckKind k) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == k) return kn.name;
  }
  return "unknown";
}

CheckKind check_kind_from_string(const std::string& s) {
  for (const auto& kn : kKindNames) {
    if (s == kn.name) return kn.kind;
  }
  throw ConfigError("unknown check kind '" + s + "'");
}

std::vector<CheckKind> all_check_kinds() {
  std::vector<CheckKind> out;
  for (const auto& kn : kKindNames) out.push_back(kn.kind);
  return out;
}

bool is_empirical(CheckKind k) { return k != CheckKind::hardy; }

double Ceilings::of(CheckKind k) const {
  switch (k) {
    case CheckKind::hardy: return 0.0;
    case CheckKind::hardy_polar: return hardy_polar;
    case CheckKind::convolution: return convolution_derivative;
    case CheckKind::besov_equivalence: return besov_equivalence;
    case CheckKind::lp_trace: return lp_trace;
    case CheckKind::besov_trace: return besov_trace;
    case CheckKind::extension_bound: return extension_bound;
    case CheckKind::extension_limit: return extension_limit;
    case CheckKind::vanishing_trace: return vanishing_trace;
  }
  return 0.0;
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("TRACEKIT_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string CheckInstance::key() const { return to_json().dump(); }

json CheckInstance::to_json() const {
  json j = json::object();
  j["kind"] = to_string(kind);
  j["family"] = tracekit::to_json(family);
  j["cfg"] = tracekit::to_json(cfg);
  j["extra"] = extra;
  return j;
}

CheckInstance CheckInstance::from_json(const json& j) {
  for (const auto& [k, v] : j.items()) {
    if (k != "kind" && k != "family" && k != "cfg" && k != "extra") throw DomainError("unknown instance key '" + k + "'");
  }
  CheckInstance inst;
  inst.kind = check_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("family") && !j.at("family").value("kind", std::string()).empty()) {
    inst.family = family_from_json(j.at("family"));
  }
  if (j.contains("cfg")) inst.cfg = config_from_json(j.at("cfg"));
  if (j.contains("extra")) inst.extra = j.at("extra");
  return inst;
}

std::vector<ComparisonReport> run_instance(const CheckInstance& inst, const HarnessOptions& opts) {
  opts.spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<ComparisonReport> out;
  try {
    switch (inst.kind) {
      case CheckKind::hardy: out = run_hardy(inst, opts); break;
      case CheckKind::hardy_polar: out = run_hardy_polar(inst, opts); break;
      case CheckKind::convolution: out = run_convolution(inst, opts); break;
      case CheckKind::besov_equivalence: out = run_besov_equivalence(inst, opts); break;
      case CheckKind::lp_trace: out = run_lp_trace(inst, opts); break;
      case CheckKind::besov_trace: out = run_besov_trace(inst, opts); break;
      case CheckKind::extension_bound: out = run_extension_bound(inst, opts); break;
      case CheckKind::extension_limit: out = run_extension_limit(inst, opts); break;
      case CheckKind::vanishing_trace: out = run_vanishing_trace(inst, opts); break;
    }
  } catch (const NumericError& e) {
    ComparisonReport r;
    r.check_id = to_string(inst.kind);
    r.params = base_params(inst, opts.spec);
    r.lhs = r.rhs = std::numeric_limits<double>::quiet_NaN();
    r.ratio = r.lhs;
    r.mark_inconclusive(std::string("numeric: ") + e.what());
    out = {r};
  }
  if (opts.timings) {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);
    for (auto& r : out) r.runtime_ms = ms.count();
  }
  return out;
}

std::vector<CheckInstance> default_instances(CheckKind kind, std::vector<std::string>* excluded) {
  std::vector<CheckInstance> out;
  const auto exclude = [&](const std::string& why) {
    if (excluded) excluded->push_back(why);
  };
  const auto add = [&](const FamilySpec& f, const ExponentConfig& cfg, json extra = json::object()) {
    out.push_back(CheckInstance{kind, f, cfg, std::move(extra)});
  };
  // Drops (family, cfg) pairs whose smoothness order reaches the family's
  // Besov ceiling: the seminorm is infinite there.
  const auto in_besov = [&](const FamilySpec& f, const ExponentConfig& cfg) {
    const auto g = family_instantiate(f).boundary;
    const double ell = smoothness_order(cfg);
    if (ell < g->besov_ceiling(cfg.p)) return true;
    exclude(to_json(f).dump() + " " + to_json(cfg).dump() + ": ell >= Besov ceiling " +
            std::to_string(g->besov_ceiling(cfg.p)));
    return false;
  };

  const std::vector<FamilySpec> d1{fam("gaussian-bump", 1), fam("bump", 1), fam("hat", 1), fam("indicator", 1)};
  const std::vector<FamilySpec> d2{fam("gaussian-bump", 2), fam("bump", 2), tensor_hat(), fam("indicator", 2)};

  switch (kind) {
    case CheckKind::hardy: {
      for (double q : {1.0, 1.5, 2.0, 3.0}) {
        for (double sigma : {-0.5, 0.0, 1.0 - 1.0 / q - 0.1}) {
          if (!(sigma < 1.0 - 1.0 / q)) {
            exclude("hardy q=" + std::to_string(q) + " sigma=" + std::to_string(sigma) +
                    ": sigma >= 1 - 1/q violates the hypothesis");
            continue;
          }
          for (const json& a : {json(1.0), json("inf")}) {
            for (const auto& shape : hardy_campaign_shapes()) {
              add({}, ExponentConfig{}, {{"q", q}, {"sigma", sigma}, {"a", a}, {"shape", shape}});
            }
          }
          for (const std::string shape : {"zero", "constant", "near-extremal"}) {
            if (shape == "constant" && !(q * sigma > -1.0)) {
              exclude("hardy constant q=" + std::to_string(q) + " sigma=" + std::to_string(sigma) +
                      ": t^{q sigma} is not integrable at 0, both sides are infinite");
              continue;
            }
            add({}, ExponentConfig{}, {{"q", q}, {"sigma", sigma}, {"a", 1.0}, {"shape", shape}, {"eps", 0.01}});
          }
        }
      }
      break;
    }
    case CheckKind::hardy_polar: {
      for (const auto& f : {fam("gaussian-bump", 1), fam("bump", 1), fam("hat", 1), fam("gaussian-bump", 2),
                            fam("bump", 2)}) {
        const int d = family_instantiate(f).dim();
        for (double theta : {1.0, 2.0}) {
          for (double beta : {-0.4, d - 1.0 / theta - 0.25}) {
            for (double a : {1.0, 2.0}) add(f, ExponentConfig::make(std::vector<double>(d, 2.0), 2.0, 0.0),
                                            {{"theta", theta}, {"beta", beta}, {"a", a}});
          }
        }
      }
      break;
    }
    case CheckKind::convolution: {
      for (const auto& f : d1) {
        for (double delta : {0.5, 0.125, 1.0 / 32.0}) {
          for (double p : {1.0, 2.0, 3.0}) add(f, ExponentConfig::make({p}, 2.0, 0.0), {{"delta", delta}});
        }
      }
      for (const auto& f : {fam("gaussian-bump", 2), tensor_hat(), fam("bump", 2)}) {
        for (double delta : {0.5, 0.125, 1.0 / 32.0}) {
          for (const auto& p : {std::vector<double>{1, 2}, std::vector<double>{2, 3}}) {
            add(f, ExponentConfig::make(p, 2.0, 0.0), {{"delta", delta}});
          }
        }
      }
      break;
    }
    case CheckKind::besov_equivalence: {
      auto fams1 = d1;
      fams1.push_back(fam("constant", 1));
      for (const auto& f : fams1) {
        for (const auto& cfg : matrix({{2.0}}, {1.5, 2.0, 3.0})) {
          if (in_besov(f, cfg)) add(f, cfg);
        }
      }
      for (const auto& f : d2) {
        for (const auto& cfg : matrix({{1.0, 2.0}, {2.0, 3.0}, {3.0, 1.5}}, {1.5, 2.0, 3.0})) {
          if (in_besov(f, cfg)) add(f, cfg);
        }
      }
      add(fam("indicator", 1), ExponentConfig::make({1.0}, 1.0, -0.5), {{"closed_form", 16.0}});
      break;
    }
    case CheckKind::lp_trace:
    case CheckKind::besov_trace: {
      const std::vector<FamilySpec> u1{over("ramp-cutoff", fam("bump", 1)), over("ramp-cutoff", fam("gaussian-bump", 1)),
                                       over("ramp-cutoff", fam("hat", 1)),
                                       over("vertical-power", fam("bump", 1), {{"m", 1.0}})};
      const std::vector<FamilySpec> u2{over("ramp-cutoff", fam("bump", 2)), over("ramp-cutoff", fam("gaussian-bump", 2)),
                                       over("ramp-cutoff", tensor_hat())};
      for (const auto& u : u1) {
        for (const auto& cfg : matrix({{2.0}}, {1.5, 2.0, 3.0})) add(u, cfg);
      }
      for (const auto& u : u2) {
        for (const auto& cfg : matrix({{1.0, 2.0}, {2.0, 3.0}}, {2.0})) add(u, cfg);
      }
      break;
    }
    case CheckKind::extension_bound: {
      for (const auto& g : d1) {
        for (const auto& cfg : matrix({{1.0}, {2.0}}, {2.0, 3.0}, false)) {
          if (in_besov(g, cfg)) add(g, cfg, {{"k_max", 12}});
        }
      }
      for (const auto& g : {fam("bump", 2), tensor_hat()}) {
        for (const auto& cfg : matrix({{1.0, 2.0}}, {2.0}, false)) add(g, cfg, {{"k_max", 12}});
      }
      break;
    }
    case CheckKind::extension_limit: {
      auto fams1 = d1;
      fams1.push_back(fam("constant", 1, {{"value", 1.0}}));
      for (const auto& g : fams1) {
        for (const auto& cfg : matrix({{1.0}, {2.0}}, {2.0})) {
          if (in_besov(g, cfg)) add(g, cfg, {{"k_max", 12}, {"s_lo", 4}, {"s_hi", 9}});
        }
      }
      for (const auto& g : {fam("bump", 2), fam("constant", 2, {{"value", 1.0}})}) {
        add(g, ExponentConfig::make({1.0, 2.0}, 2.0, 0.0), {{"k_max", 12}, {"s_lo", 4}, {"s_hi", 9}});
      }
      break;
    }
    case CheckKind::vanishing_trace: {
      for (const auto& eta : {fam("bump", 1), fam("gaussian-bump", 1)}) {
        for (double p : {1.0, 2.0}) {
          for (double alpha : {-1.0, -1.5}) add(over("log-decay", eta), ExponentConfig::make({p}, 2.0, alpha));
        }
      }
      for (double alpha : {-1.0, -1.5}) {
        add(over("log-decay", fam("bump", 2)), ExponentConfig::make({1.0, 2.0}, 2.0, alpha));
      }
      break;
    }
  }
  return out;
}

bool CampaignSummary::ok(const Tolerances& tol) const {
  if (failed > 0) return false;
  if (total > 0 && static_cast<double>(inconclusive) > tol.inconclusive_fraction * static_cast<double>(total)) {
    return false;
  }
  return std::isfinite(c_emp);
}

json CampaignSummary::to_json() const {
  json j = json::object();
  j["kind"] = to_string(kind);
  j["total"] = total;
  j["passed"] = passed;
  j["failed"] = failed;
  j["inconclusive"] = inconclusive;
  j["c_emp"] = number(c_emp);
  j["ceiling"] = number(ceiling);
  j["excluded"] = excluded;
  j["inconclusive_reasons"] = inconclusive_reasons;
  return j;
}

CampaignResult run_campaign(CheckKind kind, const std::vector<CheckInstance>& instances, const HarnessOptions& opts,
                            std::vector<std::string> excluded) {
  if (instances.empty()) throw DomainError("campaign '" + to_string(kind) + "' has no instances");
  std::vector<std::pair<std::string, std::size_t>> order;
  for (std::size_t i = 0; i < instances.size(); ++i) order.emplace_back(instances[i].key(), i);
  std::sort(order.begin(), order.end());

  std::vector<std::vector<ComparisonReport>> results(instances.size());
  std::vector<std::exception_ptr> errors(instances.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < order.size(); i = next++) {
      const std::size_t idx = order[i].second;
      try {
        results[idx] = run_instance(instances[idx], opts);
      } catch (...) {
        errors[idx] = std::current_exception();
      }
    }
  };
  const int n = std::min<int>(resolve_workers(opts.workers), static_cast<int>(instances.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  CampaignResult out;
  out.summary.kind = kind;
  out.summary.ceiling = opts.ceilings.of(kind);
  out.summary.excluded = std::move(excluded);
  for (const auto& [key, idx] : order) {
    if (errors[idx]) std::rethrow_exception(errors[idx]);
    for (auto& r : results[idx]) {
      ++out.summary.total;
      switch (r.status) {
        case Status::pass: ++out.summary.passed; break;
        case Status::fail: ++out.summary.failed; break;
        case Status::inconclusive:
          ++out.summary.inconclusive;
          out.summary.inconclusive_reasons.push_back(key + ": " + r.params.value("reason", std::string("unknown")));
          break;
      }
      const bool empirical = is_empirical(kind) && r.check_id != "convolution/approximation" &&
                             r.check_id != "besov-equivalence/closed-form";
      if (empirical && r.status == Status::pass && r.rhs != 0.0) {
        out.summary.c_emp = std::max(out.summary.c_emp, r.lhs / r.rhs);
      }
      out.reports.push_back(std::move(r));
    }
  }
  return out;
}

ComparisonReport refinement_study(const CheckInstance& inst, int levels, const HarnessOptions& opts) {
  if (levels < 2 || levels > 4) throw DomainError("refinement levels must lie in [2, 4]");
  std::vector<std::vector<ComparisonReport>> runs;
  std::vector<QuadratureSpec> specs;
  for (int l = 0; l < levels; ++l) specs.push_back(opts.spec.refined(l));
  bool box = false;
  if (!inst.family.kind.empty() && !std::isfinite(handle_of(inst.family)->support_radius())) {
    QuadratureSpec s = opts.spec;
    s.box_radius *= 2.0;
    s.panels_per_axis *= 2;
    specs.push_back(s);
    box = true;
  }
  for (std::size_t l = 0; l < specs.size(); ++l) {
    HarnessOptions o = opts;
    o.spec = specs[l];
    auto reps = run_instance(inst, o);
    for (auto& r : reps) r.mesh_level = static_cast<int>(l);
    runs.push_back(std::move(reps));
  }

  double drift = 0.0;
  json levels_json = json::array();
  bool all_pass = true;
  const auto compare = [&](const std::vector<ComparisonReport>& a, const std::vector<ComparisonReport>& b) {
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
      drift = std::max({drift, rel_drift(a[i].lhs, b[i].lhs), rel_drift(a[i].rhs, b[i].rhs),
                        rel_drift(a[i].ratio, b[i].ratio)});
      const auto& ra = a[i].params;
      const auto& rb = b[i].params;
      if (ra.contains("ratios") && rb.contains("ratios")) {
        for (std::size_t k = 0; k < ra["ratios"].size(); ++k) {
          drift = std::max(drift, rel_drift(ra["ratios"][k].get<double>(), rb["ratios"][k].get<double>()));
        }
      }
    }
  };
  for (std::size_t l = 0; l < runs.size(); ++l) {
    json lv = json::array();
    for (const auto& r : runs[l]) {
      lv.push_back({{"check_id", r.check_id}, {"lhs", number(r.lhs)}, {"rhs", number(r.rhs)},
                    {"ratio", number(r.ratio)}, {"status", to_string(r.status)}});
      all_pass = all_pass && r.status != Status::fail;
    }
    levels_json.push_back(lv);
  }
  for (int l = 1; l < levels; ++l) compare(runs[l - 1], runs[l]);
  if (box) compare(runs[0], runs.back());

  ComparisonReport rep;
  rep.check_id = "refine/" + to_string(inst.kind);
  rep.params = base_params(inst, opts.spec);
  rep.params["levels"] = levels;
  rep.params["box_doubling"] = box;
  rep.params["runs"] = levels_json;
  rep.lhs = drift;
  rep.rhs = opts.tol.drift;
  rep.constant = 1.0;
  rep.mesh_level = levels - 1;
  rep.decide(0.0);
  if (!all_pass) rep.status = Status::fail;
  return rep;
}

ComparisonReport ell_independence_check(const FamilySpec& g, const std::vector<ExponentConfig>& cfgs,
                                        const HarnessOptions& opts) {
  if (cfgs.empty()) throw DomainError("ell-independence needs at least one configuration");
  for (const auto& c : cfgs) {
    c.validate();
    if (c.q != cfgs.front().q || c.alpha != cfgs.front().alpha) {
      throw DomainError("ell-independence: every configuration must share (q, alpha)");
    }
    if (c.d != cfgs.front().d) throw DomainError("ell-independence: every configuration must share d");
  }
  const double ell = smoothness_order(cfgs.front());
  const FamilySpec u{"ramp-cutoff", {}, {g}};
  ComparisonReport rep;
  rep.check_id = "ell-independence";
  rep.params["family"] = to_json(g);
  rep.params["ell"] = ell;
  rep.params["quadrature"] = to_json(opts.spec);
  json subs = json::array();
  bool ok = true;
  double worst = 0.0;
  for (const auto& c : cfgs) {
    for (const auto& inst : {CheckInstance{CheckKind::besov_trace, u, c, json::object()},
                             CheckInstance{CheckKind::extension_bound, g, c, {{"k_max", 12}}}}) {
      for (const auto& r : run_instance(inst, opts)) {
        ok = ok && r.status == Status::pass;
        worst = std::max(worst, r.ratio);
        subs.push_back(r.to_json());
      }
    }
  }
  rep.params["instances"] = subs;
  rep.lhs = worst;
  rep.rhs = 1.0;
  rep.constant = 1.0;
  rep.decide(0.0);
  if (!ok) rep.status = Status::fail;
  return rep;
}

}  // namespace tracekit
