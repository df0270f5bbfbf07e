#include "tracekit/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "tracekit/error.hpp"
#include "tracekit/hardy.hpp"
#include "tracekit/report.hpp"

namespace tracekit {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string where(const toml::node& n) {
  const auto& src = n.source();
  return "line " + std::to_string(src.begin.line);
}

void reject_unknown(const toml::table& t, const std::set<std::string>& allowed, const std::string& section) {
  for (const auto& [k, v] : t) {
    if (!allowed.count(std::string(k.str()))) {
      throw ConfigError("unknown key '" + std::string(k.str()) + "' in " + section + " (" + where(v) + ")");
    }
  }
}

double as_number(const toml::node& n, const std::string& key) {
  if (auto v = n.value<double>()) return *v;
  if (auto s = n.value<std::string>()) {
    if (*s == "inf") return kInf;
  }
  throw ConfigError("'" + key + "' must be a number (" + where(n) + ")");
}

int as_int(const toml::node& n, const std::string& key) {
  if (auto v = n.as_integer()) return static_cast<int>(v->get());
  throw ConfigError("'" + key + "' must be an integer (" + where(n) + ")");
}

bool as_bool(const toml::node& n, const std::string& key) {
  if (auto v = n.as_boolean()) return v->get();
  throw ConfigError("'" + key + "' must be a boolean (" + where(n) + ")");
}

std::string as_string(const toml::node& n, const std::string& key) {
  if (auto v = n.value<std::string>()) return *v;
  throw ConfigError("'" + key + "' must be a string (" + where(n) + ")");
}

const toml::array& as_array(const toml::node& n, const std::string& key) {
  if (auto a = n.as_array()) return *a;
  throw ConfigError("'" + key + "' must be an array (" + where(n) + ")");
}

std::vector<double> number_list(const toml::node& n, const std::string& key) {
  std::vector<double> out;
  for (const auto& e : as_array(n, key)) out.push_back(as_number(e, key));
  return out;
}

FamilySpec family_from_toml(const toml::node& n) {
  const auto* t = n.as_table();
  if (!t) throw ConfigError("family entries must be tables (" + where(n) + ")");
  reject_unknown(*t, {"kind", "params", "children"}, "family");
  FamilySpec f;
  if (!t->contains("kind")) throw ConfigError("family entry without 'kind' (" + where(n) + ")");
  f.kind = as_string(*t->get("kind"), "kind");
  if (const auto* p = t->get("params")) {
    const auto* pt = p->as_table();
    if (!pt) throw ConfigError("'params' must be a table (" + where(*p) + ")");
    for (const auto& [k, v] : *pt) f.params[std::string(k.str())] = as_number(v, std::string(k.str()));
  }
  if (const auto* c = t->get("children")) {
    for (const auto& e : as_array(*c, "children")) f.children.push_back(family_from_toml(e));
  }
  return f;
}

void parse_quadrature(const toml::table& t, QuadratureSpec& q) {
  reject_unknown(t,
                 {"box_radius", "panels", "gauss_order", "vertical_cap", "vertical_panels", "grading_exponent",
                  "octaves", "directions", "seed"},
                 "[quadrature]");
  for (const auto& [k, v] : t) {
    const std::string key(k.str());
    if (key == "box_radius") q.box_radius = as_number(v, key);
    else if (key == "panels") q.panels_per_axis = as_int(v, key);
    else if (key == "gauss_order") q.points_per_panel = as_int(v, key);
    else if (key == "vertical_cap") q.vertical_cap = as_number(v, key);
    else if (key == "vertical_panels") q.vertical_panels = as_int(v, key);
    else if (key == "grading_exponent") q.grading_exponent = as_number(v, key);
    else if (key == "octaves") q.radial_octaves = as_int(v, key);
    else if (key == "directions") q.directions = as_int(v, key);
    else if (key == "seed") {
      const int s = as_int(v, key);
      if (s < 0) throw ConfigError("'seed' must be >= 0");
      q.seed = static_cast<std::uint64_t>(s);
    }
  }
}

void parse_tolerances(const toml::table& t, Tolerances& tol) {
  reject_unknown(t, {"closed_form", "quadrature", "drift", "inconclusive_fraction"}, "[tolerances]");
  for (const auto& [k, v] : t) {
    const std::string key(k.str());
    const double x = as_number(v, key);
    if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("tolerance '" + key + "' must be finite and >= 0");
    if (key == "closed_form") tol.closed_form = x;
    else if (key == "quadrature") tol.quadrature = x;
    else if (key == "drift") tol.drift = x;
    else tol.inconclusive_fraction = x;
  }
}

struct CeilingField {
  const char* name;
  double Ceilings::*member;
};

constexpr CeilingField kCeilingFields[] = {
    {"hardy_polar", &Ceilings::hardy_polar},
    {"convolution_derivative", &Ceilings::convolution_derivative},
    {"besov_equivalence", &Ceilings::besov_equivalence},
    {"lp_trace", &Ceilings::lp_trace},
    {"besov_trace", &Ceilings::besov_trace},
    {"extension_bound", &Ceilings::extension_bound},
    {"extension_limit", &Ceilings::extension_limit},
    {"vanishing_trace", &Ceilings::vanishing_trace},
};

void parse_ceilings(const toml::table& t, Ceilings& c) {
  std::set<std::string> names;
  for (const auto& f : kCeilingFields) names.insert(f.name);
  reject_unknown(t, names, "[ceilings]");
  for (const auto& f : kCeilingFields) {
    if (const auto* v = t.get(f.name)) {
      const double x = as_number(*v, f.name);
      if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(std::string("ceiling '") + f.name + "' must be positive");
      c.*f.member = x;
    }
  }
}

void parse_output(const toml::table& t, OutputConfig& o) {
  reject_unknown(t, {"jsonl", "csv", "summary", "timings"}, "[output]");
  if (const auto* v = t.get("jsonl")) o.jsonl = as_string(*v, "jsonl");
  if (const auto* v = t.get("csv")) o.csv = as_string(*v, "csv");
  if (const auto* v = t.get("summary")) o.summary = as_string(*v, "summary");
  if (const auto* v = t.get("timings")) o.timings = as_bool(*v, "timings");
}

CampaignConfig parse_campaign(const toml::table& t) {
  reject_unknown(t,
                 {"kind", "families", "p", "q", "alpha", "sigma", "a", "shapes", "eps", "theta", "beta", "deltas",
                  "k_max", "s_range", "refine_levels", "refine_count"},
                 "[[campaign]]");
  CampaignConfig c;
  if (!t.contains("kind")) throw ConfigError("[[campaign]] without 'kind'");
  c.kind = check_kind_from_string(as_string(*t.get("kind"), "kind"));
  for (const auto& [k, v] : t) {
    const std::string key(k.str());
    if (key == "families") {
      for (const auto& e : as_array(v, key)) c.families.push_back(family_from_toml(e));
    } else if (key == "p") {
      for (const auto& e : as_array(v, key)) c.p.push_back(number_list(e, key));
    } else if (key == "q") c.q = number_list(v, key);
    else if (key == "alpha") c.alpha = number_list(v, key);
    else if (key == "sigma") c.sigma = number_list(v, key);
    else if (key == "a") c.a = number_list(v, key);
    else if (key == "shapes") {
      for (const auto& e : as_array(v, key)) c.shapes.push_back(as_string(e, key));
    } else if (key == "eps") c.eps = as_number(v, key);
    else if (key == "theta") c.theta = number_list(v, key);
    else if (key == "beta") c.beta = number_list(v, key);
    else if (key == "deltas") c.deltas = number_list(v, key);
    else if (key == "k_max") c.k_max = as_int(v, key);
    else if (key == "s_range") {
      const auto& arr = as_array(v, key);
      if (arr.size() != 2) throw ConfigError("'s_range' must have two entries");
      c.s_lo = as_int(*arr.get(0), key);
      c.s_hi = as_int(*arr.get(1), key);
    } else if (key == "refine_levels") c.refine_levels = as_int(v, key);
    else if (key == "refine_count") c.refine_count = as_int(v, key);
  }
  if (c.refine_levels != 0 && (c.refine_levels < 2 || c.refine_levels > 4)) {
    throw ConfigError("'refine_levels' must be 0 or lie in [2, 4]");
  }
  if (c.refine_count < 0) throw ConfigError("'refine_count' must be >= 0");
  if (c.k_max < 3) throw ConfigError("'k_max' must be >= 3");
  return c;
}

// TOML writing: shortest round-trip numbers, +∞ is written as "inf".
std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string fmt(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + "]";
}

std::string quoted(const std::string& s) {
  json j = s;
  return j.dump();
}

std::string fmt(const FamilySpec& f) {
  std::string s = "{ kind = " + quoted(f.kind);
  if (!f.params.empty()) {
    s += ", params = {";
    bool first = true;
    for (const auto& [k, v] : f.params) {
      s += (first ? " " : ", ") + k + " = " + fmt(v);
      first = false;
    }
    s += " }";
  }
  if (!f.children.empty()) {
    s += ", children = [";
    for (std::size_t i = 0; i < f.children.size(); ++i) s += (i ? ", " : "") + fmt(f.children[i]);
    s += "]";
  }
  return s + " }";
}

// Distinct values in first-seen order.
template <class T>
void push_unique(std::vector<T>& v, const T& x) {
  if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
}

}  // namespace

bool CampaignConfig::uses_defaults() const {
  return families.empty() && p.empty() && q.empty() && alpha.empty() && sigma.empty() && a.empty() &&
         shapes.empty() && theta.empty() && beta.empty() && deltas.empty();
}

RunConfig parse_run_config(const std::string& text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config syntax error: " << e.description() << " (line " << e.source().begin.line << ")";
    throw ConfigError(os.str());
  }
  reject_unknown(root, {"workers", "quadrature", "tolerances", "ceilings", "output", "campaign"}, "config");
  RunConfig cfg;
  const auto table = [&](const char* name) -> const toml::table* {
    const auto* n = root.get(name);
    if (!n) return nullptr;
    const auto* t = n->as_table();
    if (!t) throw ConfigError(std::string("[") + name + "] must be a table");
    return t;
  };
  if (const auto* n = root.get("workers")) {
    cfg.workers = as_int(*n, "workers");
    if (cfg.workers < 0) throw ConfigError("'workers' must be >= 0");
  }
  if (const auto* t = table("quadrature")) parse_quadrature(*t, cfg.quadrature);
  if (const auto* t = table("tolerances")) parse_tolerances(*t, cfg.tolerances);
  if (const auto* t = table("ceilings")) parse_ceilings(*t, cfg.ceilings);
  if (const auto* t = table("output")) parse_output(*t, cfg.output);
  if (const auto* n = root.get("campaign")) {
    const auto* arr = n->as_array();
    if (!arr) throw ConfigError("'campaign' must be an array of tables ([[campaign]])");
    for (const auto& e : *arr) {
      const auto* t = e.as_table();
      if (!t) throw ConfigError("'campaign' entries must be tables");
      cfg.campaigns.push_back(parse_campaign(*t));
    }
  }
  try {
    cfg.quadrature.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("[quadrature]: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string to_toml(const RunConfig& c) {
  std::ostringstream os;
  const auto& q = c.quadrature;
  os << "workers = " << c.workers << "\n\n";
  os << "[quadrature]\n"
     << "box_radius = " << fmt(q.box_radius) << "\n"
     << "panels = " << q.panels_per_axis << "\n"
     << "gauss_order = " << q.points_per_panel << "\n"
     << "vertical_cap = " << fmt(q.vertical_cap) << "\n"
     << "vertical_panels = " << q.vertical_panels << "\n"
     << "grading_exponent = " << fmt(q.grading_exponent) << "\n"
     << "octaves = " << q.radial_octaves << "\n"
     << "directions = " << q.directions << "\n"
     << "seed = " << q.seed << "\n\n";
  const auto& t = c.tolerances;
  os << "[tolerances]\n"
     << "closed_form = " << fmt(t.closed_form) << "\n"
     << "quadrature = " << fmt(t.quadrature) << "\n"
     << "drift = " << fmt(t.drift) << "\n"
     << "inconclusive_fraction = " << fmt(t.inconclusive_fraction) << "\n\n";
  os << "[ceilings]\n";
  for (const auto& f : kCeilingFields) os << f.name << " = " << fmt(c.ceilings.*f.member) << "\n";
  os << "\n[output]\n"
     << "jsonl = " << quoted(c.output.jsonl) << "\n"
     << "csv = " << quoted(c.output.csv) << "\n"
     << "summary = " << quoted(c.output.summary) << "\n"
     << "timings = " << (c.output.timings ? "true" : "false") << "\n";
  for (const auto& k : c.campaigns) {
    os << "\n[[campaign]]\nkind = " << quoted(to_string(k.kind)) << "\n";
    if (!k.families.empty()) {
      os << "families = [\n";
      for (const auto& f : k.families) os << "  " << fmt(f) << ",\n";
      os << "]\n";
    }
    if (!k.p.empty()) {
      os << "p = [";
      for (std::size_t i = 0; i < k.p.size(); ++i) os << (i ? ", " : "") << fmt(k.p[i]);
      os << "]\n";
    }
    const auto list = [&](const char* name, const std::vector<double>& v) {
      if (!v.empty()) os << name << " = " << fmt(v) << "\n";
    };
    list("q", k.q);
    list("alpha", k.alpha);
    list("sigma", k.sigma);
    list("a", k.a);
    if (!k.shapes.empty()) {
      os << "shapes = [";
      for (std::size_t i = 0; i < k.shapes.size(); ++i) os << (i ? ", " : "") << quoted(k.shapes[i]);
      os << "]\n";
    }
    os << "eps = " << fmt(k.eps) << "\n";
    list("theta", k.theta);
    list("beta", k.beta);
    list("deltas", k.deltas);
    os << "k_max = " << k.k_max << "\n"
       << "s_range = [" << k.s_lo << ", " << k.s_hi << "]\n"
       << "refine_levels = " << k.refine_levels << "\n"
       << "refine_count = " << k.refine_count << "\n";
  }
  return os.str();
}

RunConfig default_run_config() {
  RunConfig c;
  for (CheckKind k : all_check_kinds()) {
    CampaignConfig cc;
    cc.kind = k;
    c.campaigns.push_back(cc);
  }
  return c;
}

std::vector<CheckInstance> build_instances(const CampaignConfig& c, std::vector<std::string>* excluded) {
  if (c.uses_defaults() && c.eps == 0.01 && c.k_max == 12 && c.s_lo == 4 && c.s_hi == 9) {
    return default_instances(c.kind, excluded);
  }
  const auto exclude = [&](const std::string& why) {
    if (excluded) excluded->push_back(why);
  };

  // Unspecified axes fall back to the values used by the default matrix.
  const auto defaults = default_instances(c.kind);
  std::vector<FamilySpec> fams = c.families;
  std::vector<std::vector<double>> ps = c.p;
  std::vector<double> qs = c.q;
  std::vector<double> alphas = c.alpha;
  std::vector<double> sigmas = c.sigma;
  std::vector<double> as = c.a;
  std::vector<std::string> shapes = c.shapes;
  std::vector<double> thetas = c.theta;
  std::vector<double> betas = c.beta;
  std::vector<double> deltas = c.deltas;
  const bool hardy = c.kind == CheckKind::hardy;
  for (const auto& d : defaults) {
    if (d.extra.contains("closed_form")) continue;
    if (c.families.empty() && !hardy) push_unique(fams, d.family);
    if (c.p.empty() && !hardy) push_unique(ps, d.cfg.p);
    if (c.q.empty()) push_unique(qs, hardy ? d.extra.at("q").get<double>() : d.cfg.q);
    if (c.alpha.empty() && !hardy) push_unique(alphas, d.cfg.alpha);
    if (c.sigma.empty() && d.extra.contains("sigma")) push_unique(sigmas, d.extra.at("sigma").get<double>());
    if (c.a.empty() && d.extra.contains("a")) {
      const auto& a = d.extra.at("a");
      push_unique(as, a.is_string() ? kInf : a.get<double>());
    }
    if (c.shapes.empty() && d.extra.contains("shape")) push_unique(shapes, d.extra.at("shape").get<std::string>());
    if (c.theta.empty() && d.extra.contains("theta")) push_unique(thetas, d.extra.at("theta").get<double>());
    if (c.beta.empty() && d.extra.contains("beta")) push_unique(betas, d.extra.at("beta").get<double>());
    if (c.deltas.empty() && d.extra.contains("delta")) push_unique(deltas, d.extra.at("delta").get<double>());
  }

  std::vector<CheckInstance> out;
  const auto add = [&](const FamilySpec& f, const ExponentConfig& cfg, json extra) {
    out.push_back(CheckInstance{c.kind, f, cfg, std::move(extra)});
  };
  const auto a_json = [](double a) { return std::isinf(a) ? json("inf") : json(a); };

  if (hardy) {
    for (double q : qs) {
      for (double sigma : sigmas) {
        HardyParams hp{q, sigma, 1.0};
        try {
          hp.validate();
        } catch (const DomainError& e) {
          exclude("hardy q=" + fmt(q) + " sigma=" + fmt(sigma) + ": " + e.what());
          continue;
        }
        for (double a : as) {
          for (const auto& shape : shapes) {
            if (shape == "constant" && !(q * sigma > -1.0)) {
              exclude("hardy constant q=" + fmt(q) + " sigma=" + fmt(sigma) + ": both sides infinite");
              continue;
            }
            if ((shape == "constant" || shape == "near-extremal") && std::isinf(a)) {
              exclude("hardy " + shape + " a=inf: both sides infinite");
              continue;
            }
            json extra{{"q", q}, {"sigma", sigma}, {"a", a_json(a)}, {"shape", shape}};
            if (shape == "near-extremal") extra["eps"] = c.eps;
            add({}, ExponentConfig{}, extra);
          }
        }
      }
    }
    return out;
  }

  for (const auto& f : fams) {
    const FunctionHandle h = family_instantiate(f);
    for (const auto& p : ps) {
      if (static_cast<int>(p.size()) != h.dim()) continue;
      for (double q : qs) {
        for (double alpha : alphas) {
          ExponentConfig cfg;
          try {
            cfg = ExponentConfig::make(p, q, alpha);
          } catch (const DomainError& e) {
            exclude(to_json(f).dump() + ": " + e.what());
            continue;
          }
          const std::string tag = to_json(f).dump() + " " + to_json(cfg).dump();
          const bool needs_window = c.kind != CheckKind::hardy_polar && c.kind != CheckKind::convolution &&
                                    c.kind != CheckKind::vanishing_trace;
          if (needs_window && !cfg.in_trace_window()) {
            exclude(tag + ": alpha outside (-1, q-1)");
            continue;
          }
          if (c.kind == CheckKind::vanishing_trace && !cfg.in_vanishing_window()) {
            exclude(tag + ": alpha outside (-q, -1]");
            continue;
          }
          const bool boundary_kind = c.kind == CheckKind::besov_equivalence ||
                                     c.kind == CheckKind::extension_bound || c.kind == CheckKind::extension_limit;
          const bool halfspace_kind = c.kind == CheckKind::lp_trace || c.kind == CheckKind::besov_trace ||
                                      c.kind == CheckKind::vanishing_trace;
          if (halfspace_kind != (h.domain == DomainTag::halfspace)) {
            exclude(tag + ": family domain does not match the check");
            continue;
          }
          if ((c.kind == CheckKind::lp_trace || c.kind == CheckKind::besov_trace) &&
              (!h.halfspace->trace() || !h.has_gradient())) {
            exclude(tag + ": no boundary restriction or gradient");
            continue;
          }
          if (boundary_kind && !(smoothness_order(cfg) < h.boundary->besov_ceiling(cfg.p))) {
            exclude(tag + ": ell >= Besov ceiling");
            continue;
          }
          switch (c.kind) {
            case CheckKind::hardy_polar:
              for (double theta : thetas) {
                for (double beta : betas) {
                  if (!(beta < h.dim() - 1.0 / theta) || !(beta * theta > -1.0)) {
                    exclude(tag + " theta=" + fmt(theta) + " beta=" + fmt(beta) +
                            ": needs beta < d - 1/theta and beta*theta > -1");
                    continue;
                  }
                  for (double a : as) add(f, cfg, {{"theta", theta}, {"beta", beta}, {"a", a_json(a)}});
                }
              }
              break;
            case CheckKind::convolution:
              for (double delta : deltas) add(f, cfg, {{"delta", delta}});
              break;
            case CheckKind::extension_bound:
              add(f, cfg, {{"k_max", c.k_max}});
              break;
            case CheckKind::extension_limit:
              add(f, cfg, {{"k_max", c.k_max}, {"s_lo", c.s_lo}, {"s_hi", c.s_hi}});
              break;
            default:
              add(f, cfg, json::object());
              break;
          }
        }
      }
    }
  }
  return out;
}

std::vector<ComparisonReport> RunResult::all_reports() const {
  std::vector<ComparisonReport> out;
  for (const auto& c : campaigns) out.insert(out.end(), c.reports.begin(), c.reports.end());
  out.insert(out.end(), refinements.begin(), refinements.end());
  return out;
}

std::size_t RunResult::failures() const {
  std::size_t n = 0;
  for (const auto& r : all_reports()) n += r.status == Status::fail;
  return n;
}

std::vector<std::string> RunResult::problems(const Tolerances& tol) const {
  std::vector<std::string> out;
  for (const auto& c : campaigns) {
    const auto& s = c.summary;
    if (s.failed) out.push_back(to_string(s.kind) + ": " + std::to_string(s.failed) + " FAIL");
    if (!s.ok(tol) && !s.failed) out.push_back(to_string(s.kind) + ": INCONCLUSIVE fraction or C_emp out of bounds");
  }
  for (const auto& r : refinements) {
    if (r.status == Status::fail) out.push_back(r.check_id + ": drift " + std::to_string(r.lhs));
  }
  return out;
}

json RunResult::summary_json(const Tolerances& tol) const {
  json j = json::object();
  json cs = json::array();
  for (const auto& c : campaigns) {
    json s = c.summary.to_json();
    s["ok"] = c.summary.ok(tol);
    cs.push_back(s);
  }
  j["campaigns"] = cs;
  std::size_t refine_pass = 0;
  double refine_drift = 0.0;
  for (const auto& r : refinements) {
    refine_pass += r.status == Status::pass;
    refine_drift = std::max(refine_drift, r.lhs);
  }
  j["refinements"] = {{"total", refinements.size()}, {"passed", refine_pass}, {"max_drift", number(refine_drift)}};
  j["failures"] = failures();
  return j;
}

RunResult run_config(const RunConfig& cfg) {
  HarnessOptions opts;
  opts.spec = cfg.quadrature;
  opts.tol = cfg.tolerances;
  opts.ceilings = cfg.ceilings;
  opts.workers = cfg.workers;
  opts.timings = cfg.output.timings;
  RunResult out;
  for (const auto& c : cfg.campaigns) {
    std::vector<std::string> excluded;
    auto inst = build_instances(c, &excluded);
    if (inst.empty()) throw ConfigError("campaign '" + to_string(c.kind) + "' selects no instances");
    auto res = run_campaign(c.kind, inst, opts, excluded);
    if (c.refine_levels > 0) {
      std::sort(inst.begin(), inst.end(),
                [](const CheckInstance& x, const CheckInstance& y) { return x.key() < y.key(); });
      const std::size_t n = c.refine_count > 0 ? std::min<std::size_t>(c.refine_count, inst.size()) : inst.size();
      for (std::size_t i = 0; i < n; ++i) out.refinements.push_back(refinement_study(inst[i], c.refine_levels, opts));
    }
    out.campaigns.push_back(std::move(res));
  }
  return out;
}

void write_outputs(const RunConfig& cfg, const RunResult& result) {
  const auto reports = result.all_reports();
  if (!cfg.output.jsonl.empty()) {
    std::ofstream out(cfg.output.jsonl, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + cfg.output.jsonl + "'");
    for (const auto& r : reports) out << serialize(r) << "\n";
  }
  if (!cfg.output.csv.empty()) {
    std::ofstream out(cfg.output.csv, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + cfg.output.csv + "'");
    out << csv_header() << "\n";
    for (const auto& r : reports) out << csv_row(r) << "\n";
  }
  if (!cfg.output.summary.empty()) {
    std::ofstream out(cfg.output.summary, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + cfg.output.summary + "'");
    out << result.summary_json(cfg.tolerances).dump(2) << "\n";
  }
}

}  // namespace tracekit
