#include "tracekit/tracekit.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <sstream>
#include <string>

#include <json.hpp>

#include "tracekit/error.hpp"
#include "tracekit/functions.hpp"
#include "tracekit/hardy.hpp"
#include "tracekit/harness.hpp"
#include "tracekit/norms.hpp"
#include "tracekit/report.hpp"
#include "tracekit/run_config.hpp"
#include "tracekit/smoothing.hpp"

using nlohmann::json;
using namespace tracekit;

struct tk_function {
  FunctionHandle handle;
};

namespace {

thread_local std::string g_last_error;

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <class F>
tk_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return TK_OK;
  } catch (const ArgumentError& e) {
    g_last_error = e.what();
    return TK_INVALID_ARGUMENT;
  } catch (const json::exception& e) {
    g_last_error = std::string("malformed JSON: ") + e.what();
    return TK_INVALID_ARGUMENT;
  } catch (const DomainError& e) {
    g_last_error = e.what();
    return TK_DOMAIN;
  } catch (const NumericError& e) {
    g_last_error = e.what();
    return TK_NUMERIC;
  } catch (const ConfigError& e) {
    g_last_error = e.what();
    return TK_CONFIG;
  } catch (const CheckFailed& e) {
    g_last_error = e.what();
    return TK_CHECK_FAILED;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TK_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return TK_INTERNAL;
  }
}

void require(const void* p, const char* name) {
  if (!p) throw ArgumentError(std::string(name) + " must not be null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse(const char* text, const char* name) {
  require(text, name);
  return json::parse(text);
}

QuadratureSpec spec_of(const tk_quadrature* q) {
  QuadratureSpec s;
  if (q) {
    s.box_radius = q->box_radius;
    s.panels_per_axis = q->panels_per_axis;
    s.points_per_panel = q->points_per_panel;
    s.vertical_cap = q->vertical_cap;
    s.vertical_panels = q->vertical_panels;
    s.grading_exponent = q->grading_exponent;
    s.radial_octaves = q->radial_octaves;
    s.directions = q->directions;
    s.seed = q->seed;
  }
  s.validate();
  return s;
}

const BoundaryFunction& boundary(const tk_function* f) {
  require(f, "function");
  if (!f->handle.boundary) throw DomainError("expected a function on R^d, got a half-space family");
  return *f->handle.boundary;
}

const HalfSpaceFunction& halfspace(const tk_function* f) {
  require(f, "function");
  if (!f->handle.halfspace) throw DomainError("expected a half-space family, got a function on R^d");
  return *f->handle.halfspace;
}

std::vector<double> exponents(const double* p, size_t d, const tk_function* f) {
  require(p, "p");
  if (static_cast<int>(d) != tk_function_dim(f)) throw DomainError("length of p must equal the dimension");
  std::vector<double> out(p, p + d);
  ExponentConfig::make(out, 2.0, 0.0);
  return out;
}

ExponentConfig config_for(const char* cfg_json, const tk_function* f) {
  ExponentConfig cfg = config_from_json(parse(cfg_json, "cfg_json"));
  if (cfg.d != tk_function_dim(f)) throw DomainError("configuration dimension does not match the function");
  return cfg;
}

}  // namespace

extern "C" {

const char* tk_last_error(void) { return g_last_error.c_str(); }

void tk_string_free(char* s) { std::free(s); }

const char* tk_version(void) { return "0.1.0"; }

void tk_quadrature_defaults(tk_quadrature* out) {
  if (!out) return;
  const QuadratureSpec s;
  out->box_radius = s.box_radius;
  out->panels_per_axis = s.panels_per_axis;
  out->points_per_panel = s.points_per_panel;
  out->vertical_cap = s.vertical_cap;
  out->vertical_panels = s.vertical_panels;
  out->grading_exponent = s.grading_exponent;
  out->radial_octaves = s.radial_octaves;
  out->directions = s.directions;
  out->seed = s.seed;
}

tk_status tk_smoothness_order(double q, double alpha, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = smoothness_order(q, alpha);
  });
}

tk_status tk_function_create(const char* family_json, tk_function** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    const FamilySpec spec = family_from_json(parse(family_json, "family_json"));
    *out = new tk_function{family_instantiate(spec)};
  });
}

void tk_function_free(tk_function* f) { delete f; }

int tk_function_dim(const tk_function* f) { return f ? f->handle.dim() : 0; }

int tk_function_is_halfspace(const tk_function* f) {
  return f && f->handle.domain == DomainTag::halfspace ? 1 : 0;
}

tk_status tk_function_eval(const tk_function* f, const double* x, double y, double* out) {
  return guarded([&] {
    require(f, "function");
    require(x, "x");
    require(out, "out");
    const std::span<const double> xs(x, static_cast<size_t>(f->handle.dim()));
    *out = f->handle.halfspace ? f->handle.halfspace->value(xs, y) : f->handle.boundary->value(xs);
  });
}

tk_status tk_mixed_lebesgue_norm(const tk_function* f, const double* p, size_t d, const tk_quadrature* q,
                                 double* out) {
  return guarded([&] {
    require(out, "out");
    *out = mixed_lebesgue_norm(boundary(f), exponents(p, d, f), spec_of(q));
  });
}

tk_status tk_weighted_norm(const tk_function* u, const char* cfg_json, const tk_quadrature* q, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = weighted_mixed_norm(halfspace(u), config_for(cfg_json, u), spec_of(q));
  });
}

tk_status tk_sobolev_norm(const tk_function* u, const char* cfg_json, const tk_quadrature* q, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = sobolev_norm(halfspace(u), config_for(cfg_json, u), spec_of(q));
  });
}

tk_status tk_modulus(const tk_function* f, double delta, const double* p, size_t d, const tk_quadrature* q,
                     double* out) {
  return guarded([&] {
    require(out, "out");
    if (!(delta > 0.0)) throw DomainError("delta must be positive");
    *out = modulus(boundary(f), delta, exponents(p, d, f), spec_of(q));
  });
}

tk_status tk_besov_norm(const tk_function* f, const char* cfg_json, tk_besov_variant variant, double a,
                        const tk_quadrature* q, double* norm, double* seminorm) {
  return guarded([&] {
    require(norm, "norm");
    const ExponentConfig cfg = config_for(cfg_json, f);
    boundary(f);
    BesovVariant v;
    switch (variant) {
      case TK_BESOV_DIRECT: v = BesovVariant::direct(); break;
      case TK_BESOV_INTEGRAL:
        if (!(a > 0.0)) throw DomainError("integral variant needs a > 0");
        v = BesovVariant::integral(a);
        break;
      case TK_BESOV_DYADIC: v = BesovVariant::dyadic(); break;
      default: throw ArgumentError("unknown Besov variant");
    }
    const BesovNorm b = besov_norm(f->handle.boundary, cfg, v, spec_of(q));
    *norm = b.total();
    if (seminorm) *seminorm = b.seminorm.value;
  });
}

tk_status tk_hardy_check(const char* shape, double q, double sigma, double a, double eps, const tk_quadrature* quad,
                         char** report_json) {
  return guarded([&] {
    require(shape, "shape");
    require(report_json, "report_json");
    HardyParams hp{q, sigma, a};
    hp.validate();
    const std::string name(shape);
    const bool closed = name == "zero" || name == "constant" || name == "near-extremal";
    const Tolerances tol;
    const ComparisonReport r =
        hardy_check(hardy_shape(name, hp, eps), hp, spec_of(quad), closed ? tol.closed_form : tol.quadrature);
    *report_json = dup_string(serialize(r));
  });
}

tk_status tk_convolution_check(const tk_function* f, double delta, const double* p, size_t d,
                               const tk_quadrature* q, double ceiling, char** reports_json) {
  return guarded([&] {
    require(reports_json, "reports_json");
    boundary(f);
    const auto [a, b] =
        convolution_bounds_check(f->handle.boundary, delta, exponents(p, d, f), spec_of(q), ceiling, Tolerances{}.quadrature);
    *reports_json = dup_string(json::array({a.to_json(), b.to_json()}).dump());
  });
}

tk_status tk_extension_profile(const tk_function* g, const char* cfg_json, int k_max, int s_lo, int s_hi,
                               const tk_quadrature* q, double* out, size_t out_len) {
  return guarded([&] {
    require(out, "out");
    boundary(g);
    const ExponentConfig cfg = config_for(cfg_json, g);
    const QuadratureSpec spec = spec_of(q);
    auto e = extend(g->handle.boundary, cfg, k_max, spec);
    const auto prof = extension_limit_profile(*e, cfg, s_lo, s_hi, spec);
    if (out_len < prof.size()) throw ArgumentError("output buffer too small");
    std::copy(prof.begin(), prof.end(), out);
  });
}

tk_status tk_extension_eval(const tk_function* g, int k_max, const double* x, double y, const tk_quadrature* q,
                            double* out) {
  return guarded([&] {
    require(x, "x");
    require(out, "out");
    boundary(g);
    const ExtensionHandle e(g->handle.boundary, k_max, spec_of(q));
    *out = e.value({x, static_cast<size_t>(e.dim())}, y);
  });
}

tk_status tk_extension_slices_csv(const tk_function* g, const char* cfg_json, int k_max, int s_lo, int s_hi,
                                  const tk_quadrature* q, char** csv) {
  return guarded([&] {
    require(csv, "csv");
    boundary(g);
    const ExponentConfig cfg = config_for(cfg_json, g);
    const QuadratureSpec spec = spec_of(q);
    const double ell = smoothness_order(cfg);
    auto e = extend(g->handle.boundary, cfg, k_max, spec);
    if (s_lo < 1 || s_hi > k_max || s_lo > s_hi) throw DomainError("slice range must lie within {1, ..., k_max}");
    std::ostringstream os;
    os.precision(17);
    os << "y,raw,scaled\n";
    for (int s = s_lo; s <= s_hi; ++s) {
      const double y = std::ldexp(1.0, -s);
      const double raw = extension_deviation(*e, y, cfg.p, spec);
      os << y << "," << raw << "," << std::pow(y, -ell) * raw << "\n";
    }
    *csv = dup_string(os.str());
  });
}

tk_status tk_trace(const tk_function* u, tk_function** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    const HalfSpaceFunction& h = halfspace(u);
    auto g = trace_restrict(h);
    FunctionHandle fh;
    fh.spec = FamilySpec{"trace", {}, {u->handle.spec}};
    fh.domain = DomainTag::boundary;
    fh.boundary = g;
    *out = new tk_function{fh};
  });
}

tk_status tk_run_instance(const char* instance_json, const tk_quadrature* q, char** reports_json) {
  return guarded([&] {
    require(reports_json, "reports_json");
    const CheckInstance inst = CheckInstance::from_json(parse(instance_json, "instance_json"));
    HarnessOptions opts;
    opts.spec = spec_of(q);
    json arr = json::array();
    for (const auto& r : run_instance(inst, opts)) arr.push_back(r.to_json());
    *reports_json = dup_string(arr.dump());
  });
}

tk_status tk_refine(const char* instance_json, int levels, const tk_quadrature* q, char** report_json) {
  return guarded([&] {
    require(report_json, "report_json");
    const CheckInstance inst = CheckInstance::from_json(parse(instance_json, "instance_json"));
    HarnessOptions opts;
    opts.spec = spec_of(q);
    *report_json = dup_string(serialize(refinement_study(inst, levels, opts)));
  });
}

tk_status tk_config_default(char** toml) {
  return guarded([&] {
    require(toml, "toml");
    *toml = dup_string(to_toml(default_run_config()));
  });
}

tk_status tk_config_normalize(const char* path, char** toml) {
  return guarded([&] {
    require(path, "path");
    require(toml, "toml");
    *toml = dup_string(to_toml(load_run_config(path)));
  });
}

tk_status tk_run_config(const char* path, int64_t seed, const char* out_jsonl, const char* out_csv,
                        char** summary_json, size_t* failures) {
  return guarded([&] {
    require(path, "path");
    RunConfig cfg = load_run_config(path);
    if (seed >= 0) cfg.quadrature.seed = static_cast<std::uint64_t>(seed);
    if (out_jsonl) cfg.output.jsonl = out_jsonl;
    if (out_csv) cfg.output.csv = out_csv;
    const RunResult res = run_config(cfg);
    write_outputs(cfg, res);
    if (summary_json) *summary_json = dup_string(res.summary_json(cfg.tolerances).dump());
    if (failures) *failures = res.failures();
  });
}

}  // extern "C"
