// tracekit command-line front end. Links only the C interface.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tracekit/tracekit.h"

using nlohmann::json;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitError = 3;

struct Failure {
  tk_status status;
  std::string message;
};

void check(tk_status s) {
  if (s != TK_OK) throw Failure{s, tk_last_error()};
}

int exit_code_of(tk_status s) {
  switch (s) {
    case TK_INVALID_ARGUMENT:
    case TK_DOMAIN:
    case TK_CONFIG: return kExitConfig;
    case TK_CHECK_FAILED: return kExitFail;
    default: return kExitError;
  }
}

std::string take(char* s) {
  std::string out = s ? s : "";
  tk_string_free(s);
  return out;
}

struct FunctionPtr {
  tk_function* f = nullptr;
  FunctionPtr() = default;
  FunctionPtr(const FunctionPtr&) = delete;
  FunctionPtr& operator=(const FunctionPtr&) = delete;
  ~FunctionPtr() { tk_function_free(f); }
};

double parse_real(const std::string& s) {
  if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t n = 0;
  const double v = std::stod(s, &n);
  if (n != s.size()) throw Failure{TK_INVALID_ARGUMENT, "not a number: " + s};
  return v;
}

bool is_halfspace_kind(const std::string& k) {
  return k == "vertical-power" || k == "log-decay" || k == "ramp-cutoff";
}

// Function selection shared by the subcommands.
struct FamilyArgs {
  std::string family;
  std::string profile = "bump";
  int d = 1;
  std::vector<std::string> params;

  void add(CLI::App* app, const std::string& default_family) {
    family = default_family;
    app->add_option("--family", family, "registry kind, or a JSON family spec")->capture_default_str();
    app->add_option("--d", d, "dimension of the boundary variable x")->capture_default_str();
    app->add_option("--profile", profile, "horizontal profile of half-space kinds")->capture_default_str();
    app->add_option("--param", params, "extra family parameter key=value (repeatable)");
  }

  json spec() const {
    if (!family.empty() && family.front() == '{') return json::parse(family);
    json p = json::object();
    for (const auto& kv : params) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Failure{TK_INVALID_ARGUMENT, "--param expects key=value, got " + kv};
      p[kv.substr(0, eq)] = parse_real(kv.substr(eq + 1));
    }
    if (is_halfspace_kind(family)) {
      json child = {{"kind", profile}, {"params", {{"d", d}}}};
      return {{"kind", family}, {"params", p}, {"children", json::array({child})}};
    }
    p["d"] = d;
    return {{"kind", family}, {"params", p}};
  }

  void create(FunctionPtr& out) const { check(tk_function_create(spec().dump().c_str(), &out.f)); }
};

struct ExponentArgs {
  std::vector<double> p{2.0};
  double q = 2.0;
  double alpha = 0.0;

  void add(CLI::App* app) {
    app->add_option("--p", p, "horizontal exponents p_1..p_d (one value is broadcast)")->capture_default_str();
    app->add_option("--q", q, "vertical exponent")->capture_default_str();
    app->add_option("--alpha", alpha, "weight exponent of y^alpha")->capture_default_str();
  }

  std::vector<double> vec(int d) const {
    if (p.size() == 1) return std::vector<double>(static_cast<std::size_t>(d), p.front());
    if (static_cast<int>(p.size()) != d) throw Failure{TK_INVALID_ARGUMENT, "--p needs 1 or d values"};
    return p;
  }

  json cfg(int d) const { return {{"p", vec(d)}, {"q", q}, {"alpha", alpha}}; }
};

struct QuadArgs {
  tk_quadrature q{};

  void add(CLI::App* app) {
    tk_quadrature_defaults(&q);
    auto* g = "Quadrature";
    app->add_option("--box-radius", q.box_radius, "truncation radius for non-compact supports")
        ->capture_default_str()->group(g);
    app->add_option("--panels", q.panels_per_axis, "composite panels per axis")->capture_default_str()->group(g);
    app->add_option("--gauss-order", q.points_per_panel, "Gauss-Legendre points per panel")
        ->capture_default_str()->group(g);
    app->add_option("--vertical-cap", q.vertical_cap, "upper limit of the vertical integrals")
        ->capture_default_str()->group(g);
    app->add_option("--vertical-panels", q.vertical_panels, "graded panels in y")->capture_default_str()->group(g);
    app->add_option("--grading", q.grading_exponent, "grading exponent (0: max(1, 3/(1+alpha)))")
        ->capture_default_str()->group(g);
    app->add_option("--octaves", q.radial_octaves, "dyadic octaves of the modulus radius integral")
        ->capture_default_str()->group(g);
    app->add_option("--directions", q.directions, "sphere directions for the modulus (0: dimension default)")
        ->capture_default_str()->group(g);
    app->add_option("--seed", q.seed, "seed of the direction set")->capture_default_str()->group(g);
  }
};

void print_report(const json& r) {
  std::printf("%-36s %-12s lhs=%.10g rhs=%.10g constant=%.10g ratio=%.10g\n",
              r.at("check_id").get<std::string>().c_str(), r.at("status").get<std::string>().c_str(),
              r.at("lhs").is_number() ? r.at("lhs").get<double>() : NAN,
              r.at("rhs").is_number() ? r.at("rhs").get<double>() : NAN,
              r.at("constant").is_number() ? r.at("constant").get<double>() : NAN,
              r.at("ratio").is_number() ? r.at("ratio").get<double>() : NAN);
}

bool any_fail(const json& reports) {
  for (const auto& r : reports)
    if (r.at("status") == "FAIL") return true;
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tracekit: weighted mixed-norm function spaces and trace inequalities"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tk_version()));

  // norm
  auto* norm = app.add_subcommand("norm", "compute a norm of a registry function");
  FamilyArgs norm_f;
  ExponentArgs norm_e;
  QuadArgs norm_q;
  std::string norm_kind = "lp";
  double norm_delta = 0.5;
  norm_f.add(norm, "hat");
  norm_e.add(norm);
  norm_q.add(norm);
  norm->add_option("--kind", norm_kind, "lp | modulus | besov (R^d); weighted | sobolev (half-space)")
      ->capture_default_str()
      ->check(CLI::IsMember({"lp", "modulus", "besov", "weighted", "sobolev"}));
  norm->add_option("--delta", norm_delta, "radius of the modulus of continuity")->capture_default_str();

  // hardy
  auto* hardy = app.add_subcommand("hardy", "one-dimensional weighted Hardy inequality");
  double hardy_q = 2.0, hardy_sigma = 0.0, hardy_eps = 0.01;
  std::string hardy_a = "1", hardy_family = "near-extremal";
  QuadArgs hardy_quad;
  hardy->add_option("--q", hardy_q, "exponent q >= 1")->capture_default_str();
  hardy->add_option("--sigma", hardy_sigma, "weight exponent, sigma < 1 - 1/q")->capture_default_str();
  hardy->add_option("--a", hardy_a, "upper limit (a number or inf)")->capture_default_str();
  hardy->add_option("--family", hardy_family,
                    "zero | constant | near-extremal | exp-linear | ramp-unit | sine-unit | sqrt-exp | rational | "
                    "oscillating")
      ->capture_default_str();
  hardy->add_option("--eps", hardy_eps, "offset of the near-extremal power")->capture_default_str();
  hardy_quad.add(hardy);

  // besov
  auto* besov = app.add_subcommand("besov", "Besov norm in the three variants and their ratios");
  FamilyArgs besov_f;
  ExponentArgs besov_e;
  QuadArgs besov_q;
  std::string besov_a = "1";
  besov_f.add(besov, "hat");
  besov_e.add(besov);
  besov_q.add(besov);
  besov->add_option("--a", besov_a, "upper limit of the integral variant (a number or inf)")->capture_default_str();

  // extend
  auto* extend = app.add_subcommand("extend", "build the extension E(g) and its slice profile");
  FamilyArgs ext_f;
  ExponentArgs ext_e;
  QuadArgs ext_q;
  int ext_kmax = 12, ext_slo = 4, ext_shi = 9;
  std::string ext_csv;
  ext_f.add(extend, "hat");
  ext_e.add(extend);
  ext_q.add(extend);
  extend->add_option("--kmax", ext_kmax, "number of dyadic layers")->capture_default_str();
  extend->add_option("--s-lo", ext_slo, "first slice index, y = 2^-s")->capture_default_str();
  extend->add_option("--s-hi", ext_shi, "last slice index")->capture_default_str();
  extend->add_option("--emit-slices", ext_csv, "write y,raw,scaled rows to this CSV file");

  // trace
  auto* trace = app.add_subcommand("trace", "boundary restriction and the trace inequalities");
  FamilyArgs tr_f;
  ExponentArgs tr_e;
  QuadArgs tr_q;
  tr_f.add(trace, "ramp-cutoff");
  tr_e.add(trace);
  tr_q.add(trace);

  // verify
  auto* verify = app.add_subcommand("verify", "run the campaigns of a configuration file");
  std::string ver_config, ver_out, ver_csv, ver_summary;
  std::int64_t ver_seed = -1;
  verify->add_option("--config", ver_config, "TOML configuration file")->required()->check(CLI::ExistingFile);
  verify->add_option("--out", ver_out, "JSONL report path (overrides [output] jsonl)");
  verify->add_option("--csv", ver_csv, "CSV report path (overrides [output] csv)");
  verify->add_option("--seed", ver_seed, "direction-set seed (-1 keeps the file's)")->capture_default_str();

  // refine
  auto* refine = app.add_subcommand("refine", "mesh-refinement stability study of one instance");
  std::string ref_kind = "besov-equivalence", ref_instance;
  FamilyArgs ref_f;
  ExponentArgs ref_e;
  QuadArgs ref_q;
  int ref_levels = 2, ref_kmax = 12;
  double ref_delta = 0.125;
  refine->add_option("--check", ref_kind, "check kind")->capture_default_str();
  refine->add_option("--instance", ref_instance, "full instance as JSON (overrides the other flags)");
  ref_f.add(refine, "hat");
  ref_e.add(refine);
  ref_q.add(refine);
  refine->add_option("--levels", ref_levels, "refinement levels, 2..4")->capture_default_str();
  refine->add_option("--kmax", ref_kmax, "extension layers (extension kinds)")->capture_default_str();
  refine->add_option("--delta", ref_delta, "mollifier radius (convolution)")->capture_default_str();

  // config
  auto* config = app.add_subcommand("config", "print the default configuration or validate a file");
  std::string cfg_check;
  config->add_option("--check", cfg_check, "parse this file and print it normalized")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*norm) {
      FunctionPtr f;
      norm_f.create(f);
      const int d = tk_function_dim(f.f);
      const auto p = norm_e.vec(d);
      const std::string cfg = norm_e.cfg(d).dump();
      double v = 0.0;
      if (norm_kind == "lp") {
        check(tk_mixed_lebesgue_norm(f.f, p.data(), p.size(), &norm_q.q, &v));
      } else if (norm_kind == "modulus") {
        check(tk_modulus(f.f, norm_delta, p.data(), p.size(), &norm_q.q, &v));
      } else if (norm_kind == "besov") {
        double semi = 0.0;
        check(tk_besov_norm(f.f, cfg.c_str(), TK_BESOV_DIRECT, 0.0, &norm_q.q, &v, &semi));
        std::printf("seminorm %.12f\n", semi);
      } else if (norm_kind == "weighted") {
        check(tk_weighted_norm(f.f, cfg.c_str(), &norm_q.q, &v));
      } else {
        check(tk_sobolev_norm(f.f, cfg.c_str(), &norm_q.q, &v));
      }
      std::printf("%s %.12f\n", norm_kind.c_str(), v);
      return 0;
    }

    if (*hardy) {
      const std::string r =
          take([&] {
            char* s = nullptr;
            check(tk_hardy_check(hardy_family.c_str(), hardy_q, hardy_sigma, parse_real(hardy_a), hardy_eps,
                                 &hardy_quad.q, &s));
            return s;
          }());
      const json j = json::parse(r);
      const double lhs = j.at("lhs").get<double>(), rhs = j.at("rhs").get<double>();
      std::printf("lhs %.12g\nrhs %.12g\nlhs/rhs %.12g\nconstant %.12g\nstatus %s\n", lhs, rhs,
                  rhs > 0 ? lhs / rhs : 0.0, j.at("constant").get<double>(),
                  j.at("status").get<std::string>().c_str());
      return j.at("status") == "FAIL" ? kExitFail : 0;
    }

    if (*besov) {
      FunctionPtr f;
      besov_f.create(f);
      const std::string cfg = besov_e.cfg(tk_function_dim(f.f)).dump();
      const double a = parse_real(besov_a);
      const char* names[] = {"direct", "integral", "dyadic"};
      const tk_besov_variant vs[] = {TK_BESOV_DIRECT, TK_BESOV_INTEGRAL, TK_BESOV_DYADIC};
      double n[3], s[3];
      for (int i = 0; i < 3; ++i) {
        check(tk_besov_norm(f.f, cfg.c_str(), vs[i], a, &besov_q.q, &n[i], &s[i]));
        std::printf("%-9s norm %.12g seminorm %.12g\n", names[i], n[i], s[i]);
      }
      for (int i = 0; i < 3; ++i)
        for (int k = i + 1; k < 3; ++k)
          std::printf("%s/%s %.12g\n", names[i], names[k], n[k] > 0 ? n[i] / n[k] : 0.0);
      return 0;
    }

    if (*extend) {
      FunctionPtr g;
      ext_f.create(g);
      const std::string cfg = ext_e.cfg(tk_function_dim(g.f)).dump();
      if (ext_shi < ext_slo) throw Failure{TK_INVALID_ARGUMENT, "--s-hi must be >= --s-lo"};
      std::vector<double> prof(static_cast<std::size_t>(ext_shi - ext_slo + 1));
      check(tk_extension_profile(g.f, cfg.c_str(), ext_kmax, ext_slo, ext_shi, &ext_q.q, prof.data(), prof.size()));
      for (int s = ext_slo; s <= ext_shi; ++s) std::printf("L_%d %.12g\n", s, prof[static_cast<std::size_t>(s - ext_slo)]);
      if (!ext_csv.empty()) {
        char* csv = nullptr;
        check(tk_extension_slices_csv(g.f, cfg.c_str(), ext_kmax, ext_slo, ext_shi, &ext_q.q, &csv));
        std::ofstream out(ext_csv, std::ios::binary);
        out << take(csv);
        if (!out) throw Failure{TK_CONFIG, "cannot write " + ext_csv};
      }
      return 0;
    }

    if (*trace) {
      FunctionPtr u;
      tr_f.create(u);
      if (!tk_function_is_halfspace(u.f)) throw Failure{TK_DOMAIN, "trace needs a half-space family"};
      const int d = tk_function_dim(u.f);
      FunctionPtr g;
      if (tk_trace(u.f, &g.f) == TK_OK) {
        const std::vector<double> origin(static_cast<std::size_t>(d), 0.0);
        double v = 0.0;
        check(tk_function_eval(g.f, origin.data(), 0.0, &v));
        std::printf("trace(0) %.12g\n", v);
      } else {
        std::printf("trace: %s\n", tk_last_error());
      }
      bool failed = false;
      for (const char* kind : {"lp-trace", "besov-trace"}) {
        const json inst = {{"kind", kind}, {"family", tr_f.spec()}, {"cfg", tr_e.cfg(d)}, {"extra", json::object()}};
        char* s = nullptr;
        check(tk_run_instance(inst.dump().c_str(), &tr_q.q, &s));
        const json reports = json::parse(take(s));
        for (const auto& r : reports) print_report(r);
        failed = failed || any_fail(reports);
      }
      return failed ? kExitFail : 0;
    }

    if (*verify) {
      char* summary = nullptr;
      std::size_t failures = 0;
      check(tk_run_config(ver_config.c_str(), ver_seed, ver_out.empty() ? nullptr : ver_out.c_str(),
                          ver_csv.empty() ? nullptr : ver_csv.c_str(), &summary, &failures));
      const json j = json::parse(take(summary));
      bool ok = true;
      for (const auto& c : j.at("campaigns")) {
        const bool c_ok = c.at("ok").get<bool>();
        ok = ok && c_ok;
        std::printf("%-18s total %4zu pass %4zu fail %3zu inconclusive %3zu C_emp %-12s %s\n",
                    c.at("kind").get<std::string>().c_str(), c.at("total").get<std::size_t>(),
                    c.at("passed").get<std::size_t>(), c.at("failed").get<std::size_t>(),
                    c.at("inconclusive").get<std::size_t>(), c.at("c_emp").dump().c_str(), c_ok ? "ok" : "NOT OK");
      }
      const auto& rf = j.at("refinements");
      if (rf.at("total").get<std::size_t>() > 0)
        std::printf("%-18s total %4zu pass %4zu max drift %s\n", "refinement", rf.at("total").get<std::size_t>(),
                    rf.at("passed").get<std::size_t>(), rf.at("max_drift").dump().c_str());
      std::printf("failures %zu\n", failures);
      return failures == 0 && ok ? 0 : kExitFail;
    }

    if (*refine) {
      json inst;
      if (!ref_instance.empty()) {
        inst = json::parse(ref_instance);
      } else {
        FunctionPtr f;
        ref_f.create(f);
        json extra = json::object();
        if (ref_kind == "convolution") extra["delta"] = ref_delta;
        if (ref_kind == "extension-bound" || ref_kind == "extension-limit") extra["k_max"] = ref_kmax;
        inst = {{"kind", ref_kind}, {"family", ref_f.spec()}, {"cfg", ref_e.cfg(tk_function_dim(f.f))}, {"extra", extra}};
      }
      char* s = nullptr;
      check(tk_refine(inst.dump().c_str(), ref_levels, &ref_q.q, &s));
      const json r = json::parse(take(s));
      print_report(r);
      return r.at("status") == "FAIL" ? kExitFail : 0;
    }

    if (*config) {
      char* s = nullptr;
      if (cfg_check.empty())
        check(tk_config_default(&s));
      else
        check(tk_config_normalize(cfg_check.c_str(), &s));
      std::fputs(take(s).c_str(), stdout);
      return 0;
    }
  } catch (const Failure& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return exit_code_of(e.status);
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: malformed JSON: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return 0;
}
