#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "tracekit/exponents.hpp"
#include "tracekit/functions.hpp"
#include "tracekit/quadrature.hpp"
#include "tracekit/report.hpp"

namespace tracekit {

enum class CheckKind {
  hardy,
  hardy_polar,
  convolution,
  besov_equivalence,
  lp_trace,
  besov_trace,
  extension_bound,
  extension_limit,
  vanishing_trace,
};

std::string to_string(CheckKind k);
/// Accepts the hyphenated names ("hardy-polar", "lp-trace", ...).
CheckKind check_kind_from_string(const std::string& s);
std::vector<CheckKind> all_check_kinds();
/// True for kinds whose constant is a configured ceiling rather than a
/// closed form.
bool is_empirical(CheckKind k);

struct Tolerances {
  double closed_form = 1e-6;
  double quadrature = 5e-2;
  double drift = 0.02;
  double inconclusive_fraction = 0.05;
  bool operator==(const Tolerances&) const = default;
};

/// Ceilings for the non-explicit constants.
struct Ceilings {
  double hardy_polar = 4.0;
  double convolution_derivative = 4.0;
  double besov_equivalence = 50.0;
  double lp_trace = 10.0;
  double besov_trace = 25.0;
  double extension_bound = 20.0;
  double extension_limit = 1.0;
  double vanishing_trace = 0.05;
  double of(CheckKind k) const;
  bool operator==(const Ceilings&) const = default;
};

struct HarnessOptions {
  QuadratureSpec spec;
  Tolerances tol;
  Ceilings ceilings;
  int workers = 0;      ///< 0: TRACEKIT_WORKERS or the available parallelism
  bool timings = false; ///< record runtime_ms; off keeps reports byte-stable
};

/// Worker count: explicit value, else TRACEKIT_WORKERS, else hardware threads.
int resolve_workers(int requested);

/// One (kind, family, cfg) instance. `extra` carries the kind-specific
/// parameters: hardy {q, sigma, a, shape, eps}; hardy-polar {theta, beta, a};
/// convolution {delta}; extension kinds {k_max, s_lo, s_hi}.
struct CheckInstance {
  CheckKind kind = CheckKind::hardy;
  FamilySpec family;
  ExponentConfig cfg;
  nlohmann::json extra = nlohmann::json::object();
  /// Canonical sort key.
  std::string key() const;
  nlohmann::json to_json() const;
  /// {"kind": ..., "family": {...}, "cfg": {...}, "extra": {...}}
  static CheckInstance from_json(const nlohmann::json& j);
};

/// Runs one instance. Convolution yields two reports, every other kind one.
std::vector<ComparisonReport> run_instance(const CheckInstance& inst, const HarnessOptions& opts);

/// Default instance list for a kind (the exponent matrix and family
/// set); `excluded` receives a note for every skipped combination.
std::vector<CheckInstance> default_instances(CheckKind kind, std::vector<std::string>* excluded = nullptr);

struct CampaignSummary {
  CheckKind kind = CheckKind::hardy;
  std::size_t total = 0;
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::size_t inconclusive = 0;
  double c_emp = 0.0;  ///< max lhs/rhs over PASS reports with an empirical constant
  double ceiling = 0.0;
  std::vector<std::string> excluded;
  std::vector<std::string> inconclusive_reasons;
  /// No FAIL, INCONCLUSIVE fraction within tolerance, C_emp finite.
  bool ok(const Tolerances& tol) const;
  nlohmann::json to_json() const;
};

struct CampaignResult {
  std::vector<ComparisonReport> reports;  ///< sorted by instance key
  CampaignSummary summary;
};

/// Runs the instances on the worker pool; reports come back in sorted key
/// order regardless of scheduling.
CampaignResult run_campaign(CheckKind kind, const std::vector<CheckInstance>& instances,
                            const HarnessOptions& opts, std::vector<std::string> excluded = {});

/// Re-runs the instance with panels, vertical panels and directions doubled
/// per level (levels >= 2, <= 4), plus a box-radius doubling for families
/// without compact support. PASS iff the largest relative drift of lhs, rhs
/// and ratio between successive levels is within tol.drift.
ComparisonReport refinement_study(const CheckInstance& inst, int levels, const HarnessOptions& opts);

/// besov-trace (u = ramp-cutoff(g)) and extension-bound for g under every
/// configuration at their common ℓ. Throws DomainError when the configurations
/// disagree on (q, α) or on d.
ComparisonReport ell_independence_check(const FamilySpec& g, const std::vector<ExponentConfig>& cfgs,
                                        const HarnessOptions& opts);

}  // namespace tracekit
