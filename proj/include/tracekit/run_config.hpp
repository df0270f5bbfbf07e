#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tracekit/functions.hpp"
#include "tracekit/harness.hpp"
#include "tracekit/quadrature.hpp"

namespace tracekit {

/// One `[[campaign]]` table. Empty lists select the kind's default matrix.
struct CampaignConfig {
  CheckKind kind = CheckKind::hardy;
  std::vector<FamilySpec> families;
  std::vector<std::vector<double>> p;
  std::vector<double> q;
  std::vector<double> alpha;
  // hardy / hardy-polar
  std::vector<double> sigma;
  std::vector<double> a;  ///< may contain +∞
  std::vector<std::string> shapes;
  double eps = 0.01;
  std::vector<double> theta;
  std::vector<double> beta;
  // convolution
  std::vector<double> deltas;
  // extension kinds
  int k_max = 12;
  int s_lo = 4;
  int s_hi = 9;
  // refinement of the first `refine_count` instances (sorted by key) at
  // `refine_levels` levels; 0 disables
  int refine_levels = 0;
  int refine_count = 0;

  /// True when every matrix list is empty.
  bool uses_defaults() const;
  bool operator==(const CampaignConfig&) const = default;
};

struct OutputConfig {
  std::string jsonl;
  std::string csv;
  std::string summary;
  bool timings = false;
  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  QuadratureSpec quadrature;
  Tolerances tolerances;
  Ceilings ceilings;
  OutputConfig output;
  int workers = 0;
  std::vector<CampaignConfig> campaigns;

  bool operator==(const RunConfig&) const = default;
};

/// Parses TOML text; throws ConfigError on syntax errors, unknown keys,
/// wrong types and out-of-range values.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);
/// TOML text that parses back to an equal RunConfig.
std::string to_toml(const RunConfig& cfg);
/// Every field at its default plus one default campaign per check kind.
RunConfig default_run_config();

/// Instances of one campaign; combinations outside a hypothesis window are
/// skipped and noted in `excluded`.
std::vector<CheckInstance> build_instances(const CampaignConfig& c, std::vector<std::string>* excluded);

struct RunResult {
  std::vector<CampaignResult> campaigns;
  std::vector<ComparisonReport> refinements;
  /// Every report (campaigns then refinements) in output order.
  std::vector<ComparisonReport> all_reports() const;
  std::size_t failures() const;
  /// Summary problems: FAIL reports, too many INCONCLUSIVE, non-finite C_emp.
  std::vector<std::string> problems(const Tolerances& tol) const;
  nlohmann::json summary_json(const Tolerances& tol) const;
};

RunResult run_config(const RunConfig& cfg);

/// Writes JSONL (one report per line), optional CSV and summary per the
/// output section.
void write_outputs(const RunConfig& cfg, const RunResult& result);

}  // namespace tracekit
