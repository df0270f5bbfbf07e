#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "tracekit/exponents.hpp"
#include "tracekit/functions.hpp"
#include "tracekit/quadrature.hpp"

namespace tracekit {

enum class Status { pass, fail, inconclusive };

std::string to_string(Status s);
Status status_from_string(const std::string& s);

/// One verified inequality instance.
struct ComparisonReport {
  std::string check_id;
  nlohmann::json params = nlohmann::json::object();
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 1.0;
  double ratio = 0.0;
  Status status = Status::pass;
  int mesh_level = 0;
  std::int64_t runtime_ms = 0;

  /// ratio = lhs / (constant·rhs) with 0/0 → 0; status PASS iff
  /// ratio <= 1 + tol. tol is recorded in params.
  void decide(double tol);
  /// Two-sided agreement |lhs/rhs − 1| <= tol, used for closed-form values.
  void decide_equal(double tol);
  void mark_inconclusive(const std::string& reason);

  nlohmann::json to_json() const;
  static ComparisonReport from_json(const nlohmann::json& j);
};

/// Single JSON object, fields in schema order, no whitespace.
std::string serialize(const ComparisonReport& r);

nlohmann::json to_json(const ExponentConfig& cfg);
nlohmann::json to_json(const FamilySpec& spec);
nlohmann::json to_json(const QuadratureSpec& spec);
FamilySpec family_from_json(const nlohmann::json& j);
/// {"p": [...], "q": ..., "alpha": ...}; d follows from p.
ExponentConfig config_from_json(const nlohmann::json& j);

/// JSON number that tolerates ±∞ and NaN by falling back to strings.
nlohmann::json number(double v);

std::string csv_header();
std::string csv_row(const ComparisonReport& r);

}  // namespace tracekit
