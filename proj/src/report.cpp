#include "tracekit/report.hpp"

#include <cmath>
#include <cstdio>

#include "tracekit/error.hpp"

namespace tracekit {

using nlohmann::json;

std::string to_string(Status s) {
  switch (s) {
    case Status::pass: return "PASS";
    case Status::fail: return "FAIL";
    case Status::inconclusive: return "INCONCLUSIVE";
  }
  return "FAIL";
}

Status status_from_string(const std::string& s) {
  if (s == "PASS") return Status::pass;
  if (s == "FAIL") return Status::fail;
  if (s == "INCONCLUSIVE") return Status::inconclusive;
  throw ConfigError("unknown status '" + s + "'");
}

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

namespace {

double number_from(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  return NAN;
}

}  // namespace

void ComparisonReport::decide(double tol) {
  const double denom = constant * rhs;
  if (lhs == 0.0 && denom == 0.0) {
    ratio = 0.0;
  } else {
    ratio = lhs / denom;
  }
  params["tol"] = tol;
  status = (std::isfinite(ratio) && ratio <= 1.0 + tol) ? Status::pass : Status::fail;
}

void ComparisonReport::decide_equal(double tol) {
  decide(tol);
  params["two_sided"] = true;
  const double rel = rhs == 0.0 ? std::abs(lhs) : std::abs(lhs / rhs - 1.0);
  status = (std::isfinite(rel) && rel <= tol) ? Status::pass : Status::fail;
}

void ComparisonReport::mark_inconclusive(const std::string& reason) {
  status = Status::inconclusive;
  params["reason"] = reason;
}

json ComparisonReport::to_json() const {
  json j = json::object();
  j["check_id"] = check_id;
  j["params"] = params;
  j["lhs"] = number(lhs);
  j["rhs"] = number(rhs);
  j["constant"] = number(constant);
  j["ratio"] = number(ratio);
  j["status"] = to_string(status);
  j["mesh_level"] = mesh_level;
  j["runtime_ms"] = runtime_ms;
  return j;
}

ComparisonReport ComparisonReport::from_json(const json& j) {
  ComparisonReport r;
  r.check_id = j.at("check_id").get<std::string>();
  r.params = j.at("params");
  r.lhs = number_from(j.at("lhs"));
  r.rhs = number_from(j.at("rhs"));
  r.constant = number_from(j.at("constant"));
  r.ratio = number_from(j.at("ratio"));
  r.status = status_from_string(j.at("status").get<std::string>());
  r.mesh_level = j.at("mesh_level").get<int>();
  r.runtime_ms = j.at("runtime_ms").get<std::int64_t>();
  return r;
}

std::string serialize(const ComparisonReport& r) {
  // Fields in schema order.
  std::string out = "{";
  auto field = [&out](const char* key, const json& v, bool last = false) {
    out += json(key).dump();
    out += ':';
    out += v.dump();
    if (!last) out += ',';
  };
  field("check_id", r.check_id);
  field("params", r.params);
  field("lhs", number(r.lhs));
  field("rhs", number(r.rhs));
  field("constant", number(r.constant));
  field("ratio", number(r.ratio));
  field("status", to_string(r.status));
  field("mesh_level", r.mesh_level);
  field("runtime_ms", r.runtime_ms, true);
  out += '}';
  return out;
}

json to_json(const ExponentConfig& cfg) {
  json j;
  j["d"] = cfg.d;
  j["p"] = cfg.p;
  j["q"] = cfg.q;
  j["alpha"] = cfg.alpha;
  return j;
}

json to_json(const FamilySpec& spec) {
  json j;
  j["kind"] = spec.kind;
  j["params"] = json::object();
  for (const auto& [k, v] : spec.params) j["params"][k] = v;
  if (!spec.children.empty()) {
    j["children"] = json::array();
    for (const auto& c : spec.children) j["children"].push_back(to_json(c));
  }
  return j;
}

FamilySpec family_from_json(const json& j) {
  FamilySpec spec;
  if (j.is_string()) {
    spec.kind = j.get<std::string>();
    return spec;
  }
  spec.kind = j.at("kind").get<std::string>();
  if (j.contains("params")) {
    for (const auto& [k, v] : j.at("params").items()) spec.params[k] = v.get<double>();
  }
  if (j.contains("children")) {
    for (const auto& c : j.at("children")) spec.children.push_back(family_from_json(c));
  }
  return spec;
}

ExponentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw DomainError("exponent configuration must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (k != "p" && k != "q" && k != "alpha" && k != "d") throw DomainError("unknown configuration key '" + k + "'");
  }
  std::vector<double> p = j.at("p").is_array() ? j.at("p").get<std::vector<double>>()
                                               : std::vector<double>{j.at("p").get<double>()};
  ExponentConfig cfg = ExponentConfig::make(std::move(p), j.value("q", 2.0), j.value("alpha", 0.0));
  if (j.contains("d") && j.at("d").get<int>() != cfg.d) throw DomainError("'d' does not match the length of 'p'");
  return cfg;
}

json to_json(const QuadratureSpec& spec) {
  json j;
  j["box_radius"] = spec.box_radius;
  j["panels_per_axis"] = spec.panels_per_axis;
  j["points_per_panel"] = spec.points_per_panel;
  j["vertical_cap"] = spec.vertical_cap;
  j["vertical_panels"] = spec.vertical_panels;
  j["grading_exponent"] = spec.grading_exponent;
  j["radial_octaves"] = spec.radial_octaves;
  j["directions"] = spec.directions;
  j["direction_multiplier"] = spec.direction_multiplier;
  j["seed"] = spec.seed;
  return j;
}

std::string csv_header() { return "check_id,lhs,rhs,constant,ratio,status,mesh_level,runtime_ms"; }

std::string csv_row(const ComparisonReport& r) {
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::string id = r.check_id;
  if (id.find_first_of(",\"") != std::string::npos) {
    std::string q = "\"";
    for (char c : id) {
      if (c == '"') q += '"';
      q += c;
    }
    id = q + "\"";
  }
  return id + "," + num(r.lhs) + "," + num(r.rhs) + "," + num(r.constant) + "," + num(r.ratio) + "," +
         to_string(r.status) + "," + std::to_string(r.mesh_level) + "," + std::to_string(r.runtime_ms);
}

}  // namespace tracekit
