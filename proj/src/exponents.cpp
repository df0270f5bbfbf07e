#include "tracekit/exponents.hpp"

#include <cmath>
#include <sstream>

#include "tracekit/error.hpp"

namespace tracekit {

ExponentConfig ExponentConfig::make(std::vector<double> p, double q, double alpha) {
  ExponentConfig cfg;
  cfg.d = static_cast<int>(p.size());
  cfg.p = std::move(p);
  cfg.q = q;
  cfg.alpha = alpha;
  cfg.validate();
  return cfg;
}

void ExponentConfig::validate() const {
  if (d < 1 || d > 3) throw DomainError("dimension d must lie in {1, 2, 3}");
  if (static_cast<int>(p.size()) != d) throw DomainError("p vector length must equal d");
  for (double pi : p) {
    if (!std::isfinite(pi) || pi < 1.0) throw DomainError("every p_i must lie in [1, inf)");
  }
  if (!std::isfinite(q) || q < 1.0) throw DomainError("q must lie in [1, inf)");
  if (!std::isfinite(alpha)) throw DomainError("alpha must be finite");
}

bool ExponentConfig::in_trace_window() const { return alpha > -1.0 && alpha < q - 1.0; }

bool ExponentConfig::in_vanishing_window() const { return alpha > -q && alpha <= -1.0; }

double smoothness_order(double q, double alpha) {
  if (!std::isfinite(q) || q < 1.0) throw DomainError("q must lie in [1, inf)");
  if (!(alpha > -1.0 && alpha < q - 1.0)) {
    std::ostringstream msg;
    msg << "alpha must lie in (-1, q-1) = (-1, " << (q - 1.0) << "), got " << alpha;
    throw DomainError(msg.str());
  }
  return 1.0 - (1.0 + alpha) / q;
}

double smoothness_order(const ExponentConfig& cfg) { return smoothness_order(cfg.q, cfg.alpha); }

}  // namespace tracekit
