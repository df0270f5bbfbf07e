#pragma once

#include <vector>

namespace tracekit {

/// Exponent and weight configuration (d, p⃗, q, α). The vertical weight is
/// μ(y) = y^α, so α fully determines it.
struct ExponentConfig {
  int d = 1;
  std::vector<double> p{2.0};
  double q = 2.0;
  double alpha = 0.0;

  /// Builds and validates a configuration; d is taken from p.size().
  static ExponentConfig make(std::vector<double> p, double q, double alpha);

  /// Throws DomainError unless 1 <= d <= 3, every p_i and q lie in [1, ∞),
  /// and alpha is finite.
  void validate() const;

  /// alpha ∈ (−1, q−1): the trace / extension window.
  bool in_trace_window() const;
  /// alpha ∈ (−q, −1]: admitted only for the vanishing-trace check.
  bool in_vanishing_window() const;

  bool operator==(const ExponentConfig&) const = default;
};

/// ℓ = 1 − (1+α)/q. Depends on (q, α) only; throws DomainError when
/// α ∉ (−1, q−1).
double smoothness_order(double q, double alpha);
double smoothness_order(const ExponentConfig& cfg);

}  // namespace tracekit
