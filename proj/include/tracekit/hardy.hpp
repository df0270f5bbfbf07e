#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tracekit/quadrature.hpp"
#include "tracekit/report.hpp"

namespace tracekit {

/// (q, σ, a) of the one-dimensional weighted Hardy inequality; a may be +∞.
struct HardyParams {
  double q = 2.0;
  double sigma = 0.0;
  double a = 1.0;

  /// Throws DomainError unless q ∈ [1, ∞), σ < 1 − 1/q and a > 0.
  void validate() const;
  /// (1 − 1/q − σ)^{-1}
  double constant() const;
};

/// (d, θ, β, a) of the polar Hardy inequality.
struct PolarHardyParams {
  int d = 1;
  double theta = 1.0;
  double beta = 0.0;
  double a = 1.0;

  /// Throws DomainError unless θ ∈ [1, ∞), β < d − 1/θ and a > 0.
  void validate() const;
};

/// A named test function on (0, a).
struct HardyFunction {
  std::string name;
  double eps = 0.0;
  std::function<double(double)> f;
  std::vector<double> breakpoints;
};

/// Shapes: zero, constant, near-extremal (t^{-σ-1/q+ε}), exp-linear (t e^{-t}),
/// ramp-unit (t on (0,1)), sine-unit (sin πt on (0,1)), sqrt-exp (√t e^{-t}),
/// rational (t/(1+t²)²), oscillating (t e^{-t} cos 4t).
HardyFunction hardy_shape(const std::string& name, const HardyParams& params, double eps = 0.01);

/// The six shapes of the verification matrix.
std::vector<std::string> hardy_campaign_shapes();

struct HardySides {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Closed form of both sides for the near-extremal power on (0, a), a finite.
HardySides near_extremal_closed_form(const HardyParams& params, double eps);

/// LHS = (∫_0^a t^{qσ} |t^{-1}∫_0^t f|^q dt)^{1/q}, RHS = (∫_0^a |f|^q t^{qσ} dt)^{1/q},
/// constant (1 − 1/q − σ)^{-1}. Divergent or truncation-dominated instances
/// are INCONCLUSIVE.
ComparisonReport hardy_check(const HardyFunction& f, const HardyParams& params, const QuadratureSpec& spec,
                             double tol);

/// LHS = (∫_0^a (t^{β−d} ∫_{|x|≤t} |f|)^θ dt)^{1/θ},
/// RHS = (∫_{|x|≤a} (|x|^{β−(d−1)/θ} |f|)^θ dx)^{1/θ}, checked against `ceiling`.
ComparisonReport hardy_polar_check(const std::function<double(std::span<const double>)>& f,
                                   const std::string& name, const PolarHardyParams& params,
                                   const QuadratureSpec& spec, double ceiling, double tol,
                                   std::span<const double> radial_breaks = {});

}  // namespace tracekit
