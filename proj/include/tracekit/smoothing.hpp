#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "tracekit/exponents.hpp"
#include "tracekit/functions.hpp"
#include "tracekit/quadrature.hpp"
#include "tracekit/report.hpp"

namespace tracekit {

/// φ(z) = c_d exp(−1/(1−|z|²)) on the unit ball, with c_d fixing ∫φ = 1.
class Mollifier {
 public:
  static Mollifier build(int d);

  int dim() const { return d_; }
  double normalization() const { return c_; }
  /// exp(−1/(1−r²)) for r < 1, without the normalization.
  static double profile(double r);
  double value(std::span<const double> z) const;
  void gradient(std::span<const double> z, std::span<double> out) const;
  /// φ_δ(x) = δ^{-d} φ(x/δ)
  double scaled(std::span<const double> x, double delta) const;

 private:
  int d_ = 1;
  double c_ = 1.0;
};

/// ψ_k(y) = χ(2^k y) − χ(2^{k+1} y) built from the smooth step χ with χ = 1
/// on (−∞, 7/8] and χ = 0 on [9/8, ∞).
class PartitionOfUnity {
 public:
  static constexpr double kLower = 7.0 / 8.0;
  static constexpr double kUpper = 9.0 / 8.0;
  static constexpr double kWidth = 0.25;

  PartitionOfUnity();

  static double chi(double t);
  static double chi_prime(double t);
  static double psi(int k, double y);
  static double psi_prime(int k, double y);
  /// Open support interval of ψ_k: (7·2^{-(k+4)}, 9·2^{-(k+3)}).
  static std::pair<double, double> support(int k);

  /// N_0 = 2 sup|χ'|, measured on a dense sample of the transition band.
  double derivative_bound() const { return n0_; }

 private:
  double n0_ = 0.0;
};

/// A_δ g and, optionally, ∇A_δ g sampled on a grid. grad holds d arrays,
/// one per component.
struct Mollified {
  std::vector<double> values;
  std::vector<std::vector<double>> grad;
};

/// Discrete mollification at scale δ: the stencil covers [−1, 1]^d in
/// z = (x − t)/δ, is cut at g's breakpoints, and is normalized so that
/// constants are reproduced exactly.
Mollified convolve_on_grid(const BoundaryFunction& g, double delta, const Grid& grid, const Mollifier& phi,
                           const QuadratureSpec& spec, bool with_gradient);

/// A_{k,φ} g as a pointwise-evaluable function at scale 2^{-k}.
std::shared_ptr<const BoundaryFunction> mollify(std::shared_ptr<const BoundaryFunction> g, int k,
                                                const QuadratureSpec& spec);

/// ‖φ_δ∗f − f‖ ≤ ω(δ, f) (constant 1) and max_i δ‖∂_i(φ_δ∗f)‖ ≤ N ω(δ, f)
/// (constant `ceiling`).
std::pair<ComparisonReport, ComparisonReport> convolution_bounds_check(
    std::shared_ptr<const BoundaryFunction> f, double delta, std::span<const double> p,
    const QuadratureSpec& spec, double ceiling, double tol);

/// E(g)(x, y) = Σ_{k=1}^{K−1} ψ_k(y) A_k g(x) + χ(2^K y) A_K g(x). The
/// coefficients sum to χ(2y): one on (0, 7/16], zero from 9/16 on.
class ExtensionHandle final : public HalfSpaceFunction {
 public:
  ExtensionHandle(std::shared_ptr<const BoundaryFunction> g, int k_max, const QuadratureSpec& spec);

  int dim() const override { return g_->dim(); }
  double value(std::span<const double> x, double y) const override;
  bool has_gradient() const override { return true; }
  void gradient(std::span<const double> x, double y, std::span<double> out) const override;
  Interval support(int axis, double y) const override;
  std::vector<double> breakpoints(int axis, double y) const override;
  std::vector<double> vertical_breakpoints() const override;
  double vertical_extent() const override { return 9.0 / 16.0; }
  Grid slice_grid(double y, const QuadratureSpec& spec) const override;
  void slice(double y, const Grid& grid, std::span<double> values, std::span<double> grad_norm) const override;
  std::string kind() const override { return "extension"; }

  int k_max() const { return k_max_; }
  const BoundaryFunction& source() const { return *g_; }

  /// Nonzero coefficients (k, c_k(y), c_k'(y)).
  struct Term {
    int k;
    double c;
    double dc;
  };
  std::vector<Term> terms(double y) const;

  /// Number of cached A_k arrays (for tests).
  std::size_t cache_size() const;

 private:
  std::shared_ptr<const Mollified> averaged(int k, const Grid& grid, bool with_gradient) const;
  int grid_level(double y) const;

  std::shared_ptr<const BoundaryFunction> g_;
  int k_max_;
  QuadratureSpec spec_;
  Mollifier phi_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<int, std::uint64_t>, std::shared_ptr<const Mollified>> cache_;
};

/// Requires cfg.alpha ∈ (−1, q−1) and k_max >= 3.
std::shared_ptr<const ExtensionHandle> extend(std::shared_ptr<const BoundaryFunction> g, const ExponentConfig& cfg,
                                              int k_max, const QuadratureSpec& spec);

/// L_s = 2^{sℓ} ‖E(g)(·, 2^{-s}) − g‖_{L_{p⃗}} for s = s_lo..s_hi.
std::vector<double> extension_limit_profile(const ExtensionHandle& e, const ExponentConfig& cfg, int s_lo,
                                            int s_hi, const QuadratureSpec& spec);

/// ‖E(g)(·, y) − g‖_{L_{p⃗}}.
double extension_deviation(const ExtensionHandle& e, double y, std::span<const double> p,
                           const QuadratureSpec& spec);

/// u(·, 0) from the family's closed form; throws DomainError when u carries no
/// boundary continuity information.
std::shared_ptr<const BoundaryFunction> trace_restrict(const HalfSpaceFunction& u);

}  // namespace tracekit
