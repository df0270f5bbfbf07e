#pragma once

#include <memory>
#include <span>
#include <vector>

#include "tracekit/exponents.hpp"
#include "tracekit/functions.hpp"
#include "tracekit/quadrature.hpp"

namespace tracekit {

/// Nested L_{p⃗} norm of grid samples: innermost over axis 0 with p[0],
/// outermost over the last axis.
double mixed_norm_on_grid(const Grid& grid, std::span<const double> values, std::span<const double> p);

double mixed_lebesgue_norm(const BoundaryFunction& f, std::span<const double> p, const QuadratureSpec& spec);

/// ‖ |∇f| ‖_{L_{p⃗}}; bounds ‖Δ_h f‖ by |h| times this value.
double gradient_norm(const BoundaryFunction& f, std::span<const double> p, const QuadratureSpec& spec);

/// ‖Δ_h f‖_{L_{p⃗}} with Δ_h f(x) = f(x+h) − f(x).
double difference_norm(const BoundaryFunction& f, std::span<const double> h, std::span<const double> p,
                       const QuadratureSpec& spec);

/// ‖u(·, y)‖_{L_{p⃗}} on the function's own slice grid.
double slice_norm(const HalfSpaceFunction& u, double y, std::span<const double> p,
                  const QuadratureSpec& spec);

struct WeightedNorms {
  double value = 0.0;     ///< ‖u‖_{L_{p⃗,q}(μ)}
  double gradient = 0.0;  ///< ‖ |Du| ‖_{L_{p⃗,q}(μ)}, 0 unless requested
};

/// Weighted norms over (0, min(vertical_cap, vertical_extent)). Throws
/// DomainError for alpha <= -1 and when the gradient is requested but absent.
WeightedNorms weighted_norms(const HalfSpaceFunction& u, const ExponentConfig& cfg, const QuadratureSpec& spec,
                             bool with_gradient);

double weighted_mixed_norm(const HalfSpaceFunction& u, const ExponentConfig& cfg, const QuadratureSpec& spec);

/// ‖u‖ + ‖Du‖, both in L_{p⃗,q}(μ), with |Du| the Euclidean length of (D_x u, D_y u).
double sobolev_norm(const HalfSpaceFunction& u, const ExponentConfig& cfg, const QuadratureSpec& spec);

/// ω(δ, f): max of ‖Δ_h f‖ over h = δ·2^{-m/2}·ξ, m < radii, ξ in the direction set.
double modulus(const BoundaryFunction& f, double delta, std::span<const double> p, const QuadratureSpec& spec,
               int radii = 16);

struct BesovVariant {
  enum class Tag { direct, integral, dyadic };
  Tag tag = Tag::direct;
  double a = 1.0;  ///< upper limit of the integral variant; may be +∞

  static BesovVariant direct() { return {Tag::direct, 1.0}; }
  static BesovVariant integral(double a) { return {Tag::integral, a}; }
  static BesovVariant dyadic() { return {Tag::dyadic, 1.0}; }
};

/// Truncation depth of the dyadic variant.
inline constexpr int kDyadicDepth = 14;

struct SeminormResult {
  double value = 0.0;        ///< the seminorm (q-th root taken)
  double head = 0.0;         ///< extrapolated contribution below the sampled range (q-th power scale)
  double tail = 0.0;         ///< contribution above the sampled range, or dyadic tail bound
  bool divergent = false;    ///< head extrapolation indicates an infinite seminorm
};

/// N(r, ξ) = ‖Δ_{rξ} f‖_{L_{p⃗}} sampled on Gauss nodes of every dyadic octave
/// of [2^-K, 2^J] (K = max(J, kDyadicDepth)) plus the octave endpoints, for
/// every direction of the set. Depends on (f, p⃗, spec) only, so one profile
/// serves every (q, α).
class DifferenceProfile {
 public:
  static std::shared_ptr<const DifferenceProfile> build(std::shared_ptr<const BoundaryFunction> f,
                                                        std::vector<double> p, const QuadratureSpec& spec);

  const std::vector<double>& radii() const { return radii_; }
  /// Gauss weights along r; zero at octave endpoints.
  const std::vector<double>& weights() const { return weights_; }
  std::size_t direction_count() const { return dirs_.size(); }
  double sample(std::size_t dir, std::size_t node) const { return n_[dir * radii_.size() + node]; }

  /// ω(t) as the max of sampled N over r <= t; when t is not a node the
  /// directions are also sampled at r = t.
  double omega(double t) const;

  SeminormResult direct(double ell, double q) const;
  SeminormResult integral(double ell, double q, double a) const;
  /// Dyadic sum over k = 1..kDyadicDepth; tail bounded with the Lipschitz
  /// constant when `lipschitz` is finite.
  SeminormResult dyadic(double ell, double q, double lipschitz) const;

 private:
  std::vector<double> sample_all(double r) const;

  std::shared_ptr<const BoundaryFunction> f_;
  std::vector<double> p_;
  QuadratureSpec spec_;
  DirectionSet dirs_;
  int lo_exp_ = 0;
  int hi_exp_ = 0;
  std::vector<double> radii_;
  std::vector<double> weights_;
  std::vector<double> n_;          ///< direction-major samples
  std::vector<double> omega_run_;  ///< running max over directions and r
};

double besov_seminorm_direct(std::shared_ptr<const BoundaryFunction> f, const ExponentConfig& cfg,
                             const QuadratureSpec& spec);

struct BesovNorm {
  double lp = 0.0;
  SeminormResult seminorm;
  double total() const { return lp + seminorm.value; }
};

/// ‖f‖_{L_{p⃗}} plus the seminorm of the chosen variant, with θ = q.
BesovNorm besov_norm(const DifferenceProfile& profile, const BoundaryFunction& f, const ExponentConfig& cfg,
                     BesovVariant variant, const QuadratureSpec& spec);
BesovNorm besov_norm(std::shared_ptr<const BoundaryFunction> f, const ExponentConfig& cfg, BesovVariant variant,
                     const QuadratureSpec& spec);

}  // namespace tracekit
