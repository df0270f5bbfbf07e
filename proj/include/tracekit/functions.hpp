#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tracekit/quadrature.hpp"

namespace tracekit {

/// A function on R^d. Implementations are immutable and safe to evaluate
/// concurrently.
class BoundaryFunction {
 public:
  virtual ~BoundaryFunction() = default;

  virtual int dim() const = 0;
  virtual double value(std::span<const double> x) const = 0;

  virtual bool has_gradient() const { return false; }
  /// Writes ∇f(x) into out (size d). Throws DomainError when unavailable.
  virtual void gradient(std::span<const double> x, std::span<double> out) const;

  /// Closed interval outside of which f vanishes along `axis`.
  virtual Interval support(int axis) const;
  /// Coordinates along `axis` where f fails to be smooth (kinks, jumps, and
  /// edges of thin transition layers). Quadrature panels are cut there.
  virtual std::vector<double> breakpoints(int axis) const;

  /// One-dimensional factors when f(x) = Π f_a(x_a); empty otherwise.
  virtual std::vector<std::shared_ptr<const BoundaryFunction>> factors() const { return {}; }

  /// Supremum of ℓ for which f ∈ B^ℓ_{p⃗,q}; +∞ for smooth compactly
  /// supported or rapidly decaying families.
  virtual double besov_ceiling(std::span<const double> p) const;

  /// True when f is unchanged by flipping the sign of any coordinate.
  virtual bool axis_symmetric() const { return false; }

  virtual std::string kind() const = 0;

  /// max_a max(|support.lo|, |support.hi|), or +∞.
  double support_radius() const;

  /// Tensor grid over the (padded) support cut at the breakpoints.
  Grid grid(const QuadratureSpec& spec, double pad = 0.0) const;
};

/// A function on R^d × (0, ∞).
class HalfSpaceFunction {
 public:
  virtual ~HalfSpaceFunction() = default;

  virtual int dim() const = 0;  ///< horizontal dimension d
  virtual double value(std::span<const double> x, double y) const = 0;

  virtual bool has_gradient() const { return false; }
  /// Writes (D_x u, D_y u) into out (size d+1).
  virtual void gradient(std::span<const double> x, double y, std::span<double> out) const;

  virtual Interval support(int axis, double y) const;
  virtual std::vector<double> breakpoints(int axis, double y) const;
  /// y-values inside (0, vertical_extent()) where u varies non-smoothly or
  /// on a thin layer; vertical rules are cut there.
  virtual std::vector<double> vertical_breakpoints() const { return {}; }
  /// u(·, y) = 0 for y >= vertical_extent().
  virtual double vertical_extent() const { return 1.0; }

  /// Boundary restriction u(·, 0), or nullptr when u carries no boundary
  /// continuity information.
  virtual std::shared_ptr<const BoundaryFunction> trace() const { return nullptr; }

  /// Horizontal grid used for the slice u(·, y).
  virtual Grid slice_grid(double y, const QuadratureSpec& spec) const;

  /// Evaluates u(·, y) on the grid, and |Du|(·, y) when grad_norm is
  /// non-empty. The default loops over value()/gradient().
  virtual void slice(double y, const Grid& grid, std::span<double> values,
                     std::span<double> grad_norm) const;

  virtual std::string kind() const = 0;
};

/// Declarative description of a registry member:
/// `{ kind = "...", params = {...}, children = [...] }`. Children carry the
/// 1-D factors of "tensor" and the horizontal profile η of half-space kinds.
struct FamilySpec {
  std::string kind;
  std::map<std::string, double> params;
  std::vector<FamilySpec> children;

  double param(const std::string& key, double fallback) const;
  bool operator==(const FamilySpec&) const = default;
};

enum class DomainTag { boundary, halfspace };

/// An instantiated registry member. Exactly one of the pointers is set.
struct FunctionHandle {
  FamilySpec spec;
  DomainTag domain = DomainTag::boundary;
  std::shared_ptr<const BoundaryFunction> boundary;
  std::shared_ptr<const HalfSpaceFunction> halfspace;

  int dim() const;
  bool has_gradient() const;
  /// Horizontal support radius (+∞ when the function is not compactly supported).
  double support_radius() const;
};

/// Registered kinds: gaussian-bump, bump, hat, indicator, constant, tensor
/// (boundary); vertical-power, log-decay, ramp-cutoff (half-space).
std::vector<std::string> registered_kinds();

/// Builds a handle; throws DomainError for unknown kinds or parameters
/// outside the documented ranges.
FunctionHandle family_instantiate(const FamilySpec& spec);

// Direct constructors, used by tests and by the extension machinery.
std::shared_ptr<const BoundaryFunction> make_gaussian(int d, double scale);
std::shared_ptr<const BoundaryFunction> make_bump(int d, double radius);
std::shared_ptr<const BoundaryFunction> make_hat(double scale);
std::shared_ptr<const BoundaryFunction> make_indicator(int d);
std::shared_ptr<const BoundaryFunction> make_constant(int d, double value);
std::shared_ptr<const BoundaryFunction> make_tensor(
    std::vector<std::shared_ptr<const BoundaryFunction>> factors);

std::shared_ptr<const HalfSpaceFunction> make_vertical_power(
    std::shared_ptr<const BoundaryFunction> eta, double m);
std::shared_ptr<const HalfSpaceFunction> make_log_decay(std::shared_ptr<const BoundaryFunction> eta);
std::shared_ptr<const HalfSpaceFunction> make_ramp_cutoff(std::shared_ptr<const BoundaryFunction> eta);

}  // namespace tracekit
