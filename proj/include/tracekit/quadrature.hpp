#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace tracekit {

/// Mesh parameters shared by every integral in the library.
struct QuadratureSpec {
  double box_radius = 8.0;       ///< horizontal truncation to [-R, R]^d
  int panels_per_axis = 32;      ///< panels across a function's horizontal support
  int points_per_panel = 4;      ///< Gauss-Legendre order
  double vertical_cap = 1.0;     ///< Y: vertical integrals run over (0, Y)
  int vertical_panels = 64;
  double grading_exponent = 0.0; ///< γ; 0 selects max(1, 3/(1+α))
  int radial_octaves = 12;       ///< J: radial integrals cover [2^-J, 2^J]
  int directions = 0;            ///< 0 selects the dimension default (2, 32, 64)
  int direction_multiplier = 1;  ///< scales the dimension default under refinement
  std::uint64_t seed = 0;        ///< rotates the direction set; 0 = unrotated

  static QuadratureSpec defaults() { return {}; }

  /// Mesh with panels, vertical panels and directions doubled `levels` times.
  QuadratureSpec refined(int levels) const;

  int direction_count(int d) const;
  double grading_for(double alpha) const;

  void validate() const;

  bool operator==(const QuadratureSpec&) const = default;
};

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

/// Nodes and weights of a one-dimensional rule.
struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
  double apply(const std::function<double(double)>& f) const;
};

/// Gauss-Legendre rule of order n on [-1, 1]. Cached, thread-safe.
const Rule1D& gauss_legendre(int n);

/// Composite Gauss-Legendre rule: `panels` equal panels on [lo, hi], each
/// additionally cut at every split point inside (lo, hi).
Rule1D composite_rule(double lo, double hi, int panels, int points,
                      std::span<const double> splits = {});

/// Composite rule on the union of intervals. Overlapping intervals are
/// merged; each merged piece gets ceil(length / panel_width) panels.
Rule1D union_rule(std::vector<Interval> intervals, double panel_width, int points,
                  std::span<const double> splits = {});

/// Composite rule along one axis: the support (padded by `pad`) intersected
/// with [-R, R], panels_per_axis panels, cut at `breaks`. Empty when the
/// intersection is empty.
Rule1D axis_rule(Interval support, std::span<const double> breaks, const QuadratureSpec& spec,
                 double pad = 0.0);

/// Tensor grid; axis 0 varies fastest in flattened storage.
struct Grid {
  std::vector<Rule1D> axes;

  explicit Grid(std::vector<Rule1D> rules);

  int dim() const { return static_cast<int>(axes.size()); }
  std::size_t size() const { return size_; }
  std::uint64_t fingerprint() const { return fingerprint_; }

  /// Coordinates of flattened point i.
  void point(std::size_t i, std::span<double> x) const;
  /// Product weight of flattened point i.
  double weight(std::size_t i) const;

 private:
  std::size_t size_ = 0;
  std::uint64_t fingerprint_ = 0;
};

/// Unit direction sample on S^{d-1} with equal weights summing to |S^{d-1}|.
/// d=1: {+1, -1} (counting measure); d=2: uniform angles; d=3: Fibonacci.
struct DirectionSet {
  int d = 1;
  std::vector<double> xi;       ///< n*d coordinates
  std::vector<double> weight;   ///< n weights
  std::vector<int> antipode;    ///< index of -xi_j, or -1

  static DirectionSet make(int d, int count, std::uint64_t seed);

  std::size_t size() const { return weight.size(); }
  std::span<const double> direction(std::size_t j) const {
    return {xi.data() + j * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
  }
};

double sphere_measure(int d);

/// Composite Gauss-Legendre over [-R, R]^d with optional per-axis split points.
double integrate_box(const std::function<double(std::span<const double>)>& f, int d,
                     const QuadratureSpec& spec,
                     const std::vector<std::vector<double>>& splits = {});

/// Rule for ∫_0^Y F(y) y^α dy. Weights include y^α. The first segment uses the
/// substitution y = b·t^γ; later segments (cut at `breaks`) use plain panels.
/// Throws DomainError for α <= -1 or when γ(α+1) < 1.
Rule1D weighted_vertical_rule(double alpha, double cap, const QuadratureSpec& spec,
                              std::span<const double> breaks = {});

/// ∫_0^Y F(y) y^α dy; throws NumericError on a non-finite sample.
double integrate_weighted_vertical(const std::function<double(double)>& F, double alpha,
                                   double cap, const QuadratureSpec& spec);

/// Gauss rule over [lo, hi] split at dyadic octave boundaries 2^j. When
/// lo == 0 the piece [0, min(hi, 2^-J)] is a single plain panel.
Rule1D octave_rule(double lo, double hi, int points_per_octave, int octaves);

/// ∫_{S^{d-1}} ∫_{r_lo}^{r_hi} F(r, ξ) r^{d-1} dr dξ.
double integrate_polar(const std::function<double(double, std::span<const double>)>& F, int d,
                       double r_lo, double r_hi, const QuadratureSpec& spec);

}  // namespace tracekit
