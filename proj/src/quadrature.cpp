#include "tracekit/quadrature.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>

#include "tracekit/error.hpp"

namespace tracekit {

namespace {

constexpr double kPi = std::numbers::pi;

Rule1D compute_gauss_legendre(int n) {
  Rule1D rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    if (n == 1) {
      x = 0.0;
      dp = 1.0;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

void append_panel(Rule1D& out, double a, double b, const Rule1D& gl) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (std::size_t i = 0; i < gl.size(); ++i) {
    out.nodes.push_back(mid + half * gl.nodes[i]);
    out.weights.push_back(half * gl.weights[i]);
  }
}

std::vector<double> sorted_edges(double lo, double hi, int panels, std::span<const double> splits) {
  std::vector<double> edges;
  edges.reserve(static_cast<std::size_t>(panels) + 1 + splits.size());
  for (int i = 0; i <= panels; ++i) edges.push_back(lo + (hi - lo) * i / panels);
  edges.back() = hi;
  for (double s : splits) {
    if (s > lo && s < hi) edges.push_back(s);
  }
  std::sort(edges.begin(), edges.end());
  const double eps = 1e-13 * (hi - lo);
  std::vector<double> unique;
  unique.reserve(edges.size());
  for (double e : edges) {
    if (unique.empty() || e - unique.back() > eps) {
      unique.push_back(e);
    } else if (e == hi) {
      unique.back() = hi;
    }
  }
  return unique;
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

QuadratureSpec QuadratureSpec::refined(int levels) const {
  QuadratureSpec out = *this;
  for (int l = 0; l < levels; ++l) {
    out.panels_per_axis *= 2;
    out.vertical_panels *= 2;
    if (out.directions > 0) {
      out.directions *= 2;
    } else {
      out.direction_multiplier *= 2;
    }
  }
  return out;
}

int QuadratureSpec::direction_count(int d) const {
  if (directions > 0) return directions;
  if (d <= 0) return 0;
  return d == 1 ? 2 : (d == 2 ? 32 : 64) * direction_multiplier;
}

double QuadratureSpec::grading_for(double alpha) const {
  if (grading_exponent > 0.0) return grading_exponent;
  return std::max(1.0, 3.0 / (1.0 + alpha));
}

void QuadratureSpec::validate() const {
  if (!(box_radius > 0.0) || !std::isfinite(box_radius)) throw DomainError("box_radius must be positive");
  if (panels_per_axis < 1 || panels_per_axis > (1 << 20)) throw DomainError("panels_per_axis out of range");
  if (points_per_panel < 1 || points_per_panel > 64) throw DomainError("points_per_panel out of range");
  if (!(vertical_cap > 0.0)) throw DomainError("vertical_cap must be positive");
  if (vertical_panels < 1 || vertical_panels > (1 << 20)) throw DomainError("vertical_panels out of range");
  if (grading_exponent != 0.0 && grading_exponent < 1.0) throw DomainError("grading_exponent must be >= 1");
  if (radial_octaves < 1 || radial_octaves > 40) throw DomainError("radial_octaves out of range");
  if (directions < 0) throw DomainError("directions must be non-negative");
  if (direction_multiplier < 1) throw DomainError("direction_multiplier must be positive");
}

double Rule1D::apply(const std::function<double(double)>& f) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
  return sum;
}

const Rule1D& gauss_legendre(int n) {
  if (n < 1) throw DomainError("Gauss-Legendre order must be positive");
  static std::mutex mutex;
  static std::map<int, Rule1D> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

Rule1D composite_rule(double lo, double hi, int panels, int points, std::span<const double> splits) {
  if (!(hi > lo)) throw DomainError("composite_rule needs lo < hi");
  if (panels < 1) throw DomainError("composite_rule needs at least one panel");
  const Rule1D& gl = gauss_legendre(points);
  const auto edges = sorted_edges(lo, hi, panels, splits);
  Rule1D out;
  out.nodes.reserve((edges.size() - 1) * gl.size());
  out.weights.reserve((edges.size() - 1) * gl.size());
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) append_panel(out, edges[i], edges[i + 1], gl);
  return out;
}

Rule1D union_rule(std::vector<Interval> intervals, double panel_width, int points,
                  std::span<const double> splits) {
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  for (const auto& iv : intervals) {
    if (!(iv.hi > iv.lo)) continue;
    if (!merged.empty() && iv.lo <= merged.back().hi) {
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    } else {
      merged.push_back(iv);
    }
  }
  Rule1D out;
  for (const auto& iv : merged) {
    const int panels =
        std::max(1, static_cast<int>(std::ceil((iv.hi - iv.lo) / panel_width - 1e-9)));
    Rule1D piece = composite_rule(iv.lo, iv.hi, panels, points, splits);
    out.nodes.insert(out.nodes.end(), piece.nodes.begin(), piece.nodes.end());
    out.weights.insert(out.weights.end(), piece.weights.begin(), piece.weights.end());
  }
  return out;
}

Rule1D axis_rule(Interval support, std::span<const double> breaks, const QuadratureSpec& spec,
                 double pad) {
  const double lo = std::max(support.lo - pad, -spec.box_radius);
  const double hi = std::min(support.hi + pad, spec.box_radius);
  if (!(hi > lo)) return {};
  return composite_rule(lo, hi, spec.panels_per_axis, spec.points_per_panel, breaks);
}

Grid::Grid(std::vector<Rule1D> rules) : axes(std::move(rules)) {
  size_ = 1;
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& r : axes) {
    size_ *= r.size();
    const std::uint64_t n = r.size();
    h = fnv1a(h, &n, sizeof n);
    h = fnv1a(h, r.nodes.data(), r.nodes.size() * sizeof(double));
    h = fnv1a(h, r.weights.data(), r.weights.size() * sizeof(double));
  }
  if (axes.empty()) size_ = 0;
  fingerprint_ = h;
}

void Grid::point(std::size_t i, std::span<double> x) const {
  for (std::size_t a = 0; a < axes.size(); ++a) {
    const std::size_t n = axes[a].size();
    x[a] = axes[a].nodes[i % n];
    i /= n;
  }
}

double Grid::weight(std::size_t i) const {
  double w = 1.0;
  for (const auto& r : axes) {
    w *= r.weights[i % r.size()];
    i /= r.size();
  }
  return w;
}

double sphere_measure(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * kPi;
    case 3: return 4.0 * kPi;
    default: throw DomainError("dimension must lie in {1, 2, 3}");
  }
}

DirectionSet DirectionSet::make(int d, int count, std::uint64_t seed) {
  DirectionSet set;
  set.d = d;
  double offset = 0.0;
  if (seed != 0) {
    std::mt19937_64 gen(seed);
    offset = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
  }
  if (d == 1) {
    set.xi = {1.0, -1.0};
    set.weight = {1.0, 1.0};
    set.antipode = {1, 0};
    return set;
  }
  if (count < 1) throw DomainError("direction count must be positive");
  const std::size_t n = static_cast<std::size_t>(count);
  const double w = sphere_measure(d) / static_cast<double>(n);
  set.weight.assign(n, w);
  set.antipode.assign(n, -1);
  if (d == 2) {
    for (std::size_t j = 0; j < n; ++j) {
      const double theta = 2.0 * kPi * (static_cast<double>(j) + offset) / static_cast<double>(n);
      set.xi.push_back(std::cos(theta));
      set.xi.push_back(std::sin(theta));
    }
    if (n % 2 == 0) {
      for (std::size_t j = 0; j < n; ++j) set.antipode[j] = static_cast<int>((j + n / 2) % n);
    }
    return set;
  }
  if (d == 3) {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (std::size_t j = 0; j < n; ++j) {
      const double z = 1.0 - (2.0 * static_cast<double>(j) + 1.0) / static_cast<double>(n);
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * static_cast<double>(j) + 2.0 * kPi * offset;
      set.xi.push_back(rho * std::cos(phi));
      set.xi.push_back(rho * std::sin(phi));
      set.xi.push_back(z);
    }
    return set;
  }
  throw DomainError("dimension must lie in {1, 2, 3}");
}

double integrate_box(const std::function<double(std::span<const double>)>& f, int d,
                     const QuadratureSpec& spec, const std::vector<std::vector<double>>& splits) {
  spec.validate();
  if (d < 1 || d > 3) throw DomainError("dimension must lie in {1, 2, 3}");
  std::vector<Rule1D> rules;
  for (int a = 0; a < d; ++a) {
    std::span<const double> s;
    if (static_cast<std::size_t>(a) < splits.size()) s = splits[static_cast<std::size_t>(a)];
    rules.push_back(composite_rule(-spec.box_radius, spec.box_radius, spec.panels_per_axis,
                                   spec.points_per_panel, s));
  }
  const Grid grid(std::move(rules));
  std::vector<double> x(static_cast<std::size_t>(d));
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.point(i, x);
    double w = 1.0;
    std::size_t rest = i;
    for (const auto& r : grid.axes) {
      w *= r.weights[rest % r.size()];
      rest /= r.size();
    }
    const double v = f(x);
    if (!std::isfinite(v)) throw NumericError("integrate_box: non-finite sample");
    sum += w * v;
  }
  return sum;
}

Rule1D weighted_vertical_rule(double alpha, double cap, const QuadratureSpec& spec,
                              std::span<const double> breaks) {
  if (!(alpha > -1.0)) throw DomainError("weighted vertical integration needs alpha > -1");
  if (!(cap > 0.0)) throw DomainError("vertical cap must be positive");
  const double gamma = spec.grading_for(alpha);
  if (gamma * (alpha + 1.0) < 1.0 - 1e-12) {
    throw DomainError("grading exponent too small: gamma*(alpha+1) must be >= 1");
  }
  std::vector<double> cuts;
  for (double b : breaks) {
    if (b > 0.0 && b < cap) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  Rule1D out;
  const double first = cuts.empty() ? cap : cuts.front();
  const int graded_panels = cuts.empty() ? spec.vertical_panels : std::max(4, spec.vertical_panels / 4);
  const Rule1D t_rule = composite_rule(0.0, 1.0, graded_panels, spec.points_per_panel);
  const double power = gamma * (alpha + 1.0) - 1.0;
  const double scale = std::pow(first, alpha + 1.0) * gamma;
  for (std::size_t i = 0; i < t_rule.size(); ++i) {
    const double t = t_rule.nodes[i];
    out.nodes.push_back(first * std::pow(t, gamma));
    out.weights.push_back(t_rule.weights[i] * scale * std::pow(t, power));
  }
  cuts.push_back(cap);
  const int seg_panels = std::max(2, spec.vertical_panels / 16);
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const Rule1D r = composite_rule(cuts[s], cuts[s + 1], seg_panels, spec.points_per_panel);
    for (std::size_t i = 0; i < r.size(); ++i) {
      out.nodes.push_back(r.nodes[i]);
      out.weights.push_back(r.weights[i] * std::pow(r.nodes[i], alpha));
    }
  }
  return out;
}

double integrate_weighted_vertical(const std::function<double(double)>& F, double alpha,
                                   double cap, const QuadratureSpec& spec) {
  const Rule1D rule = weighted_vertical_rule(alpha, cap, spec);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double v = F(rule.nodes[i]);
    if (!std::isfinite(v)) throw NumericError("integrate_weighted_vertical: non-finite sample");
    sum += rule.weights[i] * v;
  }
  return sum;
}

Rule1D octave_rule(double lo, double hi, int points_per_octave, int octaves) {
  if (!(lo >= 0.0) || !(hi > lo)) throw DomainError("empty radial range");
  const Rule1D& gl = gauss_legendre(points_per_octave);
  Rule1D out;
  double start = lo;
  if (lo == 0.0) {
    const double head = std::min(hi, std::ldexp(1.0, -octaves));
    append_panel(out, 0.0, head, gl);
    start = head;
  }
  while (start < hi) {
    int e = 0;
    std::frexp(start, &e);  // start = m * 2^e with m in [0.5, 1)
    double next = std::ldexp(1.0, e);
    if (next <= start) next = std::ldexp(1.0, e + 1);
    next = std::min(next, hi);
    append_panel(out, start, next, gl);
    start = next;
  }
  return out;
}

double integrate_polar(const std::function<double(double, std::span<const double>)>& F, int d,
                       double r_lo, double r_hi, const QuadratureSpec& spec) {
  spec.validate();
  const DirectionSet dirs = DirectionSet::make(d, spec.direction_count(d), spec.seed);
  const Rule1D radial = octave_rule(r_lo, r_hi, 2 * spec.points_per_panel, spec.radial_octaves);
  double sum = 0.0;
  for (std::size_t j = 0; j < dirs.size(); ++j) {
    const auto xi = dirs.direction(j);
    double inner = 0.0;
    for (std::size_t i = 0; i < radial.size(); ++i) {
      const double r = radial.nodes[i];
      const double v = F(r, xi);
      if (!std::isfinite(v)) throw NumericError("integrate_polar: non-finite sample");
      inner += radial.weights[i] * v * std::pow(r, d - 1);
    }
    sum += dirs.weight[j] * inner;
  }
  return sum;
}

}  // namespace tracekit
