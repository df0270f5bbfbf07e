#include "tracekit/hardy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tracekit/error.hpp"

namespace tracekit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Panel {
  double lo;
  double hi;
  int octave;
};

struct Mesh {
  double t0 = 0.0;
  int octaves = 0;
  std::vector<Panel> panels;
  std::vector<double> t;
  std::vector<double> w;
  std::vector<int> oct;
  std::vector<std::size_t> first;  ///< index of each panel's first node
  int order = 0;
};

Mesh build_mesh(double a, const QuadratureSpec& spec, std::span<const double> breaks) {
  Mesh m;
  const int lo_exp = -3 * spec.radial_octaves;
  const double top = std::isinf(a) ? std::ldexp(1.0, spec.radial_octaves) : a;
  m.t0 = std::ldexp(1.0, lo_exp);
  if (!(top > 4.0 * m.t0)) throw DomainError("Hardy range too short for the octave mesh");
  m.order = 2 * spec.points_per_panel;
  const int sub = std::max(1, spec.panels_per_axis / 32);
  const Rule1D& gl = gauss_legendre(m.order);
  double start = m.t0;
  int e = lo_exp;
  int octave = 0;
  while (start < top) {
    const double end = std::min(std::ldexp(1.0, e + 1), top);
    const int pieces = std::max(sub, std::min(64 * sub, static_cast<int>(std::ceil((end - start) / 0.5)) * sub));
    std::vector<double> edges;
    for (int i = 0; i <= pieces; ++i) edges.push_back(start + (end - start) * i / pieces);
    edges.back() = end;
    for (double b : breaks) {
      if (b > start && b < end) edges.push_back(b);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      const Panel p{edges[i], edges[i + 1], octave};
      m.first.push_back(m.t.size());
      m.panels.push_back(p);
      const double mid = 0.5 * (p.lo + p.hi);
      const double half = 0.5 * (p.hi - p.lo);
      for (std::size_t k = 0; k < gl.size(); ++k) {
        m.t.push_back(mid + half * gl.nodes[k]);
        m.w.push_back(half * gl.weights[k]);
        m.oct.push_back(octave);
      }
    }
    start = end;
    ++e;
    ++octave;
  }
  m.octaves = octave;
  return m;
}

// ∫_0^{t0} g fitted as a power law through g(t0/2), g(t0).
double power_head_integral(const std::function<double(double)>& g, double t0, bool& divergent) {
  const double g0 = g(t0);
  if (g0 == 0.0) return 0.0;
  const double s = std::log2(g0 / g(0.5 * t0));
  if (!(s > -1.0)) {
    divergent = true;
    return kInf;
  }
  return t0 * g0 / (s + 1.0);
}

// Running integral ∫_0^t g at every mesh node.
std::vector<double> running_integral(const Mesh& m, const std::function<double(double)>& g, double f0) {
  const Rule1D& gl = gauss_legendre(m.order);
  std::vector<double> out(m.t.size());
  double base = f0;
  for (std::size_t p = 0; p < m.panels.size(); ++p) {
    const Panel& pan = m.panels[p];
    double full = 0.0;
    for (std::size_t k = 0; k < gl.size(); ++k) {
      const std::size_t idx = m.first[p] + k;
      const double t = m.t[idx];
      const double half = 0.5 * (t - pan.lo);
      const double mid = 0.5 * (t + pan.lo);
      double part = 0.0;
      for (std::size_t j = 0; j < gl.size(); ++j) part += gl.weights[j] * g(mid + half * gl.nodes[j]);
      out[idx] = base + half * part;
      full += m.w[idx] * g(t);
    }
    base += full;
  }
  return out;
}

struct Extrapolated {
  double total = 0.0;
  double head = 0.0;
  double tail = 0.0;
  bool divergent = false;
  bool unstable = false;
};

double ratio_of(double num, double den) { return den == 0.0 ? (num == 0.0 ? 0.0 : kInf) : num / den; }

Extrapolated extrapolate(const std::vector<double>& sums, bool with_tail) {
  Extrapolated ex;
  double body = 0.0;
  for (double s : sums) body += s;
  const std::size_t n = sums.size();
  if (n >= 3 && sums[0] > 0.0) {
    const double rho = ratio_of(sums[0], sums[1]);
    if (!(rho < 1.0)) {
      ex.divergent = true;
    } else {
      ex.head = sums[0] * rho / (1.0 - rho);
      const double rho2 = ratio_of(sums[1], sums[2]);
      if (std::abs(rho - rho2) > 1e-3 * rho && ex.head > 1e-10 * body) ex.unstable = true;
    }
  }
  if (with_tail && n >= 3 && sums[n - 1] > 0.0) {
    const double rho = ratio_of(sums[n - 1], sums[n - 2]);
    if (!(rho < 1.0)) {
      ex.divergent = true;
    } else {
      ex.tail = sums[n - 1] * rho / (1.0 - rho);
      const double rho2 = ratio_of(sums[n - 2], sums[n - 3]);
      if (std::abs(rho - rho2) > 1e-3 * rho && ex.tail > 1e-10 * body) ex.unstable = true;
    }
  }
  ex.total = ex.divergent ? kInf : body + ex.head + ex.tail;
  return ex;
}

nlohmann::json side_json(const Extrapolated& ex) {
  nlohmann::json j;
  j["head"] = number(ex.head);
  j["tail"] = number(ex.tail);
  return j;
}

void settle(ComparisonReport& r, const Extrapolated& l, const Extrapolated& rr, double tol) {
  r.decide(tol);
  if (l.divergent || rr.divergent) {
    r.mark_inconclusive("divergent: octave sums do not decrease at the truncation ends");
  } else if (l.unstable || rr.unstable) {
    r.mark_inconclusive("truncation: octave sums are not geometric at the truncation ends");
  }
}

}  // namespace

void HardyParams::validate() const {
  if (!std::isfinite(q) || q < 1.0) throw DomainError("q must lie in [1, inf)");
  if (!std::isfinite(sigma) || !(sigma < 1.0 - 1.0 / q)) {
    throw DomainError("sigma must satisfy sigma < 1 - 1/q");
  }
  if (!(a > 0.0)) throw DomainError("a must be positive (inf allowed)");
}

double HardyParams::constant() const { return 1.0 / (1.0 - 1.0 / q - sigma); }

void PolarHardyParams::validate() const {
  if (d < 1 || d > 3) throw DomainError("dimension d must lie in {1, 2, 3}");
  if (!std::isfinite(theta) || theta < 1.0) throw DomainError("theta must lie in [1, inf)");
  if (!std::isfinite(beta) || !(beta < d - 1.0 / theta)) throw DomainError("beta must satisfy beta < d - 1/theta");
  if (!(a > 0.0)) throw DomainError("a must be positive (inf allowed)");
}

HardyFunction hardy_shape(const std::string& name, const HardyParams& params, double eps) {
  HardyFunction h;
  h.name = name;
  if (name == "zero") {
    h.f = [](double) { return 0.0; };
  } else if (name == "constant") {
    h.f = [](double) { return 1.0; };
  } else if (name == "near-extremal") {
    if (!(eps > 0.0)) throw DomainError("near-extremal needs eps > 0");
    h.eps = eps;
    const double e = -params.sigma - 1.0 / params.q + eps;
    h.f = [e](double t) { return std::pow(t, e); };
  } else if (name == "exp-linear") {
    h.f = [](double t) { return t * std::exp(-t); };
  } else if (name == "ramp-unit") {
    h.f = [](double t) { return t < 1.0 ? t : 0.0; };
    h.breakpoints = {1.0};
  } else if (name == "sine-unit") {
    h.f = [](double t) { return t < 1.0 ? std::sin(std::numbers::pi * t) : 0.0; };
    h.breakpoints = {1.0};
  } else if (name == "sqrt-exp") {
    h.f = [](double t) { return std::sqrt(t) * std::exp(-t); };
  } else if (name == "rational") {
    h.f = [](double t) {
      const double s = 1.0 + t * t;
      return t / (s * s);
    };
  } else if (name == "oscillating") {
    h.f = [](double t) { return t * std::exp(-t) * std::cos(4.0 * t); };
  } else {
    throw DomainError("unknown Hardy shape '" + name + "'");
  }
  return h;
}

std::vector<std::string> hardy_campaign_shapes() {
  return {"exp-linear", "ramp-unit", "sine-unit", "sqrt-exp", "rational", "oscillating"};
}

HardySides near_extremal_closed_form(const HardyParams& params, double eps) {
  params.validate();
  if (std::isinf(params.a)) throw DomainError("closed form needs a finite a");
  const double c = 1.0 - params.sigma - 1.0 / params.q + eps;
  HardySides s;
  s.rhs = std::pow(std::pow(params.a, params.q * eps) / (params.q * eps), 1.0 / params.q);
  s.lhs = s.rhs / c;
  return s;
}

ComparisonReport hardy_check(const HardyFunction& f, const HardyParams& params, const QuadratureSpec& spec,
                             double tol) {
  params.validate();
  spec.validate();
  const Mesh m = build_mesh(params.a, spec, f.breakpoints);
  const double q = params.q;
  const double qs = q * params.sigma;
  bool divergent = false;
  const auto absf = [&f](double t) { return std::abs(f.f(t)); };
  const double f0 = power_head_integral(f.f, m.t0, divergent);
  std::vector<double> lsum(static_cast<std::size_t>(m.octaves), 0.0);
  std::vector<double> rsum(static_cast<std::size_t>(m.octaves), 0.0);
  if (!divergent) {
    const auto F = running_integral(m, f.f, f0);
    for (std::size_t i = 0; i < m.t.size(); ++i) {
      const double t = m.t[i];
      const double tw = std::pow(t, qs);
      lsum[static_cast<std::size_t>(m.oct[i])] += m.w[i] * tw * std::pow(std::abs(F[i]) / t, q);
      rsum[static_cast<std::size_t>(m.oct[i])] += m.w[i] * tw * std::pow(absf(t), q);
    }
  }
  const bool inf_a = std::isinf(params.a);
  Extrapolated l = extrapolate(lsum, inf_a);
  Extrapolated r = extrapolate(rsum, inf_a);
  l.divergent = l.divergent || divergent;

  ComparisonReport rep;
  rep.check_id = "hardy";
  rep.params["q"] = q;
  rep.params["sigma"] = params.sigma;
  rep.params["a"] = number(params.a);
  rep.params["shape"] = f.name;
  if (f.eps > 0.0) rep.params["eps"] = f.eps;
  rep.params["lhs_extrapolation"] = side_json(l);
  rep.params["rhs_extrapolation"] = side_json(r);
  rep.params["quadrature"] = to_json(spec);
  rep.lhs = std::pow(l.total, 1.0 / q);
  rep.rhs = std::pow(r.total, 1.0 / q);
  rep.constant = params.constant();
  settle(rep, l, r, tol);
  return rep;
}

ComparisonReport hardy_polar_check(const std::function<double(std::span<const double>)>& f,
                                   const std::string& name, const PolarHardyParams& params,
                                   const QuadratureSpec& spec, double ceiling, double tol,
                                   std::span<const double> radial_breaks) {
  params.validate();
  spec.validate();
  const int d = params.d;
  const Mesh m = build_mesh(params.a, spec, radial_breaks);
  const DirectionSet dirs = DirectionSet::make(d, spec.direction_count(d), spec.seed);
  const double th = params.theta;
  std::vector<double> ball(m.t.size(), 0.0);
  std::vector<double> rsum(static_cast<std::size_t>(m.octaves), 0.0);
  bool divergent = false;
  std::vector<double> x(static_cast<std::size_t>(d));
  for (std::size_t j = 0; j < dirs.size(); ++j) {
    const auto xi = dirs.direction(j);
    const auto at = [&](double r) {
      for (int a = 0; a < d; ++a) x[a] = r * xi[a];
      return std::abs(f(x));
    };
    const auto g = [&](double r) { return at(r) * std::pow(r, d - 1); };
    const double g0 = power_head_integral(g, m.t0, divergent);
    if (divergent) break;
    const auto G = running_integral(m, g, g0);
    for (std::size_t i = 0; i < m.t.size(); ++i) {
      ball[i] += dirs.weight[j] * G[i];
      const double r = m.t[i];
      rsum[static_cast<std::size_t>(m.oct[i])] +=
          dirs.weight[j] * m.w[i] * std::pow(r, params.beta * th) * std::pow(at(r), th);
    }
  }
  std::vector<double> lsum(static_cast<std::size_t>(m.octaves), 0.0);
  for (std::size_t i = 0; i < m.t.size(); ++i) {
    const double t = m.t[i];
    lsum[static_cast<std::size_t>(m.oct[i])] += m.w[i] * std::pow(std::pow(t, params.beta - d) * ball[i], th);
  }
  const bool inf_a = std::isinf(params.a);
  Extrapolated l = extrapolate(lsum, inf_a);
  Extrapolated r = extrapolate(rsum, inf_a);
  l.divergent = l.divergent || divergent;

  ComparisonReport rep;
  rep.check_id = "hardy-polar";
  rep.params["d"] = d;
  rep.params["theta"] = th;
  rep.params["beta"] = params.beta;
  rep.params["a"] = number(params.a);
  rep.params["shape"] = name;
  rep.params["lhs_extrapolation"] = side_json(l);
  rep.params["rhs_extrapolation"] = side_json(r);
  rep.params["quadrature"] = to_json(spec);
  rep.lhs = std::pow(l.total, 1.0 / th);
  rep.rhs = std::pow(r.total, 1.0 / th);
  rep.constant = ceiling;
  settle(rep, l, r, tol);
  return rep;
}

}  // namespace tracekit
