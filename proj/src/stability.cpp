#include "snewton/stability.hpp"

#include "snewton/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace snewton {

std::string to_string(ConstantKind k) {
  switch (k) {
    case ConstantKind::global_c:
      return "global_c";
    case ConstantKind::local_d:
      return "local_d";
    case ConstantKind::path_c:
      return "path_c";
    case ConstantKind::eta:
      return "eta";
  }
  return "?";
}

namespace {

// |d|^2 under the Hessian at x.
double form(const Objective& f, const Vector& x, const Vector& d) { return d.dot(f.hvp(x, d)); }

// Running maximum of num/den over ordered pairs (u, v).
class RatioMax {
 public:
  explicit RatioMax(ConstantKind kind, double parameter) {
    rep_.kind = kind;
    rep_.parameter = parameter;
  }

  void add(const Vector& u, const Vector& v, double num, double den) {
    ++rep_.samples_used;
    num = std::max(num, 0.0);
    den = std::max(den, 0.0);
    if (num == 0.0 && den == 0.0) {
      ++rep_.degenerate_pairs;
      return;
    }
    const double ratio = den == 0.0 ? kInf : num / den;
    if (ratio > rep_.estimate || !rep_.witness) {
      rep_.estimate = std::max(rep_.estimate, ratio);
      rep_.witness = SamplePair{u, v};
    }
  }

  // each pair contributes a count of one even when scored in both orientations
  void uncount(int n) { rep_.samples_used -= n; }

  StabilityReport finish(int min_valid) {
    if (rep_.samples_used - rep_.degenerate_pairs < min_valid) {
      throw InsufficientSamples(to_string(rep_.kind) + ": only " +
                                std::to_string(rep_.samples_used - rep_.degenerate_pairs) +
                                " valid pairs");
    }
    return rep_;
  }

 private:
  StabilityReport rep_;
};

bool use_grid(const LevelSetDomain& dom, const SamplerConfig& cfg) {
  return cfg.grid_1d && dom.dim() == 1;
}

struct Grid1d {
  std::vector<double> x;
  std::vector<double> h;  // f''(x)
};

Grid1d make_grid(const Objective& f, const LevelSetDomain& dom, const SamplerConfig& cfg) {
  const double lo = dom.bounds().lo[0];
  const double hi = dom.bounds().hi[0];
  const double width = hi - lo;
  const double res = cfg.grid_resolution > 0.0 ? cfg.grid_resolution : 1e-3 * width;
  const long n = width > 0.0 ? static_cast<long>(std::ceil(width / res - 1e-9)) + 1 : 1;
  Grid1d g;
  const Vector one = Vector::Ones(1);
  for (long i = 0; i < n; ++i) {
    const double t = n == 1 ? lo : (i == n - 1 ? hi : lo + width * static_cast<double>(i) / (n - 1));
    const Vector p = Vector::Constant(1, t);
    if (!dom.contains(p)) continue;
    g.x.push_back(t);
    g.h.push_back(form(f, p, one));
  }
  if (static_cast<int>(g.x.size()) < 2) {
    throw InsufficientSamples("grid: fewer than two grid points inside the domain");
  }
  return g;
}

Vector pt(double t) { return Vector::Constant(1, t); }

StabilityReport grid_local(const Grid1d& g, double r, ConstantKind kind, int min_valid) {
  RatioMax acc(kind, r);
  const std::size_t n = g.x.size();
  const double rr = r * (1.0 + 1e-12);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n && g.x[j] - g.x[i] <= rr; ++j) {
      acc.add(pt(g.x[i]), pt(g.x[j]), g.h[j], g.h[i]);
      acc.add(pt(g.x[j]), pt(g.x[i]), g.h[i], g.h[j]);
      acc.uncount(1);
    }
  }
  return acc.finish(min_valid);
}

StabilityReport grid_path(const Objective& f, const Grid1d& g, double gamma, int min_valid) {
  RatioMax acc(ConstantKind::path_c, gamma);
  const std::size_t n = g.x.size();
  const Vector one = Vector::Ones(1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double w = g.x[i] + gamma * (g.x[j] - g.x[i]);
      acc.add(pt(g.x[i]), pt(g.x[j]), form(f, pt(w), one), g.h[i]);
    }
  }
  return acc.finish(min_valid);
}

void require_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
}

}  // namespace

std::vector<Vector> sample_points(const LevelSetDomain& dom, int count, std::uint64_t seed,
                                  int min_count) {
  std::mt19937_64 rng(seed);
  const Box& b = dom.bounds();
  std::vector<std::uniform_real_distribution<double>> coord;
  for (Index i = 0; i < dom.dim(); ++i) coord.emplace_back(b.lo[i], b.hi[i]);
  std::vector<Vector> out;
  const long max_tries = 1000L * count + 1000;
  for (long t = 0; t < max_tries && static_cast<int>(out.size()) < count; ++t) {
    Vector p(dom.dim());
    for (Index i = 0; i < dom.dim(); ++i) p[i] = coord[static_cast<std::size_t>(i)](rng);
    if (dom.contains(p)) out.push_back(std::move(p));
  }
  if (static_cast<int>(out.size()) < min_count) {
    throw InsufficientSamples("sampler: found " + std::to_string(out.size()) +
                              " points in the domain, need " + std::to_string(min_count));
  }
  return out;
}

std::vector<SamplePair> sample_pairs(const LevelSetDomain& dom, int count, std::uint64_t seed) {
  const auto pts = sample_points(dom, 2 * count, seed, 2);
  std::vector<SamplePair> out;
  for (std::size_t i = 0; i + 1 < pts.size(); i += 2) out.push_back(SamplePair{pts[i], pts[i + 1]});
  return out;
}

std::vector<SamplePair> sample_local_pairs(const LevelSetDomain& dom, const NormSpec& norm,
                                           double r, int count, std::uint64_t seed) {
  if (!(r > 0.0)) throw std::invalid_argument("sample_local_pairs: r must be > 0");
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Box& b = dom.bounds();
  std::vector<SamplePair> out;
  const long max_tries = 1000L * count + 1000;
  for (long t = 0; t < max_tries && static_cast<int>(out.size()) < count; ++t) {
    Vector u(dom.dim());
    for (Index i = 0; i < dom.dim(); ++i) u[i] = b.lo[i] + (b.hi[i] - b.lo[i]) * unit(rng);
    if (!dom.contains(u)) continue;
    Vector e(dom.dim());
    for (Index i = 0; i < dom.dim(); ++i) e[i] = gauss(rng);
    const double ne = norm(e);
    if (!(ne > 0.0)) continue;
    const double s = 1.0 - unit(rng);  // (0, 1]
    Vector v = u + (s * r / ne) * e;
    if (!dom.contains(v)) continue;
    out.push_back(SamplePair{std::move(u), std::move(v)});
  }
  return out;
}

StabilityReport global_c_on_pairs(const Objective& f, const std::vector<SamplePair>& pairs,
                                  int min_valid) {
  RatioMax acc(ConstantKind::global_c, kNaN);
  for (const auto& p : pairs) {
    const Vector d = p.v - p.u;
    const double at_v = form(f, p.v, d);
    const double at_u = form(f, p.u, d);
    acc.add(p.u, p.v, at_v, at_u);
    acc.add(p.v, p.u, at_u, at_v);
    acc.uncount(1);
  }
  return acc.finish(min_valid);
}

StabilityReport local_d_on_pairs(const Objective& f, const std::vector<SamplePair>& pairs,
                                 const NormSpec& norm, double r, int min_valid) {
  if (!(r > 0.0)) throw std::invalid_argument("local d: r must be > 0");
  RatioMax acc(ConstantKind::local_d, r);
  const double rr = r * (1.0 + 1e-12);
  for (const auto& p : pairs) {
    const Vector d = p.v - p.u;
    if (norm(d) > rr) continue;
    const double at_v = form(f, p.v, d);
    const double at_u = form(f, p.u, d);
    acc.add(p.u, p.v, at_v, at_u);
    acc.add(p.v, p.u, at_u, at_v);
    acc.uncount(1);
  }
  return acc.finish(min_valid);
}

StabilityReport path_c_on_pairs(const Objective& f, const std::vector<SamplePair>& pairs,
                                double gamma, int min_valid) {
  require_gamma(gamma);
  RatioMax acc(ConstantKind::path_c, gamma);
  for (const auto& p : pairs) {
    for (int o = 0; o < 2; ++o) {
      const Vector& u = o == 0 ? p.u : p.v;
      const Vector& v = o == 0 ? p.v : p.u;
      const Vector d = gamma * (v - u);
      const Vector w = u + d;
      acc.add(u, v, form(f, w, d), form(f, u, d));
    }
    acc.uncount(1);
  }
  return acc.finish(min_valid);
}

StabilityReport estimate_global_c(const Objective& f, const LevelSetDomain& dom,
                                  const SamplerConfig& cfg) {
  if (use_grid(dom, cfg)) {
    const Grid1d g = make_grid(f, dom, cfg);
    return grid_local(g, kInf, ConstantKind::global_c, cfg.min_valid);
  }
  return global_c_on_pairs(f, sample_pairs(dom, cfg.pairs, cfg.seed), cfg.min_valid);
}

StabilityReport estimate_local_d(const Objective& f, const LevelSetDomain& dom,
                                 const NormSpec& norm, double r, const SamplerConfig& cfg) {
  return estimate_local_d_curve(f, dom, norm, {r}, cfg).front();
}

std::vector<StabilityReport> estimate_local_d_curve(const Objective& f, const LevelSetDomain& dom,
                                                    const NormSpec& norm,
                                                    const std::vector<double>& r_grid,
                                                    const SamplerConfig& cfg) {
  if (r_grid.empty()) throw std::invalid_argument("local d: empty r grid");
  std::vector<StabilityReport> out;
  if (use_grid(dom, cfg)) {
    const Grid1d g = make_grid(f, dom, cfg);
    for (double r : r_grid) {
      if (!(r > 0.0)) throw std::invalid_argument("local d: r must be > 0");
      // in one dimension every norm is a multiple of |.|
      const double scale = norm(Vector::Ones(1));
      StabilityReport rep = grid_local(g, r / scale, ConstantKind::local_d, cfg.min_valid);
      rep.parameter = r;
      out.push_back(std::move(rep));
    }
    return out;
  }
  std::vector<SamplePair> pool = sample_pairs(dom, cfg.pairs / 2, cfg.seed);
  const int per_r = std::max(1, cfg.pairs / 2 / static_cast<int>(r_grid.size()));
  for (std::size_t k = 0; k < r_grid.size(); ++k) {
    auto local = sample_local_pairs(dom, norm, r_grid[k], per_r, cfg.seed + 7919 * (k + 1));
    pool.insert(pool.end(), local.begin(), local.end());
  }
  for (double r : r_grid) out.push_back(local_d_on_pairs(f, pool, norm, r, cfg.min_valid));
  return out;
}

StabilityReport estimate_path_c(const Objective& f, const LevelSetDomain& dom, double gamma,
                                const SamplerConfig& cfg) {
  require_gamma(gamma);
  if (use_grid(dom, cfg)) return grid_path(f, make_grid(f, dom, cfg), gamma, cfg.min_valid);
  return path_c_on_pairs(f, sample_pairs(dom, cfg.pairs, cfg.seed), gamma, cfg.min_valid);
}

std::vector<StabilityReport> estimate_path_c_curve(const Objective& f, const LevelSetDomain& dom,
                                                   const std::vector<double>& gammas,
                                                   const SamplerConfig& cfg) {
  std::vector<double> sorted = gammas;
  std::sort(sorted.begin(), sorted.end());
  std::vector<StabilityReport> out;
  std::optional<StabilityReport> best;
  for (double g : sorted) {
    StabilityReport rep = estimate_path_c(f, dom, g, cfg);
    if (best && best->estimate > rep.estimate) {
      // w = u + g' (v - u) = u + g (v' - u) with v' = u + (g'/g)(v - u) in the domain
      rep.estimate = best->estimate;
      const SamplePair& w = *best->witness;
      rep.witness = SamplePair{w.u, w.u + (best->parameter / g) * (w.v - w.u)};
    }
    best = rep;
    best->parameter = g;
    out.push_back(rep);
  }
  return out;
}

StabilityReport estimate_trajectory_c(const Objective& f, const std::vector<Vector>& iterates,
                                      const std::optional<Vector>& x_star) {
  RatioMax acc(ConstantKind::global_c, kNaN);
  for (std::size_t t = 0; t < iterates.size(); ++t) {
    const Vector& u = iterates[t];
    std::vector<Vector> targets;
    if (t + 1 < iterates.size()) targets.push_back(iterates[t + 1]);
    if (x_star) targets.push_back(*x_star);
    for (const auto& v : targets) {
      for (int a = 1; a <= 10; ++a) {
        const Vector d = (0.1 * a) * (v - u);
        const Vector w = u + d;
        const double at_w = form(f, w, d);
        const double at_u = form(f, u, d);
        acc.add(u, w, at_w, at_u);
        acc.add(u, w, at_u, at_w);
        acc.uncount(1);
      }
    }
  }
  return acc.finish(1);
}

StabilityReport estimate_eta(const Objective& f, const HessianApproximator& approx,
                             const std::vector<EtaSample>& trajectory) {
  if (trajectory.empty()) throw std::invalid_argument("estimate_eta: empty trajectory");
  StabilityReport rep;
  rep.kind = ConstantKind::eta;
  for (const auto& s : trajectory) {
    const Vector d = s.z - s.x;
    ++rep.samples_used;
    const double a = std::max(0.0, d.dot(f.hessian(s.x) * d));
    const double h = std::max(0.0, d.dot(approx.build(s.x, s.iteration) * d));
    if (a == 0.0 && h == 0.0) {
      ++rep.degenerate_pairs;
      continue;
    }
    if (a == 0.0 || h == 0.0) {
      throw UnboundedEta("estimate_eta: one of the two norms vanishes at iteration " +
                         std::to_string(s.iteration));
    }
    const double eta = std::sqrt(std::max(a / h, h / a));
    if (eta >= rep.estimate || !rep.witness) {
      rep.estimate = std::max(rep.estimate, eta);
      rep.witness = SamplePair{s.x, s.z};
    }
  }
  return rep;
}

double analytic_bound(const StabilityCondition& c, double D) {
  if (!(D >= 0.0)) throw std::invalid_argument("analytic_bound: D must be >= 0");
  using K = StabilityCondition::Kind;
  switch (c.kind) {
    case K::lipschitz_grad_strongly_convex:
      if (!(c.L > 0.0 && c.mu > 0.0)) throw std::invalid_argument("analytic_bound: need L, mu > 0");
      return c.L / c.mu;
    case K::lipschitz_hess_strongly_convex:
      if (!(c.M >= 0.0 && c.mu > 0.0)) throw std::invalid_argument("analytic_bound: need M >= 0, mu > 0");
      return 1.0 + c.M * D / c.mu;
    case K::self_concordant_lipschitz_grad:
      if (!(c.k >= 0.0 && c.L > 0.0)) throw std::invalid_argument("analytic_bound: need k >= 0, L > 0");
      return (1.0 + c.k * D * c.L) * (1.0 + c.k * D * c.L);
    case K::quasi_self_concordant:
      if (!(c.k >= 0.0)) throw std::invalid_argument("analytic_bound: need k >= 0");
      return std::exp(c.k * D);
  }
  return kNaN;
}

double application_bound(const ScalarLink& link, double a, double b) {
  if (!(a <= b)) throw std::invalid_argument("application_bound: need a <= b");
  using K = ScalarLink::Kind;
  switch (link.kind()) {
    case K::entropy:
      if (!(a > 0.0)) throw DomainError("entropy: interval must lie in u > 0");
      return b / a;
    case K::robust_q:
      if (!(a > 0.0)) throw DomainError("robust_q: interval must lie in u > 0");
      return std::pow(b / a, 2.0 - link.q());
    case K::logistic:
    case K::exp_shift:
    case K::neg_exp_linear:
      return std::exp(b - a);
    case K::power_even: {
      if (link.k() == 1) return 1.0;
      if (a <= 0.0 && b >= 0.0) return kInf;
      const double lo = std::min(std::abs(a), std::abs(b));
      const double hi = std::max(std::abs(a), std::abs(b));
      return std::pow(hi / lo, 2 * link.k() - 2);
    }
  }
  return kNaN;
}

TaylorReport check_taylor_bounds(const Objective& f, double c, const std::vector<SamplePair>& pairs) {
  if (!(c > 0.0)) throw std::invalid_argument("check_taylor_bounds: c must be > 0");
  TaylorReport rep;
  for (const auto& p : pairs) {
    const Vector d = p.v - p.u;
    const double fx = f.value(p.u);
    const double fy = f.value(p.v);
    const double lin = f.gradient(p.u).dot(d);
    const double q = std::max(0.0, form(f, p.u, d));
    const double gap = fy - fx - lin;
    const double tol = 1e-9 * std::max({1.0, std::abs(fx), std::abs(fy), std::abs(lin), c * q});
    ++rep.checked;
    if (gap > 0.5 * c * q + tol) rep.violations.push_back({p, true, gap - 0.5 * c * q});
    if (gap < q / (2.0 * c) - tol) rep.violations.push_back({p, false, q / (2.0 * c) - gap});
  }
  return rep;
}

}  // namespace snewton
