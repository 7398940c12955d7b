#include "snewton/domain.hpp"

#include "snewton/errors.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace snewton {

namespace {

constexpr double kLevelTol = 1e-12;

// Largest t with F(x0 + t d) <= level, found by doubling then bisection.
double ray_extent(const CompositeObjective& F, const Vector& x0, const Vector& d, double level,
                  double scale) {
  double lo = 0.0;
  double hi = scale;
  while (F.value(x0 + hi * d) <= level + kLevelTol) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e8 * scale) {
      throw std::runtime_error("LevelSetDomain: level set appears unbounded; supply bounds");
    }
  }
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (F.value(x0 + mid * d) <= level + kLevelTol) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

Box estimate_bounds(const CompositeObjective& F, const Vector& x0, double level,
                    std::uint64_t seed) {
  const Index n = x0.size();
  std::vector<Vector> dirs;
  for (Index i = 0; i < n; ++i) {
    dirs.push_back(Vector::Unit(n, i));
    dirs.push_back(-Vector::Unit(n, i));
  }
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss;
  const Index extra = 16 * n + 64;
  for (Index k = 0; k < extra; ++k) {
    Vector d(n);
    for (Index i = 0; i < n; ++i) d[i] = gauss(rng);
    const double nd = d.norm();
    if (nd > 0.0) dirs.push_back(d / nd);
  }
  const double scale = 1e-2 * (1.0 + x0.lpNorm<Eigen::Infinity>());
  Vector lo = x0;
  Vector hi = x0;
  for (const auto& d : dirs) {
    const Vector p = x0 + ray_extent(F, x0, d, level, scale) * d;
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  // Boundary probes under-cover a convex set slightly; pad by 2% of the width.
  const Vector pad = 0.02 * (hi - lo) + Vector::Constant(n, 1e-9);
  return Box{lo - pad, hi + pad};
}

}  // namespace

LevelSetDomain::LevelSetDomain(CompositeObjective F, Vector x0, Box bounds, double diameter,
                               NormSpec norm, bool level_filter)
    : F_(std::move(F)),
      x0_(std::move(x0)),
      level_(F_.value(x0_)),
      bounds_(std::move(bounds)),
      diameter_(diameter),
      norm_(std::move(norm)),
      level_filter_(level_filter) {}

LevelSetDomain LevelSetDomain::level_set(CompositeObjective F, Vector x0, NormSpec norm,
                                         std::optional<Box> bounds,
                                         std::optional<double> diameter_override,
                                         std::uint64_t seed) {
  require_same_dim(F.dim(), x0.size(), "LevelSetDomain");
  require_finite(x0, "LevelSetDomain x0");
  const double level = F.value(x0);
  if (!std::isfinite(level)) throw std::invalid_argument("LevelSetDomain: F(x0) is not finite");
  Box b = bounds ? *bounds : estimate_bounds(F, x0, level, seed);
  if (!bounds) {
    if (auto pb = F.nonsmooth.bounding_box()) {
      b.lo = b.lo.cwiseMax(pb->lo);
      b.hi = b.hi.cwiseMin(pb->hi);
    }
  }
  const double diameter = diameter_override ? *diameter_override : b.diameter(norm);
  if (diameter_override && *diameter_override < 0.0) {
    throw std::invalid_argument("LevelSetDomain: diameter must be >= 0");
  }
  return LevelSetDomain(std::move(F), std::move(x0), std::move(b), diameter, std::move(norm),
                        true);
}

LevelSetDomain LevelSetDomain::box(CompositeObjective F, Box bounds, NormSpec norm) {
  require_same_dim(F.dim(), bounds.dim(), "LevelSetDomain::box");
  Vector c = bounds.center();
  const double diameter = bounds.diameter(norm);
  return LevelSetDomain(std::move(F), std::move(c), std::move(bounds), diameter, std::move(norm),
                        false);
}

bool LevelSetDomain::contains(const Vector& x) const {
  if (!bounds_.contains(x)) return false;
  const double v = F_.value(x);
  if (!std::isfinite(v)) return false;
  return !level_filter_ || v <= level_ + kLevelTol;
}

bool level_set_contains(const LevelSetDomain& dom, const Vector& x, double tol_abs) {
  require_same_dim(dom.dim(), x.size(), "level_set_contains");
  const double v = dom.objective().value(x);
  return v <= dom.level() + tol_abs;
}

}  // namespace snewton
