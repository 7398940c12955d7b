#pragma once

#include "snewton/core.hpp"

#include <cstdint>
#include <optional>

namespace snewton {

/// The region on which stability constants are posed.
///
/// Either the level set {x : F(x) <= F(x0)} clipped to a bounding box, or a
/// plain box (used for one-dimensional links studied on an interval [a, b]).
/// Sampling draws uniformly from `bounds` and rejects points outside the
/// region.
class LevelSetDomain {
 public:
  /// Level set of F through x0. When `bounds` is absent it is taken from an
  /// indicator prox term, or estimated by probing rays from x0. The diameter
  /// defaults to the diameter of the bounding box in `norm`.
  static LevelSetDomain level_set(CompositeObjective F, Vector x0, NormSpec norm = NormSpec::l2(),
                                  std::optional<Box> bounds = std::nullopt,
                                  std::optional<double> diameter_override = std::nullopt,
                                  std::uint64_t seed = 0);

  /// The box itself, without level-set filtering. x0 is the box center.
  static LevelSetDomain box(CompositeObjective F, Box bounds, NormSpec norm = NormSpec::l2());

  const CompositeObjective& objective() const { return F_; }
  const Vector& x0() const { return x0_; }
  double level() const { return level_; }
  const Box& bounds() const { return bounds_; }
  double diameter_estimate() const { return diameter_; }
  const NormSpec& norm() const { return norm_; }
  bool filters_level() const { return level_filter_; }
  Index dim() const { return x0_.size(); }

  /// Membership of the sampling region: inside bounds, inside dom F, and
  /// (for level sets) F(x) <= F(x0) + 1e-12.
  bool contains(const Vector& x) const;

 private:
  LevelSetDomain(CompositeObjective F, Vector x0, Box bounds, double diameter, NormSpec norm,
                 bool level_filter);

  CompositeObjective F_;
  Vector x0_;
  double level_;
  Box bounds_;
  double diameter_;
  NormSpec norm_;
  bool level_filter_;
};

/// F(x) <= F(x0) + tol_abs.
bool level_set_contains(const LevelSetDomain& dom, const Vector& x, double tol_abs = 1e-12);

}  // namespace snewton
