#pragma once

// Sampled estimates and analytic bounds for the Hessian stability constants:
// global c, local d(r), path c(gamma) and the approximation quality eta.
//
// Sampled estimates are lower bounds on the true maxima. Every report carries
// the number of pairs used and the pair that achieved the maximum.

#include "snewton/approximation.hpp"
#include "snewton/core.hpp"
#include "snewton/domain.hpp"
#include "snewton/objectives.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace snewton {

struct SamplePair {
  Vector u;
  Vector v;
};

enum class ConstantKind { global_c, local_d, path_c, eta };
std::string to_string(ConstantKind k);

struct StabilityReport {
  ConstantKind kind = ConstantKind::global_c;
  /// r for local_d, gamma for path_c, NaN otherwise.
  double parameter = kNaN;
  double estimate = 1.0;
  std::optional<SamplePair> witness;
  int samples_used = 0;
  /// Pairs where both quadratic forms vanish; the ratio is undefined there.
  int degenerate_pairs = 0;
  std::optional<double> analytic_bound;
};

struct SamplerConfig {
  int pairs = 10000;
  std::uint64_t seed = 0;
  /// Exhaustive grid instead of random pairs for one-dimensional problems.
  bool grid_1d = true;
  /// Grid spacing; 0 means 1e-3 times the domain diameter.
  double grid_resolution = 0.0;
  int min_valid = 10;
};

/// Points drawn uniformly from dom.bounds() and kept when dom.contains them.
/// Throws InsufficientSamples when fewer than `min_count` are found.
std::vector<Vector> sample_points(const LevelSetDomain& dom, int count, std::uint64_t seed,
                                  int min_count = 1);
/// Consecutive sampled points paired up.
std::vector<SamplePair> sample_pairs(const LevelSetDomain& dom, int count, std::uint64_t seed);
/// Pairs with v = u + t r e, e a random unit vector in `norm`, t in (0, 1].
std::vector<SamplePair> sample_local_pairs(const LevelSetDomain& dom, const NormSpec& norm,
                                           double r, int count, std::uint64_t seed);

// Estimates over an explicit set of pairs. Each pair is evaluated in both
// orientations. Throw InsufficientSamples when fewer than min_valid pairs
// have a defined ratio.
StabilityReport global_c_on_pairs(const Objective& f, const std::vector<SamplePair>& pairs,
                                  int min_valid = 10);
StabilityReport local_d_on_pairs(const Objective& f, const std::vector<SamplePair>& pairs,
                                 const NormSpec& norm, double r, int min_valid = 10);
StabilityReport path_c_on_pairs(const Objective& f, const std::vector<SamplePair>& pairs,
                                double gamma, int min_valid = 10);

StabilityReport estimate_global_c(const Objective& f, const LevelSetDomain& dom,
                                  const SamplerConfig& cfg = {});
StabilityReport estimate_local_d(const Objective& f, const LevelSetDomain& dom,
                                 const NormSpec& norm, double r, const SamplerConfig& cfg = {});
/// d(r) for every r in r_grid on one pooled sample set, so the curve is
/// non-decreasing and reaches the global estimate once r >= diameter.
std::vector<StabilityReport> estimate_local_d_curve(const Objective& f, const LevelSetDomain& dom,
                                                    const NormSpec& norm,
                                                    const std::vector<double>& r_grid,
                                                    const SamplerConfig& cfg = {});
StabilityReport estimate_path_c(const Objective& f, const LevelSetDomain& dom, double gamma,
                                const SamplerConfig& cfg = {});
/// c(gamma) over a grid; a witness at gamma' <= gamma is also a witness at
/// gamma, so the curve is a running maximum.
std::vector<StabilityReport> estimate_path_c_curve(const Objective& f, const LevelSetDomain& dom,
                                                   const std::vector<double>& gammas,
                                                   const SamplerConfig& cfg = {});

/// Ratios restricted to u = x_t along segments x_t -> x_{t+1} and x_t -> x*
/// at alpha in {0.1, ..., 1.0}, both ratio directions.
StabilityReport estimate_trajectory_c(const Objective& f, const std::vector<Vector>& iterates,
                                      const std::optional<Vector>& x_star);

struct EtaSample {
  int iteration = 0;
  Vector x;
  Vector z;
};

/// Smallest eta >= 1 with |z-x|_H / eta <= |z-x|_{hess f(x)} <= eta |z-x|_H
/// over all samples. Throws UnboundedEta when |z-x|_H = 0 < |z-x|_{hess f}.
StabilityReport estimate_eta(const Objective& f, const HessianApproximator& approx,
                             const std::vector<EtaSample>& trajectory);

/// Sufficient-condition bounds: L/mu; 1 + M D/mu; (1 + k D L)^2; exp(k D).
double analytic_bound(const StabilityCondition& cond, double D);

/// Per-link constant of a one-dimensional function on [a, b]: b/a for
/// entropy, (b/a)^(2-q) for robust_q, exp(b-a) for the exponential-type
/// links. +inf when phi'' vanishes on the interval.
double application_bound(const ScalarLink& link, double a, double b);

struct TaylorViolation {
  SamplePair pair;
  bool upper = true;
  double excess = 0.0;
};

struct TaylorReport {
  int checked = 0;
  std::vector<TaylorViolation> violations;
};

/// Checks f(y) - f(x) - <grad f(x), y-x> against c/2 and 1/(2c) times
/// |y-x|^2_{hess f(x)} for each pair (x = u, y = v), relative tolerance 1e-9.
TaylorReport check_taylor_bounds(const Objective& f, double c, const std::vector<SamplePair>& pairs);

}  // namespace snewton
