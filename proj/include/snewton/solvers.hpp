#pragma once

// Newton-type solvers with stable-Hessian step sizes: exact (pseudo-inverse)
// Newton, trust-region Newton, approximate/proximal Newton, adaptive
// backtracking and the affine-invariant trust-region variant, plus a
// proximal gradient baseline and exact-line-search Newton.

#include "snewton/approximation.hpp"
#include "snewton/core.hpp"
#include "snewton/linalg.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace snewton {

/// Adaptive sigma rule: reject and multiply by eta2 when rho < zeta2, keep
/// sigma when rho lies in [zeta2, zeta1], accept and divide by eta1 above.
struct BacktrackingParams {
  double sigma0 = 1.0;
  double zeta1 = 0.9;
  double zeta2 = 0.1;
  double eta1 = 2.0;
  double eta2 = 2.0;
  /// Runs abort with numerical_failure once sigma exceeds ceiling * sigma0.
  double ceiling = 1e6;

  void validate() const;
};

struct SolverConfig {
  double sigma = 1.0;
  double radius = kInf;
  NormSpec norm = NormSpec::l2();
  double theta = 1.0;
  int max_iter = 1000;
  double gap_tol = 1e-12;
  /// Stop when sigma |step|_H falls to this value (0 disables, except for an
  /// exactly zero step).
  double decrement_tol = 1e-9;
  ApproxScheme approx = ApproxScheme::exact();
  std::optional<BacktrackingParams> backtracking;
  std::uint64_t seed = 0;
  /// Minimum value, for gaps; defaults to the objective's recorded f*.
  std::optional<double> f_star;
  /// Stability constant the run is meant to dominate; sigma below it is
  /// reported as a warning.
  std::optional<double> declared_c;
  /// Record eta a posteriori along the realized trajectory.
  bool monitor_eta = false;
  /// Minimizer used as an extra eta probe when known.
  std::optional<Vector> x_star;
  int inner_max_iter = 200000;
};

/// A solver stopped early; carries the trace up to the failure.
class TracedFailure : public std::runtime_error {
 public:
  TracedFailure(const std::string& what, SolveTrace trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const SolveTrace& trace() const { return trace_; }

 private:
  SolveTrace trace_;
};

/// An ascent step although sigma dominates the declared stability constant:
/// the declared constant is wrong.
class DescentViolation : public TracedFailure {
 public:
  using TracedFailure::TracedFailure;
};

/// x+ = x - (1/sigma) [hess f(x)]^+ grad f(x).
SolveTrace exact_newton(const Objective& f, const Vector& x0, const SolverConfig& cfg);

/// Each step minimizes the sigma-scaled Newton model over |step| <= radius.
/// An inner solver failure is rethrown as TracedFailure.
SolveTrace trust_region_newton(const Objective& f, const Vector& x0, const SolverConfig& cfg);

/// Approximate Hessian, optional prox term, optional radius, Theta-accurate
/// inner solves.
SolveTrace approx_prox_newton(const CompositeObjective& F, const Vector& x0,
                              const SolverConfig& cfg);

/// Sigma adapted from the ratio of actual to predicted decrease.
SolveTrace backtracking_newton(const CompositeObjective& F, const Vector& x0,
                               const SolverConfig& cfg);

/// s = argmin over the domain of <g, y-x> + gamma sigma/2 |y-x|^2_H, then
/// x+ = (1-gamma) x + gamma s. F.nonsmooth must be a box or ball indicator.
SolveTrace affine_invariant_tr(const CompositeObjective& F, const Vector& x0, double gamma,
                               const SolverConfig& cfg);

/// x+ = prox_{step g}(x - step grad f(x)).
SolveTrace gradient_descent_baseline(const CompositeObjective& F, const Vector& x0, double step,
                                     const SolverConfig& cfg);

/// Newton direction with golden-section line search for alpha on [0, 2].
SolveTrace exact_line_search_newton(const Objective& f, const Vector& x0, const SolverConfig& cfg);

/// argmin over the grid of d(r)^2 / r (first minimizer on ties).
double optimal_radius(const std::vector<double>& d_values, const std::vector<double>& r_grid);

}  // namespace snewton
