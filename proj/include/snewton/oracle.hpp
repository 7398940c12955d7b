#pragma once

// Brute-force and closed-form checks. Nothing here calls into the
// subproblem solvers or the Newton solvers, so the two can be compared.

#include "snewton/core.hpp"
#include "snewton/objectives.hpp"

#include <optional>
#include <vector>

namespace snewton {

/// Step region for the grid search: a box, optionally intersected with
/// {|step|_norm <= radius}.
struct GridDomain {
  Box bounds;
  std::optional<NormSpec> norm;
  double radius = kInf;
};

struct GridMinimum {
  Vector point;
  double value = kInf;
  long evaluated = 0;
};

/// Exhaustive grid minimum of the model over the region, grid spacing at
/// most `resolution` per axis, endpoints included. dim <= 3.
GridMinimum grid_minimize_quadratic(const QuadraticModel& model, const GridDomain& domain,
                                    double resolution);

struct FiniteDiffErrors {
  double grad_err = 0.0;
  double hess_err = 0.0;
};

/// Central differences of value (for the gradient) and of the gradient (for
/// the Hessian); errors relative to max(1, |analytic|). Throws DomainError
/// when some x +- h e_i leaves the objective's domain.
FiniteDiffErrors finite_diff_check(const Objective& f, const Vector& x, double h = 1e-6);

struct RateFit {
  std::vector<double> per_step_factors;
  double geometric_factor = kNaN;
  double r_squared = kNaN;
  int points_used = 0;
};

/// Per-step gap ratios over accepted records, stopping at the first gap at
/// or below the noise floor (default 1e2 eps max(1, |f*|)). The geometric
/// factor is the worst factor over the last `tail_fraction` of steps.
/// Throws std::invalid_argument with fewer than 5 usable points.
RateFit fit_rate(const SolveTrace& trace, double f_star, double tail_fraction = 0.5,
                 std::optional<double> noise_floor = std::nullopt);

/// max phi'' / min phi'' over [a, b] from the monotonicity of phi''.
/// Throws DomainError when phi'' vanishes on the interval.
double scalar_stability_exact(const ScalarLink& link, double a, double b);

}  // namespace snewton
