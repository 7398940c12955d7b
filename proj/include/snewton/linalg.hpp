#pragma once

// Linear solves and constrained quadratic subproblems.

#include "snewton/core.hpp"

#include <functional>

namespace snewton {

/// Minimum-norm solution of H x = b for symmetric PSD H. Throws RangeError
/// when b is detectably outside range(H) (residual above 1e-8 |b|).
Vector psd_solve(const SymMatrix& H, const Vector& b);

using LinearOperator = std::function<Vector(const Vector&)>;

struct CgResult {
  Vector x;
  int iterations = 0;
  bool converged = false;
  double relative_residual = 0.0;
};

/// Conjugate gradients on a symmetric PSD operator, started from zero.
/// Throws NotPSDError on negative curvature.
CgResult cg_solve(const LinearOperator& op, const Vector& b, double rel_tol, int max_iter);

/// Truncated CG for min <b, p> + 1/2 p^T H p subject to |p|_2 <= radius.
/// radius may be kInf. Negative or zero curvature directions are followed to
/// the boundary.
CgResult steihaug_cg(const LinearOperator& op, const Vector& b, double radius, double rel_tol,
                     int max_iter);

enum class InnerMethod {
  newton_system,        // unconstrained: pseudo-inverse solve
  secular_equation,     // l2 radius, no prox term
  coordinate_active_set,  // separable prox and/or box radius
  multiplier_search,    // one ellipsoidal constraint plus separable pieces
  proximal_gradient,    // early-stopped accelerated proximal gradient
  scaled_reference,     // convex combination of 0 and the exact minimizer
};
std::string to_string(InnerMethod m);

struct SubproblemCertificate {
  double theta_achieved = 1.0;
  InnerMethod method = InnerMethod::newton_system;
  int inner_iters = 0;
  /// Q* from the reference solve.
  double reference_value = 0.0;
  /// Lagrange multiplier of the radius constraint when known (l2 radius).
  double multiplier = 0.0;
};

struct SubproblemSolution {
  Vector step;
  double model_value = 0.0;
  SubproblemCertificate certificate;
};

struct InnerConfig {
  double theta = 1.0;
  int max_iter = 200000;
};

/// Minimizes model.evaluate over |step|_norm <= radius (radius may be kInf).
/// Supported combinations: any separable prox with any norm, an l2-ball prox
/// with an infinite or linf radius. An l2-ball prox with an l2 or metric
/// radius throws std::invalid_argument.
SubproblemSolution solve_tr_subproblem(const QuadraticModel& model, const NormSpec& norm,
                                       double radius, const InnerConfig& cfg = {});

SubproblemSolution solve_prox_subproblem(const QuadraticModel& model, const NormSpec& norm,
                                         double radius, double theta);

/// High-accuracy reference minimizer used to certify Theta.
SubproblemSolution reference_solve(const QuadraticModel& model, const NormSpec& norm,
                                   double radius);

struct ScalingCheck {
  bool holds = false;
  double lhs = 0.0;  // min Q^alpha
  double rhs = 0.0;  // min Q^{1/beta} / (alpha beta)
};

/// Checks min Q^alpha <= min Q^{1/beta} / (alpha beta) over |step| <= radius,
/// where Q^s is the model with sigma replaced by s. Requires alpha beta >= 1.
ScalingCheck check_sigma_scaling_inequality(const QuadraticModel& model, const NormSpec& norm,
                                            double radius, double alpha, double beta);

}  // namespace snewton
