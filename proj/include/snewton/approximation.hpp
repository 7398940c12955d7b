#pragma once

// Approximate Hessians H_t for the inexact Newton solvers.

#include "snewton/core.hpp"
#include "snewton/linalg.hpp"

#include <cstdint>
#include <string>

namespace snewton {

struct ApproxScheme {
  enum class Kind { exact_hessian, sketch, block_diag, hessian_free };
  Kind kind = Kind::exact_hessian;
  int rows = 0;          // sketch: number of sampled data rows
  int blocks = 1;        // block_diag: number of contiguous coordinate blocks
  double cg_tol = 1e-10; // hessian_free: relative CG tolerance

  static ApproxScheme exact() { return {}; }
  static ApproxScheme sketch(int rows);
  static ApproxScheme block_diag(int blocks);
  static ApproxScheme hessian_free(double cg_tol = 1e-10);
  std::string describe() const;
};

/// Builds H_t deterministically from (seed, iteration).
///
/// sketch: uniform rows without replacement, rescaled by m/s (GLM objectives
/// only). block_diag: exact Hessian with cross-block entries zeroed.
/// hessian_free: the dense matrix equals the exact Hessian; solvers use op()
/// with CG instead.
class HessianApproximator {
 public:
  HessianApproximator(ObjectivePtr obj, ApproxScheme scheme, std::uint64_t seed = 0);

  SymMatrix build(const Vector& x, int iteration) const;
  LinearOperator op(const Vector& x, int iteration) const;
  const ApproxScheme& scheme() const { return scheme_; }
  const Objective& objective() const { return *obj_; }

 private:
  ObjectivePtr obj_;
  ApproxScheme scheme_;
  std::uint64_t seed_;
};

}  // namespace snewton
