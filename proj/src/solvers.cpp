#include "snewton/solvers.hpp"

#include "snewton/errors.hpp"
#include "snewton/stability.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace snewton {

void BacktrackingParams::validate() const {
  if (!(sigma0 > 0.0)) throw std::invalid_argument("backtracking: sigma0 must be > 0");
  if (!(zeta2 >= 0.0 && zeta1 > zeta2 && zeta1 < 1.0)) {
    throw std::invalid_argument("backtracking: need 0 <= zeta2 < zeta1 < 1");
  }
  if (!(eta1 > 1.0 && eta2 >= eta1)) throw std::invalid_argument("backtracking: need eta2 >= eta1 > 1");
  if (!(ceiling > 1.0)) throw std::invalid_argument("backtracking: ceiling must be > 1");
}

namespace {

using Clock = std::chrono::steady_clock;

ObjectivePtr borrow(const Objective& f) { return ObjectivePtr(ObjectivePtr(), &f); }

void check_common(const SolverConfig& cfg, Index dim, const Vector& x0) {
  require_same_dim(dim, x0.size(), "solver x0");
  require_finite(x0, "solver x0");
  if (!(cfg.sigma > 0.0) || !std::isfinite(cfg.sigma)) {
    throw std::invalid_argument("solver: sigma must be finite and > 0");
  }
  if (!(cfg.radius > 0.0)) throw std::invalid_argument("solver: radius must be > 0");
  if (!(cfg.theta > 0.0 && cfg.theta <= 1.0)) throw std::invalid_argument("solver: theta must lie in (0, 1]");
  if (cfg.max_iter < 0) throw std::invalid_argument("solver: max_iter must be >= 0");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Shared bookkeeping: records, gaps and stopping.
class Run {
 public:
  Run(std::string name, const CompositeObjective& F, const SolverConfig& cfg)
      : F_(F), cfg_(cfg), trace_(std::move(name)), start_(Clock::now()) {
    f_star_ = cfg.f_star ? cfg.f_star : F.f_star();
  }

  IterationRecord snapshot(int iter, const Vector& x) const {
    IterationRecord r;
    r.iter = iter;
    r.x = x;
    r.composite_value = F_.value(x);
    r.f_value = F_.smooth->in_domain(x) ? F_.smooth->value(x) : kNaN;
    if (f_star_) r.gap = r.composite_value - *f_star_;
    r.wall_time = std::chrono::duration<double>(Clock::now() - start_).count();
    return r;
  }

  void start(const Vector& x0) {
    IterationRecord r = snapshot(0, x0);
    r.sigma = cfg_.sigma;
    r.theta_achieved = std::nullopt;
    trace_.append(std::move(r));
  }

  bool stop_after(const IterationRecord& r) const {
    if (r.gap && *r.gap <= cfg_.gap_tol) return true;
    return r.newton_decrement <= cfg_.decrement_tol || r.newton_decrement == 0.0;
  }

  void warn_sigma(double sigma) {
    if (cfg_.declared_c && sigma < *cfg_.declared_c) {
      trace_.warn("sigma " + fmt(sigma) + " is below the declared stability constant " +
                  fmt(*cfg_.declared_c) + "; the rate guarantee does not apply");
    }
  }

  SolveTrace& trace() { return trace_; }
  const std::optional<double>& f_star() const { return f_star_; }

  SolveTrace finish() {
    if (trace_.status() == SolveStatus::running) trace_.set_status(SolveStatus::max_iter);
    return std::move(trace_);
  }

 private:
  const CompositeObjective& F_;
  const SolverConfig& cfg_;
  SolveTrace trace_;
  Clock::time_point start_;
  std::optional<double> f_star_;
};

Vector keep_in_domain(const ProxTerm& g, const Vector& x) {
  return g.is_indicator() ? g.prox(x, 1.0) : x;
}

double h_norm(const SymMatrix& H, const Vector& d) { return std::sqrt(std::max(0.0, weighted_norm_sq(d, H))); }

void attach_eta(SolveTrace& trace, const Objective& f, const HessianApproximator& approx,
                const std::vector<EtaSample>& samples) {
  if (samples.empty()) return;
  try {
    trace.set_eta(estimate_eta(f, approx, samples).estimate);
  } catch (const UnboundedEta& e) {
    trace.warn(std::string("eta monitor: ") + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------

SolveTrace exact_newton(const Objective& f, const Vector& x0, const SolverConfig& cfg) {
  check_common(cfg, f.dim(), x0);
  const CompositeObjective F{borrow(f), ProxTerm::zero()};
  Run run("exact_newton", F, cfg);
  run.warn_sigma(cfg.sigma);
  Vector x = x0;
  run.start(x);
  if (run.stop_after(run.trace().last())) {
    run.trace().set_status(SolveStatus::converged);
    return run.finish();
  }
  for (int t = 1; t <= cfg.max_iter; ++t) {
    const Vector g = f.gradient(x);
    const SymMatrix H = f.hessian(x);
    Vector step;
    try {
      step = -psd_solve(H, g) / cfg.sigma;
    } catch (const RangeError& e) {
      run.trace().warn(e.what());
      run.trace().set_status(SolveStatus::numerical_failure);
      break;
    }
    const Vector x_new = x + step;
    const double f_old = run.trace().last().composite_value;
    IterationRecord r = run.snapshot(t, x_new);
    if (!std::isfinite(r.composite_value)) {
      run.trace().warn("iterate left the domain at iteration " + std::to_string(t));
      run.trace().set_status(SolveStatus::domain_violation);
      break;
    }
    r.step_norm = cfg.norm(step);
    r.sigma = cfg.sigma;
    r.theta_achieved = 1.0;
    r.newton_decrement = cfg.sigma * h_norm(H, step);
    run.trace().append(r);
    if (cfg.declared_c && cfg.sigma >= *cfg.declared_c &&
        r.composite_value > f_old + 1e-12 * (1.0 + std::abs(f_old))) {
      run.trace().set_status(SolveStatus::numerical_failure);
      throw DescentViolation("exact_newton: ascent at iteration " + std::to_string(t) +
                                 " although sigma >= declared c",
                             run.finish());
    }
    x = x_new;
    if (run.stop_after(r)) {
      run.trace().set_status(SolveStatus::converged);
      break;
    }
  }
  return run.finish();
}

SolveTrace trust_region_newton(const Objective& f, const Vector& x0, const SolverConfig& cfg) {
  check_common(cfg, f.dim(), x0);
  const CompositeObjective F{borrow(f), ProxTerm::zero()};
  Run run("trust_region_newton", F, cfg);
  run.warn_sigma(cfg.sigma);
  Vector x = x0;
  run.start(x);
  if (run.stop_after(run.trace().last())) {
    run.trace().set_status(SolveStatus::converged);
    return run.finish();
  }
  InnerConfig inner;
  inner.max_iter = cfg.inner_max_iter;
  for (int t = 1; t <= cfg.max_iter; ++t) {
    const SymMatrix H = f.hessian(x);
    const QuadraticModel model(x, f.gradient(x), H, cfg.sigma);
    SubproblemSolution sol;
    try {
      sol = solve_tr_subproblem(model, cfg.norm, cfg.radius, inner);
    } catch (const InnerSolverError& e) {
      run.trace().set_status(SolveStatus::numerical_failure);
      throw TracedFailure(e.what(), run.finish());
    } catch (const RangeError& e) {
      run.trace().warn(e.what());
      run.trace().set_status(SolveStatus::numerical_failure);
      break;
    }
    const Vector x_new = x + sol.step;
    IterationRecord r = run.snapshot(t, x_new);
    if (!std::isfinite(r.composite_value)) {
      run.trace().warn("iterate left the domain at iteration " + std::to_string(t));
      run.trace().set_status(SolveStatus::domain_violation);
      break;
    }
    r.step_norm = cfg.norm(sol.step);
    r.sigma = cfg.sigma;
    r.theta_achieved = sol.certificate.theta_achieved;
    r.newton_decrement = cfg.sigma * h_norm(H, sol.step);
    run.trace().append(r);
    x = x_new;
    if (run.stop_after(r)) {
      run.trace().set_status(SolveStatus::converged);
      break;
    }
  }
  return run.finish();
}

SolveTrace approx_prox_newton(const CompositeObjective& F, const Vector& x0, const SolverConfig& cfg) {
  check_common(cfg, F.dim(), x0);
  if (!std::isfinite(F.nonsmooth.value(x0))) {
    throw std::invalid_argument("approx_prox_newton: x0 outside the domain of the prox term");
  }
  const Objective& f = *F.smooth;
  const HessianApproximator approx(F.smooth, cfg.approx, cfg.seed);
  Run run("approx_prox_newton", F, cfg);
  run.warn_sigma(cfg.sigma);
  Vector x = x0;
  run.start(x);
  if (run.stop_after(run.trace().last())) {
    run.trace().set_status(SolveStatus::converged);
    return run.finish();
  }
  InnerConfig inner;
  inner.theta = cfg.theta;
  inner.max_iter = cfg.inner_max_iter;
  const bool matrix_free = cfg.approx.kind == ApproxScheme::Kind::hessian_free &&
                           F.nonsmooth.kind() == ProxTerm::Kind::zero &&
                           (cfg.norm.kind() == NormSpec::Kind::l2 || !std::isfinite(cfg.radius));
  std::vector<EtaSample> eta_samples;
  for (int t = 1; t <= cfg.max_iter; ++t) {
    const Vector g = f.gradient(x);
    const SymMatrix H = approx.build(x, t);
    const QuadraticModel model(x, g, H, cfg.sigma, F.nonsmooth);
    Vector step;
    std::optional<double> theta;
    try {
      if (matrix_free) {
        const LinearOperator Hop = approx.op(x, t);
        const double s = cfg.sigma;
        auto scaled = [&Hop, s](const Vector& v) { return Vector(s * Hop(v)); };
        step = steihaug_cg(scaled, g, cfg.radius, cfg.approx.cg_tol, 10 * static_cast<int>(x.size()) + 100).x;
        const double q_star = reference_solve(model, cfg.norm, cfg.radius).model_value;
        const double q = model.evaluate(step);
        theta = q_star < 0.0 ? std::min(1.0, q / q_star) : 1.0;
      } else {
        SubproblemSolution sol = solve_tr_subproblem(model, cfg.norm, cfg.radius, inner);
        step = sol.step;
        theta = sol.certificate.theta_achieved;
      }
    } catch (const InnerSolverError& e) {
      run.trace().set_status(SolveStatus::numerical_failure);
      throw TracedFailure(e.what(), run.finish());
    } catch (const RangeError& e) {
      run.trace().warn(e.what());
      run.trace().set_status(SolveStatus::numerical_failure);
      break;
    }
    const Vector x_new = keep_in_domain(F.nonsmooth, x + step);
    IterationRecord r = run.snapshot(t, x_new);
    if (!std::isfinite(r.composite_value)) {
      run.trace().warn("iterate left the domain at iteration " + std::to_string(t));
      run.trace().set_status(SolveStatus::domain_violation);
      break;
    }
    r.step_norm = cfg.norm(x_new - x);
    r.sigma = cfg.sigma;
    r.theta_achieved = theta;
    r.newton_decrement = cfg.sigma * h_norm(H, x_new - x);
    run.trace().append(r);
    if (cfg.monitor_eta) {
      eta_samples.push_back(EtaSample{t, x, x_new});
      if (cfg.x_star) eta_samples.push_back(EtaSample{t, x, *cfg.x_star});
    }
    x = x_new;
    if (run.stop_after(r)) {
      run.trace().set_status(SolveStatus::converged);
      break;
    }
  }
  if (cfg.monitor_eta) attach_eta(run.trace(), f, approx, eta_samples);
  return run.finish();
}

SolveTrace backtracking_newton(const CompositeObjective& F, const Vector& x0, const SolverConfig& cfg) {
  const BacktrackingParams bt = cfg.backtracking ? *cfg.backtracking : BacktrackingParams{};
  bt.validate();
  SolverConfig base = cfg;
  base.sigma = bt.sigma0;
  check_common(base, F.dim(), x0);
  if (!std::isfinite(F.value(x0))) throw std::invalid_argument("backtracking_newton: F(x0) is not finite");
  const Objective& f = *F.smooth;
  const HessianApproximator approx(F.smooth, cfg.approx, cfg.seed);
  Run run("backtracking_newton", F, base);
  Vector x = x0;
  run.start(x);
  if (run.stop_after(run.trace().last())) {
    run.trace().set_status(SolveStatus::converged);
    return run.finish();
  }
  InnerConfig inner;
  inner.theta = cfg.theta;
  inner.max_iter = cfg.inner_max_iter;
  double sigma = bt.sigma0;
  double F_x = run.trace().last().composite_value;
  for (int t = 1; t <= cfg.max_iter; ++t) {
    const Vector g = f.gradient(x);
    const SymMatrix H = approx.build(x, t);
    const QuadraticModel model(x, g, H, sigma, F.nonsmooth);
    SubproblemSolution sol;
    try {
      sol = solve_tr_subproblem(model, cfg.norm, cfg.radius, inner);
    } catch (const InnerSolverError& e) {
      run.trace().set_status(SolveStatus::numerical_failure);
      throw TracedFailure(e.what(), run.finish());
    } catch (const RangeError& e) {
      run.trace().warn(e.what());
      run.trace().set_status(SolveStatus::numerical_failure);
      break;
    }
    const Vector cand = keep_in_domain(F.nonsmooth, x + sol.step);
    const double predicted = model.evaluate(cand - x);  // Q(step) - Q(0)
    double F_cand = F.value(cand);
    if (std::isnan(F_cand)) F_cand = kInf;
    const double decrement = sigma * h_norm(H, cand - x);

    bool accept = false;
    std::optional<double> rho;
    const double sigma_used = sigma;
    if (!(predicted < 0.0)) {
      if (decrement == 0.0 || (cand - x).norm() == 0.0) {
        // stationary: nothing left to decrease
        IterationRecord r = run.snapshot(t, x);
        r.sigma = sigma_used;
        r.accepted = true;
        r.newton_decrement = 0.0;
        r.theta_achieved = sol.certificate.theta_achieved;
        run.trace().append(r);
        run.trace().set_status(SolveStatus::converged);
        break;
      }
      run.trace().warn("iteration " + std::to_string(t) + ": model predicts no decrease");
      sigma *= bt.eta2;
    } else {
      rho = (F_cand - F_x) / predicted;
      if (*rho < bt.zeta2) {
        sigma *= bt.eta2;
      } else if (*rho <= bt.zeta1) {
        accept = true;
      } else {
        accept = true;
        sigma /= bt.eta1;
      }
    }
    const double step_norm = cfg.norm(cand - x);
    if (accept) {
      x = cand;
      F_x = F_cand;
    }
    IterationRecord r = run.snapshot(t, x);
    r.step_norm = step_norm;
    r.sigma = sigma_used;
    r.rho = rho;
    r.accepted = accept;
    r.theta_achieved = sol.certificate.theta_achieved;
    r.newton_decrement = decrement;
    run.trace().append(r);
    if (accept && run.stop_after(r)) {
      run.trace().set_status(SolveStatus::converged);
      break;
    }
    if (sigma > bt.ceiling * bt.sigma0) {
      run.trace().warn("sigma exceeded " + fmt(bt.ceiling) + " * sigma0");
      run.trace().set_status(SolveStatus::numerical_failure);
      break;
    }
  }
  return run.finish();
}

SolveTrace affine_invariant_tr(const CompositeObjective& F, const Vector& x0, double gamma,
                               const SolverConfig& cfg) {
  check_common(cfg, F.dim(), x0);
  if (!F.nonsmooth.is_indicator()) {
    throw std::invalid_argument("affine_invariant_tr: the prox term must be a box or ball indicator");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("affine_invariant_tr: gamma must lie in (0, 1]");
  if (!F.nonsmooth.contains(x0)) throw std::invalid_argument("affine_invariant_tr: x0 outside the domain");
  const Objective& f = *F.smooth;
  const HessianApproximator approx(F.smooth, cfg.approx, cfg.seed);
  Run run("affine_invariant_tr", F, cfg);
  run.warn_sigma(cfg.sigma);
  Vector x = x0;
  run.start(x);
  if (run.stop_after(run.trace().last())) {
    run.trace().set_status(SolveStatus::converged);
    return run.finish();
  }
  InnerConfig inner;
  inner.theta = cfg.theta;
  inner.max_iter = cfg.inner_max_iter;
  std::vector<EtaSample> eta_samples;
  for (int t = 1; t <= cfg.max_iter; ++t) {
    const SymMatrix H = approx.build(x, t);
    const QuadraticModel model(x, f.gradient(x), H, gamma * cfg.sigma, F.nonsmooth);
    SubproblemSolution sol;
    try {
      sol = solve_tr_subproblem(model, cfg.norm, kInf, inner);
    } catch (const InnerSolverError& e) {
      run.trace().set_status(SolveStatus::numerical_failure);
      throw TracedFailure(e.what(), run.finish());
    } catch (const RangeError& e) {
      run.trace().warn(e.what());
      run.trace().set_status(SolveStatus::numerical_failure);
      break;
    }
    const Vector s = keep_in_domain(F.nonsmooth, x + sol.step);
    const Vector x_new = keep_in_domain(F.nonsmooth, (1.0 - gamma) * x + gamma * s);
    IterationRecord r = run.snapshot(t, x_new);
    if (!std::isfinite(r.composite_value)) {
      run.trace().warn("iterate left the domain at iteration " + std::to_string(t));
      run.trace().set_status(SolveStatus::domain_violation);
      break;
    }
    r.step_norm = cfg.norm(x_new - x);
    r.sigma = cfg.sigma;
    r.theta_achieved = sol.certificate.theta_achieved;
    r.newton_decrement = cfg.sigma * h_norm(H, s - x);
    run.trace().append(r);
    if (cfg.monitor_eta) {
      eta_samples.push_back(EtaSample{t, x, x_new});
      if (cfg.x_star) eta_samples.push_back(EtaSample{t, x, *cfg.x_star});
    }
    x = x_new;
    if (run.stop_after(r)) {
      run.trace().set_status(SolveStatus::converged);
      break;
    }
  }
  if (cfg.monitor_eta) attach_eta(run.trace(), f, approx, eta_samples);
  return run.finish();
}

SolveTrace gradient_descent_baseline(const CompositeObjective& F, const Vector& x0, double step,
                                     const SolverConfig& cfg) {
  if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("gradient descent: step must be > 0");
  SolverConfig base = cfg;
  base.sigma = 1.0 / step;
  check_common(base, F.dim(), x0);
  const Objective& f = *F.smooth;
  Run run("gradient_descent", F, base);
  Vector x = x0;
  run.start(x);
  if (run.stop_after(run.trace().last())) {
    run.trace().set_status(SolveStatus::converged);
    return run.finish();
  }
  for (int t = 1; t <= cfg.max_iter; ++t) {
    const Vector x_new = F.nonsmooth.prox(x - step * f.gradient(x), step);
    IterationRecord r = run.snapshot(t, x_new);
    if (!std::isfinite(r.composite_value)) {
      run.trace().warn("iterate left the domain at iteration " + std::to_string(t));
      run.trace().set_status(SolveStatus::domain_violation);
      break;
    }
    r.step_norm = cfg.norm(x_new - x);
    r.sigma = base.sigma;
    // gradient mapping norm: the first-order analogue of the decrement
    r.newton_decrement = (x_new - x).norm() / step;
    run.trace().append(r);
    x = x_new;
    if (run.stop_after(r)) {
      run.trace().set_status(SolveStatus::converged);
      break;
    }
  }
  return run.finish();
}

SolveTrace exact_line_search_newton(const Objective& f, const Vector& x0, const SolverConfig& cfg) {
  check_common(cfg, f.dim(), x0);
  const CompositeObjective F{borrow(f), ProxTerm::zero()};
  Run run("exact_line_search_newton", F, cfg);
  Vector x = x0;
  run.start(x);
  if (run.stop_after(run.trace().last())) {
    run.trace().set_status(SolveStatus::converged);
    return run.finish();
  }
  constexpr double alpha_max = 2.0;
  constexpr double tol = 1e-12;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int t = 1; t <= cfg.max_iter; ++t) {
    const SymMatrix H = f.hessian(x);
    Vector d;
    try {
      d = -psd_solve(H, f.gradient(x));
    } catch (const RangeError& e) {
      run.trace().warn(e.what());
      run.trace().set_status(SolveStatus::numerical_failure);
      break;
    }
    auto phi = [&](double a) {
      const double v = F.value(x + a * d);
      return std::isnan(v) ? kInf : v;
    };
    double a = 0.0;
    double b = alpha_max;
    double c = b - inv_phi * (b - a);
    double e = a + inv_phi * (b - a);
    double fc = phi(c);
    double fe = phi(e);
    while (b - a > tol) {
      // ties (including inf vs inf) move the bracket toward 0
      if (fc <= fe) {
        b = e;
        e = c;
        fe = fc;
        c = b - inv_phi * (b - a);
        fc = phi(c);
      } else {
        a = c;
        c = e;
        fc = fe;
        e = a + inv_phi * (b - a);
        fe = phi(e);
      }
    }
    double alpha = 0.5 * (a + b);
    if (phi(alpha) > phi(0.0)) alpha = 0.0;
    const Vector step = alpha * d;
    const Vector x_new = x + step;
    IterationRecord r = run.snapshot(t, x_new);
    r.step_norm = cfg.norm(step);
    r.sigma = alpha > 0.0 ? 1.0 / alpha : kInf;
    r.newton_decrement = h_norm(H, d);
    run.trace().append(r);
    x = x_new;
    if (alpha == 0.0 || run.stop_after(r)) {
      run.trace().set_status(SolveStatus::converged);
      break;
    }
  }
  return run.finish();
}

double optimal_radius(const std::vector<double>& d_values, const std::vector<double>& r_grid) {
  if (d_values.size() != r_grid.size() || r_grid.empty()) {
    throw std::invalid_argument("optimal_radius: d values and r grid must be non-empty and aligned");
  }
  double best_r = r_grid[0];
  double best = kInf;
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    if (!(r_grid[i] > 0.0)) throw std::invalid_argument("optimal_radius: grid must be positive");
    const double v = d_values[i] * d_values[i] / r_grid[i];
    if (v < best) {
      best = v;
      best_r = r_grid[i];
    }
  }
  return best_r;
}

}  // namespace snewton
