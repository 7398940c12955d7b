#include "snewton/oracle.hpp"

#include "snewton/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace snewton {

namespace {

// Model value written out from scratch, so grid results do not depend on
// QuadraticModel::evaluate.
double model_value(const QuadraticModel& m, const Vector& step) {
  double quad = 0.0;
  const Matrix& M = m.metric().matrix();
  for (Index i = 0; i < step.size(); ++i)
    for (Index j = 0; j < step.size(); ++j) quad += step[i] * M(i, j) * step[j];
  double val = m.grad().dot(step) + 0.5 * m.sigma() * quad;

  const ProxTerm& g = m.prox();
  const Vector y = m.anchor() + step;
  switch (g.kind()) {
    case ProxTerm::Kind::zero:
      break;
    case ProxTerm::Kind::l1:
      val += g.lambda() * (y.cwiseAbs().sum() - m.anchor().cwiseAbs().sum());
      break;
    case ProxTerm::Kind::box:
      for (Index i = 0; i < y.size(); ++i)
        if (y[i] < g.lo()[i] - 1e-12 || y[i] > g.hi()[i] + 1e-12) return kInf;
      break;
    case ProxTerm::Kind::ball: {
      const Vector d = y - g.center();
      const double r = g.ball_norm() == ProxTerm::BallNorm::l2 ? d.norm() : d.cwiseAbs().maxCoeff();
      if (r > g.radius() * (1 + 1e-12) + 1e-12) return kInf;
      break;
    }
  }
  return val;
}

}  // namespace

GridMinimum grid_minimize_quadratic(const QuadraticModel& model, const GridDomain& domain,
                                    double resolution) {
  const Index n = model.dim();
  if (n < 1 || n > 3) throw DimensionError("grid oracle supports dimension 1 to 3");
  if (domain.bounds.dim() != n) throw DimensionError("grid box dimension mismatch");
  if (!(resolution > 0)) throw std::invalid_argument("resolution must be positive");

  std::vector<long> counts(n);
  std::vector<double> spacing(n);
  long total = 1;
  for (Index i = 0; i < n; ++i) {
    const double w = domain.bounds.hi[i] - domain.bounds.lo[i];
    if (!(w >= 0) || !std::isfinite(w)) throw std::invalid_argument("grid box must be finite");
    const long segs = std::max(1L, static_cast<long>(std::ceil(w / resolution)));
    counts[i] = segs + 1;
    spacing[i] = w / static_cast<double>(segs);
    total *= counts[i];
  }
  if (total > 200000000L) throw std::invalid_argument("grid too fine");

  GridMinimum best;
  Vector p(n);
  std::vector<long> idx(n, 0);
  for (long t = 0; t < total; ++t) {
    long rem = t;
    for (Index i = 0; i < n; ++i) {
      idx[i] = rem % counts[i];
      rem /= counts[i];
      p[i] = idx[i] + 1 == counts[i] ? domain.bounds.hi[i]
                                     : domain.bounds.lo[i] + spacing[i] * static_cast<double>(idx[i]);
    }
    const bool ball = domain.norm && std::isfinite(domain.radius);
    const double np = ball ? (*domain.norm)(p) : 0.0;
    if (ball && np > 0.0) {
      // the grid alone misses an active sphere, so also try the radial image on it
      const Vector q = p * (domain.radius / np);
      bool inside = true;
      for (Index i = 0; i < n; ++i)
        inside = inside && q[i] >= domain.bounds.lo[i] && q[i] <= domain.bounds.hi[i];
      if (inside) {
        ++best.evaluated;
        const double v = model_value(model, q);
        if (v < best.value) {
          best.value = v;
          best.point = q;
        }
      }
    }
    if (ball && np > domain.radius) continue;
    ++best.evaluated;
    const double v = model_value(model, p);
    if (v < best.value) {
      best.value = v;
      best.point = p;
    }
  }
  if (best.evaluated == 0) throw std::invalid_argument("grid region contains no points");
  return best;
}

FiniteDiffErrors finite_diff_check(const Objective& f, const Vector& x, double h) {
  const Index n = f.dim();
  require_same_dim(x.size(), n, "finite_diff_check");
  if (!f.in_domain(x)) throw DomainError("finite_diff_check: x outside the domain");
  for (Index i = 0; i < n; ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    if (!f.in_domain(xp) || !f.in_domain(xm))
      throw DomainError("finite_diff_check: x +- h leaves the domain along coordinate " +
                        std::to_string(i));
  }
  const Vector g = f.gradient(x);
  const Matrix H = f.hessian(x).matrix();
  Vector gfd(n);
  Matrix Hfd(n, n);
  for (Index i = 0; i < n; ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    gfd[i] = (f.value(xp) - f.value(xm)) / (2 * h);
    Hfd.col(i) = (f.gradient(xp) - f.gradient(xm)) / (2 * h);
  }
  Hfd = 0.5 * (Hfd + Hfd.transpose()).eval();
  FiniteDiffErrors e;
  e.grad_err = (gfd - g).norm() / std::max(1.0, g.norm());
  e.hess_err = (Hfd - H).norm() / std::max(1.0, H.norm());
  return e;
}

RateFit fit_rate(const SolveTrace& trace, double f_star, double tail_fraction,
                 std::optional<double> noise_floor) {
  if (!(tail_fraction > 0 && tail_fraction <= 1))
    throw std::invalid_argument("tail_fraction must lie in (0, 1]");
  const double floor =
      noise_floor.value_or(1e2 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(f_star)));
  std::vector<double> gaps;
  for (const auto& r : trace.records()) {
    if (!r.accepted) continue;
    const double gap = r.composite_value - f_star;
    if (!(gap > floor)) break;
    gaps.push_back(gap);
  }
  if (gaps.size() < 5)
    throw std::invalid_argument("fit_rate needs at least 5 accepted points above the noise floor, got " +
                                std::to_string(gaps.size()));

  RateFit fit;
  fit.points_used = static_cast<int>(gaps.size());
  for (std::size_t t = 1; t < gaps.size(); ++t) fit.per_step_factors.push_back(gaps[t] / gaps[t - 1]);
  const std::size_t m = fit.per_step_factors.size();
  const std::size_t tail = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(tail_fraction * m)));
  fit.geometric_factor =
      *std::max_element(fit.per_step_factors.end() - static_cast<std::ptrdiff_t>(tail), fit.per_step_factors.end());

  // least squares of log gap against the step index
  const double N = static_cast<double>(gaps.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t t = 0; t < gaps.size(); ++t) {
    const double xt = static_cast<double>(t), yt = std::log(gaps[t]);
    sx += xt;
    sy += yt;
    sxx += xt * xt;
    sxy += xt * yt;
    syy += yt * yt;
  }
  const double vx = sxx - sx * sx / N, vy = syy - sy * sy / N, cxy = sxy - sx * sy / N;
  fit.r_squared = vy <= 0 ? 1.0 : (cxy * cxy) / (vx * vy);
  return fit;
}

double scalar_stability_exact(const ScalarLink& link, double a, double b) {
  if (!(a <= b) || !std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("need finite a <= b");
  if (!link.in_domain(a) || !link.in_domain(b)) throw DomainError("interval leaves the link's domain");
  double hi = 0, lo = 0;
  switch (link.kind()) {
    case ScalarLink::Kind::entropy:
    case ScalarLink::Kind::robust_q:
    case ScalarLink::Kind::neg_exp_linear:
      // phi'' nonincreasing
      hi = link.d2(a);
      lo = link.d2(b);
      break;
    case ScalarLink::Kind::exp_shift:
      hi = link.d2(b);
      lo = link.d2(a);
      break;
    case ScalarLink::Kind::logistic:
      // even in u, decreasing in |u|
      hi = link.d2(std::clamp(0.0, a, b));
      lo = std::min(link.d2(a), link.d2(b));
      break;
    case ScalarLink::Kind::power_even: {
      // increasing in |u|
      const double near = (a <= 0 && b >= 0) ? 0.0 : std::min(std::abs(a), std::abs(b));
      const double far = std::max(std::abs(a), std::abs(b));
      hi = link.d2(far);
      lo = link.d2(near);
      break;
    }
  }
  if (!(lo > 0)) throw DomainError("phi'' vanishes on the interval; the ratio is unbounded");
  return hi / lo;
}

}  // namespace snewton
