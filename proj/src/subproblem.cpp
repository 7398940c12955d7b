#include "snewton/errors.hpp"
#include "snewton/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace snewton {

namespace {

// min <b, d> + 1/2 d^T A d + lambda * sum_i |d_i - kink_i|  s.t.  lo <= d <= hi
// (kink = -anchor, so the l1 term is lambda |anchor + d|_1 up to a constant).
struct SeparableQP {
  Matrix A;
  Vector b;
  Vector lo;
  Vector hi;
  Vector kink;
  double lambda = 0.0;

  Index dim() const { return b.size(); }

  double value(const Vector& d) const {
    double v = b.dot(d) + 0.5 * d.dot(A * d);
    if (lambda > 0.0) v += lambda * ((d - kink).lpNorm<1>() - kink.lpNorm<1>());
    return v;
  }

  bool has_box() const {
    for (Index i = 0; i < dim(); ++i) {
      if (std::isfinite(lo[i]) || std::isfinite(hi[i])) return true;
    }
    return false;
  }
};

// {d : (d - center)^T M (d - center) <= R^2}; M = I when identity is set.
struct Ellipse {
  Matrix M;
  Vector center;
  double R = 0.0;
  bool identity = true;

  double excess(const Vector& d) const {
    const Vector e = d - center;
    const double q = identity ? e.squaredNorm() : e.dot(M * e);
    return q - R * R;
  }
};

double clampd(double t, double lo, double hi) { return std::min(std::max(t, lo), hi); }

// argmin over [lo, hi] of 1/2 a t^2 + c t + lambda |t - k|.
double argmin_1d(double a, double c, double lambda, double k, double lo, double hi,
                 double current) {
  if (a > 0.0) {
    double t;
    if (lambda > 0.0) {
      const double tp = (-c - lambda) / a;
      const double tm = (-c + lambda) / a;
      t = tp > k ? tp : (tm < k ? tm : k);
    } else {
      t = -c / a;
    }
    return clampd(t, lo, hi);
  }
  // piecewise linear in t
  if ((c + lambda < 0.0 && !std::isfinite(hi)) || (c - lambda > 0.0 && !std::isfinite(lo))) {
    throw RangeError("subproblem: model is unbounded below");
  }
  std::vector<double> cand;
  if (std::isfinite(lo)) cand.push_back(lo);
  if (std::isfinite(hi)) cand.push_back(hi);
  if (lambda > 0.0 && k >= lo && k <= hi) cand.push_back(k);
  if (cand.empty()) return clampd(current, lo, hi);
  double best = cand[0];
  double best_v = kInf;
  for (double t : cand) {
    const double v = c * t + lambda * std::abs(t - k);
    if (v < best_v) {
      best_v = v;
      best = t;
    }
  }
  return best;
}

// Per-coordinate distance of -grad_i from the subdifferential of the
// separable term at d_i, scaled by the coordinate's magnitude.
double kkt_violation(const SeparableQP& qp, const Vector& d, const Vector& grad) {
  double worst = 0.0;
  const Vector Ad_abs = qp.A.cwiseAbs() * d.cwiseAbs();
  for (Index i = 0; i < qp.dim(); ++i) {
    const double tb_lo = 1e-12 * (1.0 + std::abs(qp.lo[i]));
    const double tb_hi = 1e-12 * (1.0 + std::abs(qp.hi[i]));
    const double tk = 1e-12 * (1.0 + std::abs(qp.kink[i]));
    double sl = 0.0;
    double su = 0.0;
    if (qp.lambda > 0.0) {
      const double off = d[i] - qp.kink[i];
      if (std::abs(off) <= tk) {
        sl = -qp.lambda;
        su = qp.lambda;
      } else {
        sl = su = off > 0.0 ? qp.lambda : -qp.lambda;
      }
    }
    if (std::isfinite(qp.lo[i]) && d[i] <= qp.lo[i] + tb_lo) sl = -kInf;
    if (std::isfinite(qp.hi[i]) && d[i] >= qp.hi[i] - tb_hi) su = kInf;
    const double target = -grad[i];
    double viol = 0.0;
    if (target < sl) viol = sl - target;
    if (target > su) viol = target - su;
    const double scale = std::abs(qp.b[i]) + qp.lambda + Ad_abs[i] + 1e-300;
    worst = std::max(worst, viol / scale);
  }
  return worst;
}

constexpr double kKktTol = 1e-10;

// Guess the active pattern from d, solve the free block exactly, accept when
// the result satisfies the optimality conditions.
bool polish(const SeparableQP& qp, Vector& d) {
  const Index n = qp.dim();
  std::vector<Index> free_idx;
  Vector cand = d;
  Vector sign = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    const double tb_lo = 1e-10 * (1.0 + std::abs(qp.lo[i]));
    const double tb_hi = 1e-10 * (1.0 + std::abs(qp.hi[i]));
    const double tk = 1e-10 * (1.0 + std::abs(qp.kink[i]));
    if (std::isfinite(qp.lo[i]) && d[i] <= qp.lo[i] + tb_lo) {
      cand[i] = qp.lo[i];
    } else if (std::isfinite(qp.hi[i]) && d[i] >= qp.hi[i] - tb_hi) {
      cand[i] = qp.hi[i];
    } else if (qp.lambda > 0.0 && std::abs(d[i] - qp.kink[i]) <= tk) {
      cand[i] = qp.kink[i];
    } else {
      free_idx.push_back(i);
      if (qp.lambda > 0.0) sign[i] = d[i] > qp.kink[i] ? 1.0 : -1.0;
    }
  }
  const Index m = static_cast<Index>(free_idx.size());
  if (m > 0) {
    Matrix Aww(m, m);
    Vector rhs(m);
    for (Index a = 0; a < m; ++a) {
      const Index i = free_idx[a];
      double r = -qp.b[i] - qp.lambda * sign[i];
      for (Index j = 0; j < n; ++j) {
        if (std::find(free_idx.begin(), free_idx.end(), j) == free_idx.end()) {
          r -= qp.A(i, j) * cand[j];
        }
      }
      rhs[a] = r;
      for (Index c = 0; c < m; ++c) Aww(a, c) = qp.A(i, free_idx[c]);
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(Aww);
    const Vector w = cod.solve(rhs);
    if (!w.allFinite()) return false;
    if ((Aww * w - rhs).norm() > 1e-9 * (1.0 + rhs.norm())) return false;
    for (Index a = 0; a < m; ++a) {
      const Index i = free_idx[a];
      double v = w[a];
      if (v < qp.lo[i] - 1e-10 * (1.0 + std::abs(qp.lo[i])) ||
          v > qp.hi[i] + 1e-10 * (1.0 + std::abs(qp.hi[i]))) {
        return false;
      }
      v = clampd(v, qp.lo[i], qp.hi[i]);
      if (qp.lambda > 0.0 && sign[i] * (v - qp.kink[i]) < -1e-10 * (1.0 + std::abs(qp.kink[i]))) {
        return false;
      }
      cand[i] = v;
    }
  }
  const Vector grad = qp.b + qp.A * cand;
  if (kkt_violation(qp, cand, grad) > kKktTol) return false;
  const double vc = qp.value(cand);
  const double vd = qp.value(d);
  if (vc > vd + 1e-12 * (1.0 + std::abs(vd))) return false;
  d = cand;
  return true;
}

struct SepResult {
  Vector d;
  int sweeps = 0;
  bool certified = false;
};

// Coordinate descent with exact 1-D minimization, finished by an active-set
// polish step.
SepResult solve_separable(const SeparableQP& qp, const Vector& warm, int max_sweeps) {
  const Index n = qp.dim();
  SepResult out;
  out.d = warm.size() == n ? warm : Vector::Zero(n);
  for (Index i = 0; i < n; ++i) out.d[i] = clampd(out.d[i], qp.lo[i], qp.hi[i]);
  Vector grad = qp.b + qp.A * out.d;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double moved = 0.0;
    double size = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double a = qp.A(i, i);
      const double c = grad[i] - a * out.d[i];
      const double t = argmin_1d(a, c, qp.lambda, qp.kink[i], qp.lo[i], qp.hi[i], out.d[i]);
      const double delta = t - out.d[i];
      if (delta != 0.0) {
        grad += qp.A.col(i) * delta;
        out.d[i] = t;
        moved = std::max(moved, std::abs(delta));
      }
      size = std::max(size, std::abs(t));
    }
    out.sweeps = sweep;
    const bool stalled = moved <= 1e-15 * (1.0 + size);
    if (stalled || sweep <= 3 || sweep % 5 == 0) {
      Vector cand = out.d;
      if (polish(qp, cand)) {
        out.d = cand;
        out.certified = true;
        return out;
      }
      grad = qp.b + qp.A * out.d;
      if (stalled) {
        out.certified = kkt_violation(qp, out.d, grad) <= kKktTol;
        return out;
      }
    }
  }
  out.certified = kkt_violation(qp, out.d, grad) <= kKktTol;
  return out;
}

struct ReferenceResult {
  Vector step;
  InnerMethod method;
  int iters = 0;
  double multiplier = 0.0;
};

// l2 trust region without prox: root of 1/|d(mu)| - 1/r on the eigenbasis.
ReferenceResult secular(const Matrix& A, const Vector& b, double r) {
  const Index n = b.size();
  Eigen::SelfAdjointEigenSolver<Matrix> es(A);
  const Vector lam = es.eigenvalues().cwiseMax(0.0);
  const Matrix& V = es.eigenvectors();
  Vector beta = V.transpose() * b;
  const double lmax = lam.size() ? lam.maxCoeff() : 0.0;
  const double bn = b.norm();
  for (Index i = 0; i < n; ++i) {
    if (lam[i] <= 1e-13 * lmax && std::abs(beta[i]) <= 1e-13 * bn) beta[i] = 0.0;
  }
  auto step_at = [&](double mu) {
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
      const double den = lam[i] + mu;
      y[i] = beta[i] == 0.0 ? 0.0 : -beta[i] / den;
    }
    return Vector(V * y);
  };
  auto norm_at = [&](double mu) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (beta[i] == 0.0) continue;
      const double den = lam[i] + mu;
      if (den <= 0.0) return kInf;
      s += (beta[i] / den) * (beta[i] / den);
    }
    return std::sqrt(s);
  };
  ReferenceResult out{Vector::Zero(n), InnerMethod::secular_equation, 0, 0.0};
  if (bn == 0.0) return out;
  if (norm_at(0.0) <= r) {
    out.step = step_at(0.0);
    return out;
  }
  double lo = 0.0;
  double hi = bn / r;
  while (norm_at(hi) > r) hi *= 2.0;
  double mu = hi;
  for (int it = 0; it < 300; ++it) {
    out.iters = it + 1;
    const double phi = norm_at(mu);
    if (std::abs(phi - r) <= 1e-14 * r) break;
    if (phi > r) {
      lo = mu;
    } else {
      hi = mu;
    }
    if (hi - lo <= 1e-16 * hi) break;
    // Newton on psi(mu) = 1/phi - 1/r
    double dphi = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (beta[i] == 0.0) continue;
      const double den = lam[i] + mu;
      dphi -= beta[i] * beta[i] / (den * den * den);
    }
    dphi /= phi;
    const double psi = 1.0 / phi - 1.0 / r;
    const double dpsi = -dphi / (phi * phi);
    double next = dpsi > 0.0 ? mu - psi / dpsi : kNaN;
    if (!(next > lo && next < hi)) next = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
    if (lo == 0.0 && !(next > 0.0)) next = 0.5 * hi;
    if (std::abs(next - mu) <= 1e-15 * mu) break;
    mu = next;
  }
  // a root approached from inside overshoots |d| = r only by roundoff; the
  // rescale below absorbs it
  out.step = step_at(mu);
  const double sn = out.step.norm();
  if (sn > r) out.step *= r / sn;
  out.multiplier = mu;
  return out;
}

// One ellipsoidal constraint handled by a scalar multiplier search over the
// separable inner problem; the excess is non-increasing in the multiplier.
ReferenceResult multiplier_search(const SeparableQP& qp, const Ellipse& E, int max_sweeps) {
  const Index n = qp.dim();
  int total = 0;
  auto inner = [&](double mu, const Vector& warm) {
    SeparableQP q = qp;
    if (mu > 0.0) {
      if (E.identity) {
        q.A.diagonal().array() += mu;
        q.b -= mu * E.center;
      } else {
        q.A += mu * E.M;
        q.b -= mu * (E.M * E.center);
      }
    }
    SepResult r = solve_separable(q, warm, max_sweeps);
    total += r.sweeps;
    return r.d;
  };
  ReferenceResult out{Vector::Zero(n), InnerMethod::multiplier_search, 0, 0.0};
  Vector warm = Vector::Zero(n);
  const double tol = 1e-12 * E.R * E.R;
  try {
    Vector d0 = inner(0.0, warm);
    if (E.excess(d0) <= tol) {
      out.step = d0;
      out.iters = total;
      return out;
    }
    warm = d0;
  } catch (const RangeError&) {
    // unbounded without the constraint; a positive multiplier is required
  }
  const double scale =
      std::max({qp.A.diagonal().cwiseAbs().maxCoeff(), qp.b.norm() / std::max(E.R, 1e-300), 1e-12});
  double lo = 0.0;
  double hi = scale;
  Vector d_hi;
  for (int k = 0; k < 2000; ++k) {
    try {
      d_hi = inner(hi, warm);
      if (E.excess(d_hi) <= 0.0) break;
      warm = d_hi;
    } catch (const RangeError&) {
    }
    lo = hi;
    hi *= 4.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
    if (mid <= lo || mid >= hi) break;
    Vector d;
    try {
      d = inner(mid, d_hi);
    } catch (const RangeError&) {
      lo = mid;
      continue;
    }
    if (E.excess(d) <= 0.0) {
      hi = mid;
      d_hi = d;
    } else {
      lo = mid;
    }
  }
  out.step = d_hi;
  out.iters = total;
  out.multiplier = hi;
  return out;
}

// The reduced problem: separable pieces plus at most one ellipsoid.
struct Reduction {
  SeparableQP qp;
  std::optional<Ellipse> ellipse;
  bool ellipse_is_radius = false;
  bool metric_radius = false;
};

Reduction reduce(const QuadraticModel& model, const NormSpec& norm, double radius) {
  const Index n = model.dim();
  Reduction red;
  red.qp.A = model.sigma() * model.metric().matrix();
  red.qp.b = model.grad();
  red.qp.lo = Vector::Constant(n, -kInf);
  red.qp.hi = Vector::Constant(n, kInf);
  red.qp.kink = -model.anchor();
  const Vector& x = model.anchor();
  const ProxTerm& p = model.prox();
  switch (p.kind()) {
    case ProxTerm::Kind::zero:
      break;
    case ProxTerm::Kind::l1:
      red.qp.lambda = p.lambda();
      break;
    case ProxTerm::Kind::box:
      red.qp.lo = p.lo() - x;
      red.qp.hi = p.hi() - x;
      break;
    case ProxTerm::Kind::ball:
      if (p.ball_norm() == ProxTerm::BallNorm::linf) {
        red.qp.lo = (p.center() - x).array() - p.radius();
        red.qp.hi = (p.center() - x).array() + p.radius();
      } else {
        red.ellipse = Ellipse{Matrix(), p.center() - x, p.radius(), true};
      }
      break;
  }
  // anchors sit inside the indicator set only up to rounding
  red.qp.lo = red.qp.lo.cwiseMin(0.0);
  red.qp.hi = red.qp.hi.cwiseMax(0.0);
  if (std::isfinite(radius)) {
    if (!(radius > 0.0)) throw std::invalid_argument("subproblem: radius must be > 0");
    if (norm.kind() == NormSpec::Kind::linf) {
      red.qp.lo = red.qp.lo.cwiseMax(-radius);
      red.qp.hi = red.qp.hi.cwiseMin(radius);
    } else {
      if (red.ellipse) {
        throw std::invalid_argument(
            "subproblem: an l2-ball prox term combined with an l2 or metric radius is not supported");
      }
      const bool ident = norm.kind() == NormSpec::Kind::l2;
      red.ellipse = Ellipse{ident ? Matrix() : norm.metric_matrix().matrix(), Vector::Zero(n),
                            radius, ident};
      red.ellipse_is_radius = true;
      red.metric_radius = !ident;
    }
  }
  return red;
}

ReferenceResult reference_impl(const QuadraticModel& model, const NormSpec& norm, double radius,
                               int max_sweeps) {
  const Index n = model.dim();
  Reduction red = reduce(model, norm, radius);
  const bool plain = red.qp.lambda == 0.0 && !red.qp.has_box();
  if (!red.ellipse) {
    if (plain) {
      SymMatrix A(red.qp.A);
      return ReferenceResult{-psd_solve(A, red.qp.b), InnerMethod::newton_system, 1, 0.0};
    }
    SepResult r = solve_separable(red.qp, Vector::Zero(n), max_sweeps);
    return ReferenceResult{r.d, InnerMethod::coordinate_active_set, r.sweeps, 0.0};
  }
  if (plain && red.ellipse_is_radius) {
    if (!red.metric_radius) return secular(red.qp.A, red.qp.b, red.ellipse->R);
    Eigen::LLT<Matrix> llt(red.ellipse->M);
    if (llt.info() == Eigen::Success) {
      // |d|_M = |L^T d|: solve in y = L^T d
      const Matrix L = llt.matrixL();
      const Matrix Linv = L.triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n));
      Matrix At = Linv * red.qp.A * Linv.transpose();
      At = 0.5 * (At + At.transpose()).eval();
      ReferenceResult r = secular(At, Linv * red.qp.b, red.ellipse->R);
      r.step = Linv.transpose() * r.step;
      return r;
    }
  }
  return multiplier_search(red.qp, *red.ellipse, max_sweeps);
}

// Euclidean prox of t * (separable pieces) intersected with an optional ball.
class ConstraintProx {
 public:
  explicit ConstraintProx(const Reduction& red) : red_(red) {}

  Vector operator()(const Vector& z, double t) const {
    if (!red_.ellipse) return separable(z, t, 0.0, Vector());
    const Ellipse& E = *red_.ellipse;
    Vector d = separable(z, t, 0.0, E.center);
    if (E.excess(d) <= 0.0) return d;
    double lo = 0.0;
    double hi = 1.0;
    Vector dh = separable(z, t, hi, E.center);
    while (E.excess(dh) > 0.0 && std::isfinite(hi)) {
      lo = hi;
      hi *= 4.0;
      dh = separable(z, t, hi, E.center);
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      const Vector dm = separable(z, t, mid, E.center);
      if (E.excess(dm) <= 0.0) {
        hi = mid;
        dh = dm;
      } else {
        lo = mid;
      }
    }
    return dh;
  }

 private:
  // argmin 1/2|d - z|^2 + mu/2 |d - e|^2 + t lambda |d - kink|_1 over the box
  Vector separable(const Vector& z, double t, double mu, const Vector& e) const {
    const SeparableQP& qp = red_.qp;
    Vector d(z.size());
    for (Index i = 0; i < z.size(); ++i) {
      const double ctr = mu > 0.0 ? (z[i] + mu * e[i]) / (1.0 + mu) : z[i];
      const double thr = t * qp.lambda / (1.0 + mu);
      double v = ctr;
      if (thr > 0.0) {
        const double off = ctr - qp.kink[i];
        v = qp.kink[i] + (off > thr ? off - thr : (off < -thr ? off + thr : 0.0));
      }
      d[i] = clampd(v, qp.lo[i], qp.hi[i]);
    }
    return d;
  }

  const Reduction& red_;
};

double theta_of(double q, double q_star) {
  if (!(q_star < 0.0)) return 1.0;
  return std::min(1.0, q / q_star);
}

}  // namespace

std::string to_string(InnerMethod m) {
  switch (m) {
    case InnerMethod::newton_system:
      return "newton_system";
    case InnerMethod::secular_equation:
      return "secular_equation";
    case InnerMethod::coordinate_active_set:
      return "coordinate_active_set";
    case InnerMethod::multiplier_search:
      return "multiplier_search";
    case InnerMethod::proximal_gradient:
      return "proximal_gradient";
    case InnerMethod::scaled_reference:
      return "scaled_reference";
  }
  return "?";
}

SubproblemSolution reference_solve(const QuadraticModel& model, const NormSpec& norm,
                                   double radius) {
  ReferenceResult r = reference_impl(model, norm, radius, 100000);
  SubproblemSolution out;
  out.step = std::move(r.step);
  out.model_value = model.evaluate(out.step);
  out.certificate.theta_achieved = 1.0;
  out.certificate.method = r.method;
  out.certificate.inner_iters = r.iters;
  out.certificate.reference_value = out.model_value;
  out.certificate.multiplier = r.multiplier;
  return out;
}

SubproblemSolution solve_tr_subproblem(const QuadraticModel& model, const NormSpec& norm,
                                       double radius, const InnerConfig& cfg) {
  if (!(cfg.theta > 0.0 && cfg.theta <= 1.0)) {
    throw std::invalid_argument("subproblem: theta must lie in (0, 1]");
  }
  SubproblemSolution ref = reference_solve(model, norm, radius);
  const double q_star = ref.model_value;
  const double scale = model.grad().norm() + 1e-300;
  if (cfg.theta >= 1.0 || !(q_star < -1e-14 * scale * (1.0 + ref.step.norm()))) return ref;

  const Reduction red = reduce(model, norm, radius);
  SubproblemSolution out;
  out.certificate.reference_value = q_star;
  if (red.ellipse && !red.ellipse->identity) {
    // Q(theta d*) <= theta Q(d*) by convexity and Q(0) = 0.
    out.step = cfg.theta * ref.step;
    out.model_value = model.evaluate(out.step);
    out.certificate.method = InnerMethod::scaled_reference;
    out.certificate.theta_achieved = theta_of(out.model_value, q_star);
    out.certificate.inner_iters = 1;
    return out;
  }

  // Accelerated proximal gradient from 0 with adaptive restart, stopped as
  // soon as the certificate reaches theta.
  const SeparableQP& qp = red.qp;
  Eigen::SelfAdjointEigenSolver<Matrix> es(qp.A, Eigen::EigenvaluesOnly);
  // zero curvature still needs a finite step length, or y - g/L overflows
  const double L = std::max(es.eigenvalues().maxCoeff(), 1e-12 * std::max(1.0, qp.b.norm()));
  const ConstraintProx prox(red);
  const Index n = model.dim();
  Vector d = Vector::Zero(n);
  Vector y = d;
  double tk = 1.0;
  double q_prev = 0.0;
  Vector best = d;
  double best_q = 0.0;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const Vector g = qp.b + qp.A * y;
    const Vector dn = prox(y - g / L, 1.0 / L);
    const double q = qp.value(dn);
    if (q < best_q) {
      best_q = q;
      best = dn;
    }
    if (theta_of(best_q, q_star) >= cfg.theta) {
      out.step = best;
      out.model_value = model.evaluate(best);
      out.certificate.method = InnerMethod::proximal_gradient;
      out.certificate.theta_achieved = theta_of(out.model_value, q_star);
      out.certificate.inner_iters = k;
      return out;
    }
    const double tk1 = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    if (q > q_prev) {
      tk = 1.0;
      y = dn;
    } else {
      y = dn + ((tk - 1.0) / tk1) * (dn - d);
      tk = tk1;
    }
    d = dn;
    q_prev = q;
  }
  throw InnerSolverError("subproblem: requested theta not reached within the inner budget", best,
                         theta_of(best_q, q_star));
}

SubproblemSolution solve_prox_subproblem(const QuadraticModel& model, const NormSpec& norm,
                                         double radius, double theta) {
  InnerConfig cfg;
  cfg.theta = theta;
  return solve_tr_subproblem(model, norm, radius, cfg);
}

ScalingCheck check_sigma_scaling_inequality(const QuadraticModel& model, const NormSpec& norm,
                                            double radius, double alpha, double beta) {
  if (!(alpha > 0.0 && beta > 0.0) || alpha * beta < 1.0 - 1e-15) {
    throw std::invalid_argument("check_sigma_scaling_inequality: need alpha, beta > 0, alpha*beta >= 1");
  }
  ScalingCheck out;
  out.lhs = reference_solve(model.with_sigma(alpha), norm, radius).model_value;
  out.rhs = reference_solve(model.with_sigma(1.0 / beta), norm, radius).model_value / (alpha * beta);
  out.holds = out.lhs <= out.rhs + 1e-8 * (1.0 + std::abs(out.rhs));
  return out;
}

}  // namespace snewton
