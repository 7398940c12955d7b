#include "snewton/core.hpp"

#include "snewton/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace snewton {

namespace {

// Membership slack for indicator sets; iterates built as x + step land on
// bounds only up to rounding.
double indicator_slack(double bound) { return 1e-12 * (1.0 + std::abs(bound)); }

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

}  // namespace

void require_finite(const Vector& v, std::string_view what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite entry");
  }
}

void require_same_dim(Index a, Index b, std::string_view what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

// ---------------------------------------------------------------------------
// SymMatrix

SymMatrix::SymMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw DimensionError("SymMatrix: matrix is not square");
  m_.triangularView<Eigen::StrictlyLower>() = m_.transpose().triangularView<Eigen::StrictlyLower>();
}

SymMatrix SymMatrix::identity(Index n) { return SymMatrix(Matrix::Identity(n, n)); }

SymMatrix SymMatrix::diagonal(const Vector& d) { return SymMatrix(Matrix(d.asDiagonal())); }

SymMatrix SymMatrix::zero(Index n) { return SymMatrix(Matrix::Zero(n, n)); }

Vector SymMatrix::operator*(const Vector& v) const {
  require_same_dim(dim(), v.size(), "SymMatrix * Vector");
  return m_ * v;
}

SymMatrix SymMatrix::scaled(double s) const { return SymMatrix(Matrix(s * m_)); }

double weighted_norm_sq(const Vector& v, const SymMatrix& M) {
  require_same_dim(v.size(), M.dim(), "weighted_norm_sq");
  return v.dot(M.matrix() * v);
}

// ---------------------------------------------------------------------------
// NormSpec

NormSpec NormSpec::metric(SymMatrix m) {
  NormSpec n(Kind::metric);
  n.metric_ = std::move(m);
  return n;
}

double NormSpec::operator()(const Vector& v) const {
  switch (kind_) {
    case Kind::l2:
      return v.norm();
    case Kind::linf:
      return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
    case Kind::metric:
      return std::sqrt(std::max(0.0, weighted_norm_sq(v, metric_)));
  }
  return kNaN;
}

std::string NormSpec::name() const {
  switch (kind_) {
    case Kind::l2:
      return "l2";
    case Kind::linf:
      return "linf";
    case Kind::metric:
      return "metric";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Box

bool Box::contains(const Vector& x, double tol) const {
  require_same_dim(x.size(), lo.size(), "Box::contains");
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
  }
  return true;
}

Vector Box::clamp(const Vector& x) const { return x.cwiseMax(lo).cwiseMin(hi); }

double Box::diameter(const NormSpec& norm) const {
  const Vector w = hi - lo;
  if (norm.kind() != NormSpec::Kind::metric) return norm(w);
  const Index n = w.size();
  if (n <= 16) {
    // max of a convex quadratic over the difference box is attained at a vertex
    double best = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      Vector s = w;
      for (Index i = 0; i < n; ++i) {
        if (mask & (1u << i)) s[i] = -s[i];
      }
      best = std::max(best, norm(s));
    }
    return best;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(norm.metric_matrix().matrix(), Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff())) * w.norm();
}

// ---------------------------------------------------------------------------
// ProxTerm

ProxTerm ProxTerm::l1(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("ProxTerm::l1: lambda must be finite and >= 0");
  }
  ProxTerm p(Kind::l1);
  p.lambda_ = lambda;
  return p;
}

ProxTerm ProxTerm::box(Vector lo, Vector hi) {
  require_same_dim(lo.size(), hi.size(), "ProxTerm::box");
  for (Index i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i])) throw std::invalid_argument("ProxTerm::box: lo > hi");
  }
  ProxTerm p(Kind::box);
  p.lo_ = std::move(lo);
  p.hi_ = std::move(hi);
  return p;
}

ProxTerm ProxTerm::ball(Vector center, double radius, BallNorm norm) {
  require_finite(center, "ProxTerm::ball center");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("ProxTerm::ball: radius must be finite and > 0");
  }
  ProxTerm p(Kind::ball);
  p.center_ = std::move(center);
  p.radius_ = radius;
  p.ball_norm_ = norm;
  return p;
}

bool ProxTerm::separable() const {
  return kind_ != Kind::ball || ball_norm_ == BallNorm::linf;
}

std::optional<Box> ProxTerm::bounding_box() const {
  if (kind_ == Kind::box) return Box{lo_, hi_};
  if (kind_ == Kind::ball) {
    const Vector r = Vector::Constant(center_.size(), radius_);
    return Box{center_ - r, center_ + r};
  }
  return std::nullopt;
}

void ProxTerm::check_dim(const Vector& x) const {
  if (kind_ == Kind::box) require_same_dim(x.size(), lo_.size(), "ProxTerm");
  if (kind_ == Kind::ball) require_same_dim(x.size(), center_.size(), "ProxTerm");
}

bool ProxTerm::contains(const Vector& x, double tol) const {
  check_dim(x);
  switch (kind_) {
    case Kind::zero:
    case Kind::l1:
      return true;
    case Kind::box:
      for (Index i = 0; i < x.size(); ++i) {
        if (x[i] < lo_[i] - indicator_slack(lo_[i]) - tol ||
            x[i] > hi_[i] + indicator_slack(hi_[i]) + tol) {
          return false;
        }
      }
      return true;
    case Kind::ball: {
      const Vector d = x - center_;
      const double dist = ball_norm_ == BallNorm::l2 ? d.norm() : d.lpNorm<Eigen::Infinity>();
      return dist <= radius_ + indicator_slack(radius_) + tol;
    }
  }
  return false;
}

double ProxTerm::value(const Vector& x) const {
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::l1:
      return lambda_ * x.lpNorm<1>();
    case Kind::box:
    case Kind::ball:
      return contains(x) ? 0.0 : kInf;
  }
  return kNaN;
}

Vector ProxTerm::prox(const Vector& z, double t) const {
  check_dim(z);
  switch (kind_) {
    case Kind::zero:
      return z;
    case Kind::l1: {
      Vector out(z.size());
      for (Index i = 0; i < z.size(); ++i) out[i] = soft_threshold(z[i], t * lambda_);
      return out;
    }
    case Kind::box:
      return z.cwiseMax(lo_).cwiseMin(hi_);
    case Kind::ball: {
      const Vector d = z - center_;
      if (ball_norm_ == BallNorm::linf) {
        return center_ + d.cwiseMax(-radius_).cwiseMin(radius_);
      }
      const double nd = d.norm();
      return nd <= radius_ ? z : Vector(center_ + d * (radius_ / nd));
    }
  }
  return z;
}

std::string ProxTerm::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::zero:
      os << "zero";
      break;
    case Kind::l1:
      os << "l1(" << lambda_ << ")";
      break;
    case Kind::box:
      os << "box";
      break;
    case Kind::ball:
      os << "ball(" << (ball_norm_ == BallNorm::l2 ? "l2" : "linf") << ", " << radius_ << ")";
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Objective / CompositeObjective

Vector Objective::hvp(const Vector& x, const Vector& v) const { return hessian(x) * v; }

double CompositeObjective::value(const Vector& x) const {
  const double g = nonsmooth.value(x);
  if (!std::isfinite(g)) return kInf;
  if (!smooth->in_domain(x)) return kInf;
  return smooth->value(x) + g;
}

std::optional<double> CompositeObjective::f_star() const {
  if (nonsmooth.kind() == ProxTerm::Kind::zero) return smooth->info().f_star;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// QuadraticModel

QuadraticModel::QuadraticModel(Vector anchor, Vector grad, SymMatrix metric, double sigma,
                               ProxTerm prox)
    : anchor_(std::move(anchor)),
      grad_(std::move(grad)),
      metric_(std::move(metric)),
      sigma_(sigma),
      prox_(std::move(prox)) {
  require_same_dim(anchor_.size(), grad_.size(), "QuadraticModel");
  require_same_dim(anchor_.size(), metric_.dim(), "QuadraticModel");
  require_finite(anchor_, "QuadraticModel anchor");
  require_finite(grad_, "QuadraticModel grad");
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) {
    throw std::invalid_argument("QuadraticModel: sigma must be finite and > 0");
  }
  prox_at_anchor_ = prox_.value(anchor_);
  if (!std::isfinite(prox_at_anchor_)) {
    throw std::invalid_argument("QuadraticModel: anchor outside the domain of the prox term");
  }
}

double QuadraticModel::smooth_part(const Vector& step) const {
  require_same_dim(step.size(), dim(), "QuadraticModel::smooth_part");
  return grad_.dot(step) + 0.5 * sigma_ * step.dot(metric_.matrix() * step);
}

double QuadraticModel::evaluate(const Vector& step) const {
  const double smooth = smooth_part(step);
  if (prox_.kind() == ProxTerm::Kind::zero) return smooth;
  const double g = prox_.value(anchor_ + step);
  if (!std::isfinite(g)) return kInf;
  return smooth + (g - prox_at_anchor_);
}

QuadraticModel QuadraticModel::with_sigma(double sigma) const {
  return QuadraticModel(anchor_, grad_, metric_, sigma, prox_);
}

// ---------------------------------------------------------------------------
// SolveTrace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::running:
      return "running";
    case SolveStatus::converged:
      return "converged";
    case SolveStatus::max_iter:
      return "max_iter";
    case SolveStatus::domain_violation:
      return "domain_violation";
    case SolveStatus::numerical_failure:
      return "numerical_failure";
  }
  return "?";
}

void SolveTrace::append(IterationRecord rec) {
  if (!records_.empty() && rec.iter <= records_.back().iter) {
    throw std::logic_error("SolveTrace: iteration numbers must be strictly increasing");
  }
  records_.push_back(std::move(rec));
}

std::vector<Vector> SolveTrace::accepted_iterates() const {
  std::vector<Vector> out;
  for (const auto& r : records_) {
    if (r.accepted) out.push_back(r.x);
  }
  return out;
}

}  // namespace snewton
