#include "snewton/objectives.hpp"

#include "snewton/errors.hpp"
#include "snewton/linalg.hpp"

#include <cmath>
#include <stdexcept>

#ifndef SNEWTON_DATA_DIR
#define SNEWTON_DATA_DIR "data"
#endif

namespace snewton {

// ---------------------------------------------------------------------------
// ScalarLink

ScalarLink ScalarLink::robust_q(double q) {
  if (!(q > 1.0 && q <= 2.0)) throw std::invalid_argument("robust_q: q must lie in (1, 2]");
  ScalarLink l(Kind::robust_q);
  l.q_ = q;
  return l;
}

ScalarLink ScalarLink::power_even(int k) {
  if (k < 1) throw std::invalid_argument("power_even: k must be >= 1");
  ScalarLink l(Kind::power_even);
  l.k_ = k;
  return l;
}

std::string ScalarLink::name() const {
  switch (kind_) {
    case Kind::logistic:
      return "logistic";
    case Kind::exp_shift:
      return "exp_shift";
    case Kind::entropy:
      return "entropy";
    case Kind::robust_q:
      return "robust_q";
    case Kind::power_even:
      return "power_even";
    case Kind::neg_exp_linear:
      return "neg_exp_linear";
  }
  return "?";
}

bool ScalarLink::in_domain(double u) const {
  if (kind_ == Kind::entropy || kind_ == Kind::robust_q) return u > 0.0;
  return std::isfinite(u);
}

void ScalarLink::check(double u) const {
  if (!in_domain(u)) {
    throw DomainError(name() + ": argument " + std::to_string(u) + " outside the domain");
  }
}

double ScalarLink::value(double u) const {
  check(u);
  switch (kind_) {
    case Kind::logistic:
      return std::log1p(std::exp(-std::abs(u))) + std::max(-u, 0.0);
    case Kind::exp_shift:
      return std::exp(u) - u;
    case Kind::entropy:
      return u * std::log(u);
    case Kind::robust_q:
      return std::pow(u, q_);
    case Kind::power_even:
      return std::pow(u, 2 * k_);
    case Kind::neg_exp_linear:
      return std::expm1(-u) + u;
  }
  return kNaN;
}

double ScalarLink::d1(double u) const {
  check(u);
  switch (kind_) {
    case Kind::logistic:
      // -1/(1+e^u)
      return u >= 0.0 ? -std::exp(-u) / (1.0 + std::exp(-u)) : -1.0 / (1.0 + std::exp(u));
    case Kind::exp_shift:
      return std::expm1(u);
    case Kind::entropy:
      return std::log(u) + 1.0;
    case Kind::robust_q:
      return q_ * std::pow(u, q_ - 1.0);
    case Kind::power_even:
      return 2.0 * k_ * std::pow(u, 2 * k_ - 1);
    case Kind::neg_exp_linear:
      return -std::expm1(-u);
  }
  return kNaN;
}

double ScalarLink::d2(double u) const {
  check(u);
  switch (kind_) {
    case Kind::logistic: {
      const double e = std::exp(-std::abs(u));
      return e / ((1.0 + e) * (1.0 + e));
    }
    case Kind::exp_shift:
      return std::exp(u);
    case Kind::entropy:
      return 1.0 / u;
    case Kind::robust_q:
      return q_ * (q_ - 1.0) * std::pow(u, q_ - 2.0);
    case Kind::power_even:
      return k_ == 1 ? 2.0 : 2.0 * k_ * (2 * k_ - 1) * std::pow(u, 2 * k_ - 2);
    case Kind::neg_exp_linear:
      return std::exp(-u);
  }
  return kNaN;
}

double ScalarLink::d3(double u) const {
  check(u);
  switch (kind_) {
    case Kind::logistic: {
      // s(1-s)(1-2s) with s = 1/(1+e^-u)
      const double e = std::exp(-std::abs(u));
      const double w = e / ((1.0 + e) * (1.0 + e));
      const double t = (1.0 - e) / (1.0 + e);  // |1 - 2s|
      return u >= 0.0 ? -w * t : w * t;
    }
    case Kind::exp_shift:
      return std::exp(u);
    case Kind::entropy:
      return -1.0 / (u * u);
    case Kind::robust_q:
      return q_ * (q_ - 1.0) * (q_ - 2.0) * std::pow(u, q_ - 3.0);
    case Kind::power_even:
      return k_ == 1 ? 0.0 : 2.0 * k_ * (2 * k_ - 1) * (2 * k_ - 2) * std::pow(u, 2 * k_ - 3);
    case Kind::neg_exp_linear:
      return -std::exp(-u);
  }
  return kNaN;
}

// ---------------------------------------------------------------------------
// GlmObjective

namespace {

ObjectiveInfo glm_info(const ScalarLink& link, const GlmOptions& opts) {
  ObjectiveInfo info = opts.info;
  if (info.name.empty()) info.name = "glm-" + link.name();
  // phi''' <= phi'' with rows of unit dual norm: quasi-self-concordant, k = 1
  if (!info.analytic_stability && opts.normalize &&
      (link.kind() == ScalarLink::Kind::logistic || link.kind() == ScalarLink::Kind::exp_shift)) {
    info.analytic_stability =
        StabilityCondition{StabilityCondition::Kind::quasi_self_concordant, 0.0, 0.0, 0.0, 1.0};
  }
  return info;
}

}  // namespace

GlmObjective::GlmObjective(Matrix rows, ScalarLink link, GlmOptions opts)
    : Objective(glm_info(link, opts)), A_(std::move(rows)), link_(link) {
  if (A_.rows() == 0 || A_.cols() == 0) throw DimensionError("GlmObjective: empty data matrix");
  if (!A_.allFinite()) throw std::invalid_argument("GlmObjective: non-finite data");
  if (opts.labels) {
    require_same_dim(opts.labels->size(), A_.rows(), "GlmObjective labels");
    for (Index i = 0; i < A_.rows(); ++i) A_.row(i) *= (*opts.labels)[i];
  }
  if (opts.normalize) {
    for (Index i = 0; i < A_.rows(); ++i) {
      const double nrm = opts.dual == DualNorm::l2 ? A_.row(i).norm() : A_.row(i).lpNorm<1>();
      if (nrm == 0.0) throw std::invalid_argument("GlmObjective: cannot normalize a zero row");
      A_.row(i) /= nrm;
    }
  }
  tilt_ = opts.tilt ? *opts.tilt : Vector::Zero(A_.cols());
  require_same_dim(tilt_.size(), A_.cols(), "GlmObjective tilt");
  regularizer_ = opts.regularizer;
}

Vector GlmObjective::margins(const Vector& x) const {
  require_same_dim(x.size(), dim(), "GlmObjective");
  return A_ * x;
}

bool GlmObjective::in_domain(const Vector& x) const {
  if (x.size() != dim()) return false;
  const Vector u = A_ * x;
  for (Index i = 0; i < u.size(); ++i) {
    if (!link_.in_domain(u[i])) return false;
  }
  return true;
}

double GlmObjective::value(const Vector& x) const {
  const Vector u = margins(x);
  double s = tilt_.dot(x);
  for (Index i = 0; i < u.size(); ++i) s += link_.value(u[i]);
  return s;
}

Vector GlmObjective::gradient(const Vector& x) const {
  const Vector u = margins(x);
  Vector w(u.size());
  for (Index i = 0; i < u.size(); ++i) w[i] = link_.d1(u[i]);
  return A_.transpose() * w + tilt_;
}

Vector GlmObjective::curvature_weights(const Vector& x) const {
  const Vector u = margins(x);
  Vector w(u.size());
  for (Index i = 0; i < u.size(); ++i) w[i] = link_.d2(u[i]);
  return w;
}

SymMatrix GlmObjective::hessian(const Vector& x) const {
  const Vector w = curvature_weights(x);
  return SymMatrix(Matrix(A_.transpose() * w.asDiagonal() * A_));
}

Vector GlmObjective::hvp(const Vector& x, const Vector& v) const {
  require_same_dim(v.size(), dim(), "GlmObjective::hvp");
  const Vector w = curvature_weights(x);
  return A_.transpose() * (w.cwiseProduct(A_ * v));
}

// ---------------------------------------------------------------------------
// QuadraticObjective

ObjectiveInfo QuadraticObjective::make_info(const SymMatrix& P, const Vector& q, std::string name) {
  ObjectiveInfo info;
  info.name = std::move(name);
  try {
    const Vector xs = -psd_solve(P, q);
    info.minimizer = xs;
    info.f_star = 0.5 * q.dot(xs);
  } catch (const RangeError&) {
    // unbounded below: no minimizer
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(P.matrix(), Eigen::EigenvaluesOnly);
  const double mu = es.eigenvalues().minCoeff();
  const double L = es.eigenvalues().maxCoeff();
  if (mu > 0.0) {
    info.analytic_stability =
        StabilityCondition{StabilityCondition::Kind::lipschitz_grad_strongly_convex, L, mu, 0.0, 0.0};
  }
  return info;
}

QuadraticObjective::QuadraticObjective(SymMatrix P, Vector q, std::string name)
    : Objective(make_info(P, q, std::move(name))), P_(std::move(P)), q_(std::move(q)) {
  require_same_dim(P_.dim(), q_.size(), "QuadraticObjective");
}

double QuadraticObjective::value(const Vector& x) const {
  require_same_dim(x.size(), dim(), "QuadraticObjective");
  return 0.5 * x.dot(P_.matrix() * x) + q_.dot(x);
}

Vector QuadraticObjective::gradient(const Vector& x) const {
  require_same_dim(x.size(), dim(), "QuadraticObjective");
  return P_.matrix() * x + q_;
}

// ---------------------------------------------------------------------------
// TransformedObjective

ObjectiveInfo TransformedObjective::make_info(const Objective& base, const Matrix& A) {
  ObjectiveInfo info;
  info.name = base.info().name + "-transformed";
  info.f_star = base.info().f_star;
  info.analytic_stability = std::nullopt;
  if (base.info().minimizer) {
    Eigen::FullPivLU<Matrix> lu(A);
    if (lu.isInvertible()) info.minimizer = Vector(lu.solve(*base.info().minimizer));
  }
  return info;
}

TransformedObjective::TransformedObjective(ObjectivePtr base, Matrix A)
    : Objective(make_info(*base, A)), base_(std::move(base)), A_(std::move(A)) {
  if (A_.rows() != A_.cols()) throw DimensionError("TransformedObjective: A must be square");
  require_same_dim(A_.rows(), base_->dim(), "TransformedObjective");
}

Vector TransformedObjective::gradient(const Vector& x) const {
  return A_.transpose() * base_->gradient(A_ * x);
}

SymMatrix TransformedObjective::hessian(const Vector& x) const {
  return SymMatrix(Matrix(A_.transpose() * base_->hessian(A_ * x).matrix() * A_));
}

Vector TransformedObjective::hvp(const Vector& x, const Vector& v) const {
  return A_.transpose() * base_->hvp(A_ * x, A_ * v);
}

// ---------------------------------------------------------------------------
// Counterexamples

ObjectivePtr make_counterexample(CounterexampleKind kind, int k) {
  GlmOptions opts;
  opts.info.f_star = 0.0;
  switch (kind) {
    case CounterexampleKind::power_even: {
      if (k < 1) throw std::invalid_argument("power_even counterexample: k must be >= 1");
      opts.info.name = "power_even";
      opts.info.minimizer = Vector::Zero(1);
      return std::make_shared<GlmObjective>(Matrix::Identity(1, 1), ScalarLink::power_even(k), opts);
    }
    case CounterexampleKind::exp_sum_2d:
      opts.info.name = "exp_sum_2d";
      opts.info.minimizer = Vector::Zero(2);
      opts.info.analytic_stability =
          StabilityCondition{StabilityCondition::Kind::quasi_self_concordant, 0.0, 0.0, 0.0, 1.0};
      return std::make_shared<GlmObjective>(Matrix::Identity(2, 2), ScalarLink::neg_exp_linear(),
                                            opts);
    case CounterexampleKind::neg_exp_linear:
      opts.info.name = "neg_exp_linear";
      opts.info.minimizer = Vector::Zero(1);
      opts.info.analytic_stability =
          StabilityCondition{StabilityCondition::Kind::quasi_self_concordant, 0.0, 0.0, 0.0, 1.0};
      return std::make_shared<GlmObjective>(Matrix::Identity(1, 1), ScalarLink::neg_exp_linear(),
                                            opts);
  }
  throw std::invalid_argument("make_counterexample: unknown kind");
}

double newton_ratio_power_even(int k) {
  if (k < 1) throw std::invalid_argument("newton_ratio_power_even: k must be >= 1");
  return std::pow(1.0 - 1.0 / (2.0 * k - 1.0), 2 * k);
}

// ---------------------------------------------------------------------------
// Zoo

std::vector<std::string> zoo_names() {
  return {"quadratic",   "quadratic_stiff", "entropy",    "robust_q",       "logistic_1d",
          "exp_shift",   "logistic_fixture", "power_even", "exp_sum_2d", "neg_exp_linear"};
}

namespace {

Box interval(double a, double b) { return Box{Vector::Constant(1, a), Vector::Constant(1, b)}; }

// 1-D link tilted so that its minimizer sits at `at`.
ZooProblem tilted_scalar(const std::string& name, ScalarLink link, double at, double x0, Box region,
                         std::optional<StabilityCondition> cond) {
  GlmOptions opts;
  const double slope = link.d1(at);
  opts.tilt = Vector::Constant(1, -slope);
  opts.info.name = name;
  opts.info.minimizer = Vector::Constant(1, at);
  opts.info.f_star = link.value(at) - slope * at;
  opts.info.analytic_stability = cond;
  auto obj = std::make_shared<GlmObjective>(Matrix::Identity(1, 1), link, opts);
  return ZooProblem{name, CompositeObjective{obj, ProxTerm::zero()}, Vector::Constant(1, x0), region,
                    link};
}

}  // namespace

ZooProblem make_zoo(const std::string& name, const ZooParams& p) {
  using SC = StabilityCondition;
  if (name == "quadratic") {
    Matrix P(2, 2);
    P << 2.0, 0.5, 0.5, 1.0;
    auto obj = std::make_shared<QuadraticObjective>(SymMatrix(P), Vector::Zero(2), "quadratic");
    return ZooProblem{name, CompositeObjective{obj, ProxTerm::zero()}, Vector::Ones(2), std::nullopt,
                      std::nullopt};
  }
  if (name == "quadratic_stiff") {
    Vector d(2);
    d << 1.0, 100.0;
    auto obj =
        std::make_shared<QuadraticObjective>(SymMatrix::diagonal(d), Vector::Zero(2), "quadratic_stiff");
    return ZooProblem{name, CompositeObjective{obj, ProxTerm::zero()}, Vector::Ones(2), std::nullopt,
                      std::nullopt};
  }
  if (name == "entropy") {
    // On [1, 4]: phi'' = 1/u in [1/4, 1], |phi'''| <= 1.
    return tilted_scalar(name, ScalarLink::entropy(), 2.0, 3.0, interval(1.0, 4.0),
                         SC{SC::Kind::lipschitz_hess_strongly_convex, 0.0, 0.25, 1.0, 0.0});
  }
  if (name == "robust_q") {
    const double q = p.q;
    const double L = q * (q - 1.0);
    const double mu = q * (q - 1.0) * std::pow(4.0, q - 2.0);
    return tilted_scalar(name, ScalarLink::robust_q(q), 2.0, 3.0, interval(1.0, 4.0),
                         SC{SC::Kind::lipschitz_grad_strongly_convex, L, mu, 0.0, 0.0});
  }
  if (name == "exp_shift") {
    return tilted_scalar(name, ScalarLink::exp_shift(), 0.0, -2.0, interval(-2.0, 2.0),
                         SC{SC::Kind::quasi_self_concordant, 0.0, 0.0, 0.0, 1.0});
  }
  if (name == "logistic_1d") {
    GlmOptions opts;
    opts.normalize = true;
    opts.info.name = name;
    opts.info.minimizer = Vector::Zero(1);
    opts.info.f_star = 2.0 * std::log(2.0);
    Matrix A(2, 1);
    A << 1.0, -1.0;
    auto obj = std::make_shared<GlmObjective>(A, ScalarLink::logistic(), opts);
    return ZooProblem{name, CompositeObjective{obj, ProxTerm::zero()}, Vector::Constant(1, 2.0),
                      interval(-2.0, 2.0), ScalarLink::logistic()};
  }
  if (name == "logistic_fixture") {
    const std::filesystem::path path =
        p.data_path.empty() ? std::filesystem::path(SNEWTON_DATA_DIR) / "fixture3.libsvm" : p.data_path;
    std::optional<ProxTerm> reg;
    if (p.box) {
      reg = ProxTerm::box(p.box->lo, p.box->hi);
    } else if (p.lambda > 0.0) {
      reg = ProxTerm::l1(p.lambda);
    }
    auto obj = load_libsvm(path, true, ScalarLink::logistic(), {}, reg);
    Vector x0 = Vector::Zero(obj->dim());
    x0[0] = 1.5;
    if (obj->dim() > 1) x0[1] = -1.5;
    if (reg && reg->is_indicator()) x0 = reg->prox(x0, 1.0);
    return ZooProblem{name, CompositeObjective{obj, reg ? *reg : ProxTerm::zero()}, x0, p.box,
                      ScalarLink::logistic()};
  }
  if (name == "power_even") {
    return ZooProblem{name, CompositeObjective{make_counterexample(CounterexampleKind::power_even, p.k)},
                      Vector::Constant(1, 3.0), std::nullopt, ScalarLink::power_even(p.k)};
  }
  if (name == "exp_sum_2d") {
    Vector x0(2);
    x0 << p.k, -p.k;
    return ZooProblem{name, CompositeObjective{make_counterexample(CounterexampleKind::exp_sum_2d)},
                      x0, std::nullopt, ScalarLink::neg_exp_linear()};
  }
  if (name == "neg_exp_linear") {
    return ZooProblem{name,
                      CompositeObjective{make_counterexample(CounterexampleKind::neg_exp_linear)},
                      Vector::Constant(1, static_cast<double>(p.k)), std::nullopt,
                      ScalarLink::neg_exp_linear()};
  }
  throw std::invalid_argument("unknown problem '" + name + "'");
}

}  // namespace snewton
