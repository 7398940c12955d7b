#pragma once

// Shared domain types: vectors, symmetric matrices, norms, proximable terms,
// objectives, quadratic models and solve traces.

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace snewton {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Throws std::invalid_argument if any entry is NaN or infinite.
void require_finite(const Vector& v, std::string_view what);
void require_same_dim(Index a, Index b, std::string_view what);

/// Dense symmetric matrix. Symmetry is exact: the upper triangle is mirrored
/// into the lower one on construction.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Matrix m);

  static SymMatrix identity(Index n);
  static SymMatrix diagonal(const Vector& d);
  static SymMatrix zero(Index n);

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }
  Vector operator*(const Vector& v) const;
  SymMatrix scaled(double s) const;

 private:
  Matrix m_;
};

/// v^T M v.
double weighted_norm_sq(const Vector& v, const SymMatrix& M);

/// The norm used for trust regions, diameters and local stability.
class NormSpec {
 public:
  enum class Kind { l2, linf, metric };

  static NormSpec l2() { return NormSpec(Kind::l2); }
  static NormSpec linf() { return NormSpec(Kind::linf); }
  static NormSpec metric(SymMatrix m);

  Kind kind() const { return kind_; }
  const SymMatrix& metric_matrix() const { return metric_; }
  double operator()(const Vector& v) const;
  std::string name() const;

 private:
  explicit NormSpec(Kind k) : kind_(k) {}
  Kind kind_;
  SymMatrix metric_;
};

/// Axis-aligned box [lo, hi].
struct Box {
  Vector lo;
  Vector hi;

  Index dim() const { return lo.size(); }
  bool contains(const Vector& x, double tol = 0.0) const;
  Vector clamp(const Vector& x) const;
  Vector center() const { return 0.5 * (lo + hi); }
  /// Diameter of the box measured in `norm`.
  double diameter(const NormSpec& norm) const;
};

/// Convex proximable term g of F = f + g. Indicator kinds return 0 inside
/// their set and +inf outside.
class ProxTerm {
 public:
  enum class Kind { zero, l1, box, ball };
  enum class BallNorm { l2, linf };

  static ProxTerm zero() { return ProxTerm(Kind::zero); }
  static ProxTerm l1(double lambda);
  static ProxTerm box(Vector lo, Vector hi);
  static ProxTerm ball(Vector center, double radius, BallNorm norm = BallNorm::l2);

  Kind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  const Vector& lo() const { return lo_; }
  const Vector& hi() const { return hi_; }
  const Vector& center() const { return center_; }
  double radius() const { return radius_; }
  BallNorm ball_norm() const { return ball_norm_; }

  bool is_indicator() const { return kind_ == Kind::box || kind_ == Kind::ball; }
  /// True when the term splits into per-coordinate pieces (zero, l1, box,
  /// linf ball).
  bool separable() const;
  /// Bounding box of the indicator set, when there is one.
  std::optional<Box> bounding_box() const;

  double value(const Vector& x) const;
  bool contains(const Vector& x, double tol = 0.0) const;
  /// Euclidean proximal operator of t*g at z.
  Vector prox(const Vector& z, double t) const;
  std::string describe() const;

 private:
  explicit ProxTerm(Kind k) : kind_(k) {}
  void check_dim(const Vector& x) const;

  Kind kind_;
  double lambda_ = 0.0;
  Vector lo_, hi_, center_;
  double radius_ = 0.0;
  BallNorm ball_norm_ = BallNorm::l2;
};

/// Sufficient conditions for a stable Hessian, with their constants.
struct StabilityCondition {
  enum class Kind {
    lipschitz_grad_strongly_convex,  // L, mu
    lipschitz_hess_strongly_convex,  // M, mu
    self_concordant_lipschitz_grad,  // k, L
    quasi_self_concordant,           // k
  };
  Kind kind;
  double L = 0.0;
  double mu = 0.0;
  double M = 0.0;
  double k = 0.0;
};

struct ObjectiveInfo {
  std::string name;
  std::optional<double> f_star;
  std::optional<Vector> minimizer;
  std::optional<StabilityCondition> analytic_stability;
};

/// Twice differentiable convex function with analytic derivatives.
/// Implementations must be pure: evaluation never mutates observable state.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual Index dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual SymMatrix hessian(const Vector& x) const = 0;
  virtual Vector hvp(const Vector& x, const Vector& v) const;
  /// Natural domain of the function (e.g. u > 0 for entropy).
  virtual bool in_domain(const Vector&) const { return true; }

  const ObjectiveInfo& info() const { return info_; }

 protected:
  explicit Objective(ObjectiveInfo info) : info_(std::move(info)) {}

 private:
  ObjectiveInfo info_;
};

using ObjectivePtr = std::shared_ptr<const Objective>;

/// F = f + g.
struct CompositeObjective {
  ObjectivePtr smooth;
  ProxTerm nonsmooth = ProxTerm::zero();

  Index dim() const { return smooth->dim(); }
  /// +inf outside dom g or outside the natural domain of f.
  double value(const Vector& x) const;
  std::optional<double> f_star() const;
};

/// Q(step) = <grad, step> + sigma/2 |step|^2_metric + g(anchor + step) - g(anchor).
class QuadraticModel {
 public:
  QuadraticModel(Vector anchor, Vector grad, SymMatrix metric, double sigma,
                 ProxTerm prox = ProxTerm::zero());

  const Vector& anchor() const { return anchor_; }
  const Vector& grad() const { return grad_; }
  const SymMatrix& metric() const { return metric_; }
  double sigma() const { return sigma_; }
  const ProxTerm& prox() const { return prox_; }
  Index dim() const { return anchor_.size(); }

  double evaluate(const Vector& step) const;
  double smooth_part(const Vector& step) const;
  QuadraticModel with_sigma(double sigma) const;

 private:
  Vector anchor_;
  Vector grad_;
  SymMatrix metric_;
  double sigma_;
  ProxTerm prox_;
  double prox_at_anchor_;
};

enum class SolveStatus { running, converged, max_iter, domain_violation, numerical_failure };
std::string to_string(SolveStatus s);

struct IterationRecord {
  int iter = 0;
  double f_value = kNaN;
  double composite_value = kNaN;
  std::optional<double> gap;
  double step_norm = 0.0;
  double sigma = kNaN;
  std::optional<double> rho;
  bool accepted = true;
  double wall_time = 0.0;
  std::optional<double> theta_achieved;
  double newton_decrement = kNaN;
  Vector x;
};

/// Per-iteration history of a solver run. Record 0 is the starting point.
class SolveTrace {
 public:
  explicit SolveTrace(std::string solver = {}) : solver_(std::move(solver)) {}

  void append(IterationRecord rec);
  void set_status(SolveStatus s) { status_ = s; }
  void warn(std::string msg) { warnings_.push_back(std::move(msg)); }
  void set_eta(double eta) { eta_ = eta; }

  const std::string& solver() const { return solver_; }
  const std::vector<IterationRecord>& records() const { return records_; }
  SolveStatus status() const { return status_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  std::optional<double> eta() const { return eta_; }
  const IterationRecord& last() const { return records_.back(); }
  const Vector& final_x() const { return records_.back().x; }
  bool empty() const { return records_.empty(); }
  /// Iterates x_0, x_1, ... of accepted records, in order.
  std::vector<Vector> accepted_iterates() const;

 private:
  std::string solver_;
  std::vector<IterationRecord> records_;
  SolveStatus status_ = SolveStatus::running;
  std::vector<std::string> warnings_;
  std::optional<double> eta_;
};

}  // namespace snewton
