#pragma once

// Test problems: separable GLM losses f(Ax) = sum_i phi(A_i^T x), quadratics,
// linear reparametrizations and the counterexamples used to show where
// line-search Newton and unit steps fail.

#include "snewton/core.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace snewton {

/// Scalar convex link phi with its first two derivatives.
class ScalarLink {
 public:
  enum class Kind { logistic, exp_shift, entropy, robust_q, power_even, neg_exp_linear };

  static ScalarLink logistic() { return ScalarLink(Kind::logistic); }          // log(1+e^-u)
  static ScalarLink exp_shift() { return ScalarLink(Kind::exp_shift); }        // e^u - u
  static ScalarLink entropy() { return ScalarLink(Kind::entropy); }            // u ln u, u > 0
  static ScalarLink robust_q(double q);                                        // u^q, u > 0
  static ScalarLink power_even(int k);                                         // u^(2k)
  static ScalarLink neg_exp_linear() { return ScalarLink(Kind::neg_exp_linear); }  // e^-u + u - 1

  Kind kind() const { return kind_; }
  double q() const { return q_; }
  int k() const { return k_; }
  std::string name() const;

  /// u > 0 for entropy and robust_q, everything otherwise.
  bool in_domain(double u) const;
  double value(double u) const;
  double d1(double u) const;
  double d2(double u) const;
  double d3(double u) const;

 private:
  explicit ScalarLink(Kind k) : kind_(k) {}
  void check(double u) const;

  Kind kind_;
  double q_ = 2.0;
  int k_ = 1;
};

/// Dual norm used when normalizing data rows: l2 pairs with an l2 primal
/// norm, l1 with linf.
enum class DualNorm { l2, l1 };

struct GlmOptions {
  bool normalize = false;
  DualNorm dual = DualNorm::l2;
  /// Per-row signs folded into the rows before normalization.
  std::optional<Vector> labels;
  /// Linear term <tilt, x>; moves the minimizer without changing the Hessian.
  std::optional<Vector> tilt;
  std::optional<ProxTerm> regularizer;
  ObjectiveInfo info;
};

/// f(x) = sum_i phi(A_i^T x) + <tilt, x>.
class GlmObjective : public Objective {
 public:
  GlmObjective(Matrix rows, ScalarLink link, GlmOptions opts = {});

  Index dim() const override { return A_.cols(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  SymMatrix hessian(const Vector& x) const override;
  Vector hvp(const Vector& x, const Vector& v) const override;
  bool in_domain(const Vector& x) const override;

  const Matrix& data() const { return A_; }
  const ScalarLink& link() const { return link_; }
  const Vector& tilt() const { return tilt_; }
  const std::optional<ProxTerm>& regularizer() const { return regularizer_; }
  /// phi''(A_i^T x) per row.
  Vector curvature_weights(const Vector& x) const;

 private:
  Vector margins(const Vector& x) const;

  Matrix A_;
  ScalarLink link_;
  Vector tilt_;
  std::optional<ProxTerm> regularizer_;
};

/// f(x) = 1/2 x^T P x + q^T x.
class QuadraticObjective : public Objective {
 public:
  QuadraticObjective(SymMatrix P, Vector q, std::string name = "quadratic");

  Index dim() const override { return q_.size(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  SymMatrix hessian(const Vector&) const override { return P_; }

 private:
  static ObjectiveInfo make_info(const SymMatrix& P, const Vector& q, std::string name);
  SymMatrix P_;
  Vector q_;
};

/// x -> f(A x) for square A.
class TransformedObjective : public Objective {
 public:
  TransformedObjective(ObjectivePtr base, Matrix A);

  Index dim() const override { return A_.cols(); }
  double value(const Vector& x) const override { return base_->value(A_ * x); }
  Vector gradient(const Vector& x) const override;
  SymMatrix hessian(const Vector& x) const override;
  Vector hvp(const Vector& x, const Vector& v) const override;
  bool in_domain(const Vector& x) const override { return base_->in_domain(A_ * x); }

 private:
  static ObjectiveInfo make_info(const Objective& base, const Matrix& A);
  ObjectivePtr base_;
  Matrix A_;
};

enum class CounterexampleKind { power_even, exp_sum_2d, neg_exp_linear };

/// x^(2k); e^-x + x + e^-y + y - 2; e^-x + x - 1. All have f* = 0 at 0.
ObjectivePtr make_counterexample(CounterexampleKind kind, int k = 2);

/// f(x1)/f(x0) of one full Newton step on x^(2k): (1 - 1/(2k-1))^(2k).
double newton_ratio_power_even(int k);

struct LibsvmOptions {
  bool normalize = true;
  DualNorm dual = DualNorm::l2;
};

/// Raw LIBSVM contents: one dense row per kept line, labels mapped to +1
/// (label > 0) or -1.
struct LibsvmData {
  Matrix rows;
  Vector labels;
  std::size_t dropped_zero_rows = 0;
};

LibsvmData read_libsvm(const std::filesystem::path& path);

/// Labels folded into rows, then rows normalized if requested.
std::shared_ptr<GlmObjective> load_libsvm(const std::filesystem::path& path, bool normalize,
                                          ScalarLink link = ScalarLink::logistic(),
                                          LibsvmOptions opts = {},
                                          std::optional<ProxTerm> regularizer = std::nullopt);

/// A named test problem with its natural start and stability interval.
struct ZooProblem {
  std::string name;
  CompositeObjective F;
  Vector x0;
  /// Interval (or box) on which stability constants are posed, when the
  /// problem comes with one.
  std::optional<Box> region;
  std::optional<ScalarLink> link;
};

struct ZooParams {
  int k = 2;
  double q = 1.5;
  double lambda = 0.0;
  std::optional<Box> box;
  std::filesystem::path data_path;
};

std::vector<std::string> zoo_names();
/// Throws std::invalid_argument for unknown names.
ZooProblem make_zoo(const std::string& name, const ZooParams& params = {});

}  // namespace snewton
