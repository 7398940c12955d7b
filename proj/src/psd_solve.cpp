#include "snewton/errors.hpp"
#include "snewton/linalg.hpp"

#include <cmath>
#include <vector>

namespace snewton {

namespace {

constexpr double kRankCutoff = 1e-12;
constexpr double kRangeTol = 1e-8;

// Positive root t of |p + t d| = radius.
double to_boundary(const Vector& p, const Vector& d, double radius) {
  const double a = d.squaredNorm();
  const double b = 2.0 * p.dot(d);
  const double c = p.squaredNorm() - radius * radius;
  const double disc = std::sqrt(std::max(0.0, b * b - 4.0 * a * c));
  // stable form of (-b + disc) / 2a
  return b >= 0.0 ? (-2.0 * c) / (b + disc) : (-b + disc) / (2.0 * a);
}

}  // namespace

Vector psd_solve(const SymMatrix& H, const Vector& b) {
  require_same_dim(H.dim(), b.size(), "psd_solve");
  require_finite(b, "psd_solve rhs");
  const Index n = b.size();
  Vector x = Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) return x;

  // The rank cutoff is applied after symmetric diagonal scaling, so a Hessian
  // like diag(e^-20, e^20) is treated as full rank. Zero-diagonal coordinates
  // of a PSD matrix are exact null directions.
  std::vector<Index> live;
  for (Index i = 0; i < n; ++i) {
    if (H(i, i) > 0.0) live.push_back(i);
  }
  const Index m = static_cast<Index>(live.size());
  if (m > 0) {
    Vector s(m);
    Matrix K(m, m);
    Vector c(m);
    for (Index i = 0; i < m; ++i) s[i] = 1.0 / std::sqrt(H(live[i], live[i]));
    for (Index i = 0; i < m; ++i) {
      c[i] = s[i] * b[live[i]];
      for (Index j = 0; j < m; ++j) K(i, j) = s[i] * H(live[i], live[j]) * s[j];
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(K);
    const Vector& lam = es.eigenvalues();
    const Matrix& V = es.eigenvectors();
    const double cut = kRankCutoff * std::max(0.0, lam.maxCoeff());
    Vector y = Vector::Zero(m);
    std::vector<Index> null_cols;
    for (Index j = 0; j < m; ++j) {
      if (lam[j] > cut) {
        y += (V.col(j).dot(c) / lam[j]) * V.col(j);
      } else {
        null_cols.push_back(j);
      }
    }
    Vector xl = s.cwiseProduct(y);
    if (!null_cols.empty()) {
      // null(H) in original coordinates is S null(K); remove it for the
      // minimum-norm solution.
      Matrix U(m, static_cast<Index>(null_cols.size()));
      for (std::size_t k = 0; k < null_cols.size(); ++k) {
        U.col(static_cast<Index>(k)) = s.cwiseProduct(V.col(null_cols[k]));
      }
      Eigen::HouseholderQR<Matrix> qr(U);
      const Matrix Q = qr.householderQ() * Matrix::Identity(m, U.cols());
      xl -= Q * (Q.transpose() * xl);
    }
    for (Index i = 0; i < m; ++i) x[live[i]] = xl[i];
  }
  const double res = (H.matrix() * x - b).norm();
  if (!(res <= kRangeTol * bnorm)) {
    throw RangeError("psd_solve: right-hand side outside the range of H (relative residual " +
                     std::to_string(res / bnorm) + ")");
  }
  return x;
}

CgResult cg_solve(const LinearOperator& op, const Vector& b, double rel_tol, int max_iter) {
  CgResult out;
  out.x = Vector::Zero(b.size());
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }
  Vector r = b;
  Vector p = r;
  double rr = r.squaredNorm();
  for (int k = 0; k < max_iter; ++k) {
    const Vector Ap = op(p);
    require_same_dim(Ap.size(), b.size(), "cg_solve operator");
    const double pAp = p.dot(Ap);
    if (pAp <= 0.0) {
      if (pAp < -1e-12 * p.norm() * Ap.norm()) {
        throw NotPSDError("cg_solve: negative curvature p^T H p = " + std::to_string(pAp));
      }
      break;  // zero curvature: b has a component outside range(H)
    }
    const double alpha = rr / pAp;
    out.x += alpha * p;
    r -= alpha * Ap;
    out.iterations = k + 1;
    const double rr_new = r.squaredNorm();
    if (std::sqrt(rr_new) <= rel_tol * bnorm) {
      rr = rr_new;
      out.converged = true;
      break;
    }
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  out.relative_residual = (b - op(out.x)).norm() / bnorm;
  if (out.relative_residual <= rel_tol) out.converged = true;
  return out;
}

CgResult steihaug_cg(const LinearOperator& op, const Vector& b, double radius, double rel_tol,
                     int max_iter) {
  CgResult out;
  const Index n = b.size();
  out.x = Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }
  // minimizing <b,p> + 1/2 p^T H p, i.e. solving H p = -b
  Vector r = -b;
  Vector d = r;
  double rr = r.squaredNorm();
  for (int k = 0; k < max_iter; ++k) {
    const Vector Hd = op(d);
    const double dHd = d.dot(Hd);
    out.iterations = k + 1;
    if (dHd <= 0.0) {
      if (std::isfinite(radius)) {
        out.x += to_boundary(out.x, d, radius) * d;
        out.converged = true;
      }
      break;
    }
    const double alpha = rr / dHd;
    const Vector next = out.x + alpha * d;
    if (std::isfinite(radius) && next.norm() >= radius) {
      out.x += to_boundary(out.x, d, radius) * d;
      out.converged = true;
      break;
    }
    out.x = next;
    r -= alpha * Hd;
    const double rr_new = r.squaredNorm();
    if (std::sqrt(rr_new) <= rel_tol * bnorm) {
      out.converged = true;
      break;
    }
    d = r + (rr_new / rr) * d;
    rr = rr_new;
  }
  out.relative_residual = (op(out.x) + b).norm() / bnorm;
  return out;
}

}  // namespace snewton
