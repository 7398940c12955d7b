#include "snewton/approximation.hpp"

#include "snewton/objectives.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace snewton {

ApproxScheme ApproxScheme::sketch(int rows) {
  if (rows < 1) throw std::invalid_argument("sketch: rows must be >= 1");
  ApproxScheme s;
  s.kind = Kind::sketch;
  s.rows = rows;
  return s;
}

ApproxScheme ApproxScheme::block_diag(int blocks) {
  if (blocks < 1) throw std::invalid_argument("block_diag: blocks must be >= 1");
  ApproxScheme s;
  s.kind = Kind::block_diag;
  s.blocks = blocks;
  return s;
}

ApproxScheme ApproxScheme::hessian_free(double cg_tol) {
  if (!(cg_tol > 0.0)) throw std::invalid_argument("hessian_free: cg_tol must be > 0");
  ApproxScheme s;
  s.kind = Kind::hessian_free;
  s.cg_tol = cg_tol;
  return s;
}

std::string ApproxScheme::describe() const {
  switch (kind) {
    case Kind::exact_hessian:
      return "exact";
    case Kind::sketch:
      return "sketch(" + std::to_string(rows) + ")";
    case Kind::block_diag:
      return "block_diag(" + std::to_string(blocks) + ")";
    case Kind::hessian_free:
      return "hessian_free";
  }
  return "?";
}

HessianApproximator::HessianApproximator(ObjectivePtr obj, ApproxScheme scheme, std::uint64_t seed)
    : obj_(std::move(obj)), scheme_(scheme), seed_(seed) {
  if (scheme_.kind == ApproxScheme::Kind::sketch &&
      dynamic_cast<const GlmObjective*>(obj_.get()) == nullptr) {
    throw std::invalid_argument("sketch approximation needs a GLM objective");
  }
}

SymMatrix HessianApproximator::build(const Vector& x, int iteration) const {
  switch (scheme_.kind) {
    case ApproxScheme::Kind::exact_hessian:
    case ApproxScheme::Kind::hessian_free:
      return obj_->hessian(x);
    case ApproxScheme::Kind::block_diag: {
      Matrix H = obj_->hessian(x).matrix();
      const Index n = H.rows();
      const Index nb = std::min<Index>(scheme_.blocks, n);
      auto block_of = [&](Index i) { return (i * nb) / n; };
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
          if (block_of(i) != block_of(j)) H(i, j) = 0.0;
        }
      }
      return SymMatrix(std::move(H));
    }
    case ApproxScheme::Kind::sketch: {
      const auto& glm = static_cast<const GlmObjective&>(*obj_);
      const Matrix& A = glm.data();
      const Index m = A.rows();
      const Index s = std::min<Index>(scheme_.rows, m);
      std::vector<Index> idx(static_cast<std::size_t>(m));
      std::iota(idx.begin(), idx.end(), Index{0});
      std::mt19937_64 rng(seed_ * 0x100000001b3ULL + static_cast<std::uint64_t>(iteration));
      // partial Fisher-Yates: the first s entries are a uniform subset
      for (Index i = 0; i < s; ++i) {
        std::uniform_int_distribution<Index> pick(i, m - 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
      }
      const Vector w = glm.curvature_weights(x);
      Matrix H = Matrix::Zero(A.cols(), A.cols());
      for (Index k = 0; k < s; ++k) {
        const Index i = idx[static_cast<std::size_t>(k)];
        H.noalias() += w[i] * A.row(i).transpose() * A.row(i);
      }
      H *= static_cast<double>(m) / static_cast<double>(s);
      return SymMatrix(std::move(H));
    }
  }
  return obj_->hessian(x);
}

LinearOperator HessianApproximator::op(const Vector& x, int iteration) const {
  if (scheme_.kind == ApproxScheme::Kind::hessian_free) {
    ObjectivePtr obj = obj_;
    Vector at = x;
    return [obj, at](const Vector& v) { return obj->hvp(at, v); };
  }
  SymMatrix H = build(x, iteration);
  return [H](const Vector& v) { return H * v; };
}

}  // namespace snewton
