#include <doctest.h>

#include "snewton/core.hpp"
#include "snewton/domain.hpp"
#include "snewton/errors.hpp"
#include "snewton/objectives.hpp"
#include "snewton/stability.hpp"

#include <random>

using namespace snewton;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::vector<ZooProblem> whole_zoo() {
  std::vector<ZooProblem> out;
  for (const auto& n : zoo_names()) out.push_back(make_zoo(n));
  ZooParams l1;
  l1.lambda = 0.05;
  out.push_back(make_zoo("logistic_fixture", l1));
  return out;
}

}  // namespace

TEST_CASE("weighted_norm_sq examples") {
  CHECK(weighted_norm_sq(vec({1, 2}), SymMatrix::identity(2)) == 5.0);
  CHECK(weighted_norm_sq(vec({1, 0}), SymMatrix::diagonal(vec({3, 7}))) == 3.0);
  Matrix M(2, 2);
  M << 2, 1, 1, 2;
  CHECK(weighted_norm_sq(vec({1, 1}), SymMatrix(M)) == 6.0);
  CHECK_THROWS_AS(weighted_norm_sq(vec({1, 2, 3}), SymMatrix::identity(2)), DimensionError);
}

TEST_CASE("SymMatrix mirrors the upper triangle") {
  Matrix M(2, 2);
  M << 1, 2, 5, 3;
  SymMatrix S(M);
  CHECK(S(1, 0) == S(0, 1));
  CHECK(S(0, 1) == 2.0);
}

TEST_CASE("vectors with non-finite entries are rejected") {
  CHECK_THROWS(require_finite(vec({1, std::nan("")}), "x"));
  CHECK_THROWS(require_finite(vec({kInf}), "x"));
  CHECK_NOTHROW(require_finite(vec({1, 2}), "x"));
}

TEST_CASE("norms") {
  CHECK(NormSpec::l2()(vec({3, 4})) == doctest::Approx(5.0));
  CHECK(NormSpec::linf()(vec({3, -4})) == 4.0);
  CHECK(NormSpec::metric(SymMatrix::diagonal(vec({4, 0})))(vec({1, 5})) == doctest::Approx(2.0));
}

TEST_CASE("prox terms") {
  const auto box = ProxTerm::box(vec({-1, -1}), vec({1, 1}));
  CHECK(box.value(vec({0.5, 0.5})) == 0.0);
  CHECK(box.value(vec({2, 0})) == kInf);
  CHECK(box.prox(vec({2, -3}), 1.0).isApprox(vec({1, -1})));
  const auto l1 = ProxTerm::l1(0.5);
  CHECK(l1.value(vec({1, -2})) == doctest::Approx(1.5));
  CHECK(l1.prox(vec({1, -0.2}), 1.0).isApprox(vec({0.5, 0.0})));
  const auto ball = ProxTerm::ball(vec({0, 0}), 1.0);
  CHECK(ball.value(vec({3, 4})) == kInf);
  CHECK(ball.prox(vec({3, 4}), 1.0).isApprox(vec({0.6, 0.8})));
  CHECK_THROWS(ProxTerm::l1(-1.0));
}

TEST_CASE("level_set_contains examples") {
  auto f = std::make_shared<QuadraticObjective>(SymMatrix::identity(1), Vector::Zero(1));
  const CompositeObjective F{f, ProxTerm::zero()};
  const auto dom = LevelSetDomain::level_set(F, vec({2}));
  CHECK(level_set_contains(dom, vec({2})));
  CHECK(level_set_contains(dom, vec({1})));
  CHECK_FALSE(level_set_contains(dom, vec({3})));
  // the probed bounding box encloses [-2, 2]
  CHECK(dom.bounds().lo[0] <= -2.0);
  CHECK(dom.bounds().hi[0] >= 2.0);
  CHECK(dom.diameter_estimate() >= 4.0);
  CHECK(dom.diameter_estimate() <= 4.5);
}

TEST_CASE("diameter estimate dominates sampled pairwise distances") {
  for (const auto& z : whole_zoo()) {
    if (z.name == "power_even") continue;  // flat minimum, handled separately below
    const auto dom = z.region ? LevelSetDomain::box(z.F, *z.region) : LevelSetDomain::level_set(z.F, z.x0);
    const auto pts = sample_points(dom, 200, 5, 10);
    double far = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) far = std::max(far, (pts[i] - pts[j]).norm());
    CHECK_MESSAGE(dom.diameter_estimate() >= far, z.name);
  }
}

TEST_CASE("quadratic model is zero at the anchor") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int t = 0; t < 50; ++t) {
    Vector x(2), gr(2);
    x << g(rng), g(rng);
    gr << g(rng), g(rng);
    Matrix A = Matrix::Random(2, 2);
    const ProxTerm terms[] = {ProxTerm::zero(), ProxTerm::l1(0.3), ProxTerm::box(x.array() - 1, x.array() + 1),
                              ProxTerm::ball(x, 2.0)};
    for (const auto& pt : terms) {
      QuadraticModel m(x, gr, SymMatrix(A * A.transpose()), 1.5, pt);
      CHECK(m.evaluate(Vector::Zero(2)) == 0.0);
    }
  }
}

TEST_CASE("zoo: hvp matches the Hessian and Hessians are PSD") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (const auto& z : whole_zoo()) {
    const Objective& f = *z.F.smooth;
    const auto dom = z.region ? LevelSetDomain::box(z.F, *z.region) : LevelSetDomain::level_set(z.F, z.x0);
    const auto pts = sample_points(dom, 100, 17, 10);
    for (const auto& x : pts) {
      Vector v(f.dim());
      for (Index i = 0; i < v.size(); ++i) v[i] = g(rng);
      const SymMatrix H = f.hessian(x);
      CHECK_MESSAGE((f.hvp(x, v) - H * v).norm() <= 1e-10 * (1 + v.norm()) * std::max(1.0, H.matrix().norm()),
                    z.name);
      CHECK_MESSAGE(weighted_norm_sq(v, H) >= -1e-10 * v.squaredNorm(), z.name);
    }
  }
}

TEST_CASE("objectives are pure") {
  const auto z = make_zoo("logistic_fixture");
  const Vector x = vec({0.3, -0.7});
  const double a = z.F.smooth->value(x);
  (void)z.F.smooth->gradient(x);
  (void)z.F.smooth->hessian(x);
  CHECK(z.F.smooth->value(x) == a);
}

TEST_CASE("trace records and accepted iterates") {
  SolveTrace tr("t");
  IterationRecord r0;
  r0.iter = 0;
  r0.x = vec({1});
  tr.append(r0);
  IterationRecord r1 = r0;
  r1.iter = 1;
  r1.accepted = false;
  tr.append(r1);
  IterationRecord r2 = r0;
  r2.iter = 2;
  r2.x = vec({0.5});
  tr.append(r2);
  CHECK(tr.accepted_iterates().size() == 2);
  IterationRecord bad = r0;
  bad.iter = 2;
  CHECK_THROWS(tr.append(bad));
}
