#include <doctest.h>

#include "snewton/domain.hpp"
#include "snewton/errors.hpp"
#include "snewton/objectives.hpp"
#include "snewton/oracle.hpp"
#include "snewton/solvers.hpp"
#include "snewton/stability.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace snewton;

namespace {

std::filesystem::path write_tmp(const std::string& name, const std::string& body) {
  const auto dir = std::filesystem::temp_directory_path() / "snewton_test_objectives";
  std::filesystem::create_directories(dir);
  const auto p = dir / name;
  std::ofstream(p) << body;
  return p;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("libsvm: single row normalized to unit l2 norm") {
  const auto obj = load_libsvm(write_tmp("one.libsvm", "1 1:3 2:4\n"), true);
  REQUIRE(obj->data().rows() == 1);
  CHECK(obj->data()(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(obj->data()(0, 1) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("libsvm: negative labels flip the row before normalization") {
  const auto obj = load_libsvm(write_tmp("neg.libsvm", "-1 1:3 2:4\n"), true);
  CHECK(obj->data()(0, 0) == doctest::Approx(-0.6));
  CHECK(obj->data()(0, 1) == doctest::Approx(-0.8));
  const auto raw = load_libsvm(write_tmp("neg_raw.libsvm", "-1 1:3 2:4\n"), false);
  CHECK(raw->data()(0, 0) == -3.0);
  CHECK(raw->data()(0, 1) == -4.0);
}

TEST_CASE("libsvm: fixture matches the hand-assembled matrix") {
  const auto obj = load_libsvm(std::filesystem::path(SNEWTON_DATA_DIR) / "fixture3.libsvm", true);
  Matrix want(3, 2);
  want << 1.0, 0.5, -0.5, -1.0, -0.6, 0.9;
  for (Index i = 0; i < 3; ++i) want.row(i) /= want.row(i).norm();
  REQUIRE(obj->data().rows() == 3);
  REQUIRE(obj->data().cols() == 2);
  CHECK((obj->data() - want).cwiseAbs().maxCoeff() <= 1e-15);
  for (Index i = 0; i < 3; ++i) CHECK(std::abs(obj->data().row(i).norm() - 1.0) <= 1e-10);
}

TEST_CASE("libsvm: comments, sparse columns, linf dual normalization") {
  const auto p = write_tmp("mixed.libsvm", "# header\n+1 3:2 # trailing\n\n0 1:1 3:-4\n");
  const auto d = read_libsvm(p);
  REQUIRE(d.rows.rows() == 2);
  REQUIRE(d.rows.cols() == 3);
  CHECK(d.labels[0] == 1.0);
  CHECK(d.labels[1] == -1.0);
  CHECK(d.rows(0, 2) == 2.0);
  CHECK(d.rows(1, 0) == 1.0);
  LibsvmOptions o;
  o.dual = DualNorm::l1;
  const auto obj = load_libsvm(p, true, ScalarLink::logistic(), o);
  CHECK(obj->data().row(1).cwiseAbs().sum() == doctest::Approx(1.0));
}

TEST_CASE("libsvm: zero rows are dropped") {
  const auto d = read_libsvm(write_tmp("zero.libsvm", "1 1:0\n1 2:1\n"));
  CHECK(d.rows.rows() == 1);
  CHECK(d.dropped_zero_rows == 1);
}

TEST_CASE("libsvm: malformed lines report their line number") {
  const auto p = write_tmp("bad.libsvm", "1 1:1\n1 2:x\n");
  try {
    (void)read_libsvm(p);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(read_libsvm(write_tmp("bad0.libsvm", "1 0:1\n")), ParseError);
  CHECK_THROWS_AS(read_libsvm(write_tmp("badlabel.libsvm", "abc 1:1\n")), ParseError);
  CHECK_THROWS_AS(read_libsvm(write_tmp("empty.libsvm", "")), EmptyDataError);
  CHECK_THROWS_AS(read_libsvm(write_tmp("comments.libsvm", "# only\n")), EmptyDataError);
}

TEST_CASE("counterexample values") {
  const auto pe = make_counterexample(CounterexampleKind::power_even, 2);
  CHECK(pe->value(vec({3})) == doctest::Approx(81.0));
  CHECK(pe->gradient(vec({3}))[0] == doctest::Approx(108.0));
  CHECK(pe->hessian(vec({3}))(0, 0) == doctest::Approx(108.0));

  const auto e2 = make_counterexample(CounterexampleKind::exp_sum_2d);
  CHECK(e2->value(vec({0, 0})) == doctest::Approx(0.0));
  CHECK(e2->gradient(vec({0, 0})).norm() == doctest::Approx(0.0));
  REQUIRE(e2->info().f_star);
  CHECK(*e2->info().f_star == 0.0);

  const auto ne = make_counterexample(CounterexampleKind::neg_exp_linear);
  CHECK(ne->value(vec({0})) == 0.0);
  CHECK(ne->gradient(vec({0}))[0] == 0.0);
  CHECK(ne->hessian(vec({0}))(0, 0) == 1.0);

  CHECK_THROWS(make_counterexample(CounterexampleKind::power_even, 0));
}

TEST_CASE("power-even Newton ratio closed form") {
  CHECK(newton_ratio_power_even(1) == 0.0);
  CHECK(newton_ratio_power_even(2) == doctest::Approx(16.0 / 81.0).epsilon(1e-15));
  CHECK(newton_ratio_power_even(10) == doctest::Approx(std::pow(18.0 / 19.0, 20)).epsilon(1e-15));
  CHECK_THROWS(newton_ratio_power_even(0));
}

TEST_CASE("power-even Newton ratio equals one measured exact Newton step") {
  for (int k = 1; k <= 10; ++k) {
    const auto f = make_counterexample(CounterexampleKind::power_even, k);
    SolverConfig cfg;
    cfg.sigma = 1.0;
    cfg.max_iter = 1;
    cfg.gap_tol = 0.0;
    cfg.decrement_tol = 0.0;
    const auto tr = exact_newton(*f, vec({1.7}), cfg);
    REQUIRE(tr.records().size() >= 2);
    const double measured = tr.records()[1].f_value / tr.records()[0].f_value;
    CHECK_MESSAGE(std::abs(measured - newton_ratio_power_even(k)) <= 1e-12, "k=" << k);
  }
}

TEST_CASE("zoo derivatives agree with finite differences") {
  std::vector<ZooProblem> zoo;
  for (const auto& n : zoo_names()) zoo.push_back(make_zoo(n));
  ZooParams q;
  q.q = 1.2;
  zoo.push_back(make_zoo("robust_q", q));
  for (const auto& z : zoo) {
    const Objective& f = *z.F.smooth;
    // keep central differences inside open domains
    Box box = z.region ? *z.region : LevelSetDomain::level_set(z.F, z.x0).bounds();
    box.lo.array() += 1e-4;
    box.hi.array() -= 1e-4;
    const auto dom = LevelSetDomain::box(z.F, box);
    const auto pts = sample_points(dom, 50, 99, 50);
    for (const auto& x : pts) {
      const auto e = finite_diff_check(f, x, 1e-6);
      CHECK_MESSAGE(e.grad_err <= 1e-5, z.name);
      CHECK_MESSAGE(e.hess_err <= 1e-4, z.name);
    }
  }
}

TEST_CASE("GLM value equals the sum over rows") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  const ScalarLink links[] = {ScalarLink::logistic(), ScalarLink::exp_shift(),
                              ScalarLink::neg_exp_linear(), ScalarLink::power_even(3)};
  for (const auto& link : links) {
    Matrix A(7, 3);
    for (Index i = 0; i < A.size(); ++i) A.data()[i] = 0.5 * g(rng);
    GlmObjective f(A, link);
    for (int t = 0; t < 20; ++t) {
      const Vector x = vec({g(rng), g(rng), g(rng)});
      double sum = 0;
      for (Index i = 0; i < A.rows(); ++i) sum += link.value(A.row(i).dot(x));
      CHECK(std::abs(f.value(x) - sum) <= 1e-12 * std::max(1.0, std::abs(sum)));
    }
  }
}

TEST_CASE("GLM with normalization has unit rows") {
  Matrix A(3, 2);
  A << 3, 4, 1, 1, -2, 0;
  GlmOptions o;
  o.normalize = true;
  GlmObjective f(A, ScalarLink::logistic(), o);
  for (Index i = 0; i < 3; ++i) CHECK(std::abs(f.data().row(i).norm() - 1.0) <= 1e-10);
}

TEST_CASE("links: stable logistic and domain checks") {
  const auto lg = ScalarLink::logistic();
  CHECK(lg.value(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(std::isfinite(lg.value(-1e6)));
  CHECK(lg.value(-1e6) == doctest::Approx(1e6));
  CHECK(lg.value(1e6) >= 0.0);
  CHECK(lg.value(1e6) <= 1e-300);
  CHECK(lg.d2(0.0) == doctest::Approx(0.25));
  CHECK_THROWS(ScalarLink::entropy().value(0.0));
  CHECK_THROWS(ScalarLink::robust_q(1.5).value(-1.0));
  CHECK_THROWS(ScalarLink::robust_q(2.5));
  CHECK_THROWS(ScalarLink::power_even(0));
  CHECK(ScalarLink::entropy().d2(2.0) == doctest::Approx(0.5));
}

TEST_CASE("zoo minimizers are stationary") {
  for (const auto& n : zoo_names()) {
    const auto z = make_zoo(n);
    const auto& info = z.F.smooth->info();
    if (!info.minimizer) continue;
    CHECK_MESSAGE(z.F.smooth->gradient(*info.minimizer).norm() <= 1e-12, n);
    if (info.f_star) CHECK_MESSAGE(z.F.smooth->value(*info.minimizer) == doctest::Approx(*info.f_star), n);
  }
  CHECK_THROWS_AS(make_zoo("nope"), std::invalid_argument);
}
