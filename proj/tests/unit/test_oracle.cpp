#include <doctest.h>

#include "snewton/domain.hpp"
#include "snewton/errors.hpp"
#include "snewton/linalg.hpp"
#include "snewton/objectives.hpp"
#include "snewton/oracle.hpp"
#include "snewton/solvers.hpp"
#include "snewton/stability.hpp"

#include <cmath>
#include <random>

using namespace snewton;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Box interval(double a, double b) { return Box{vec({a}), vec({b})}; }

SolveTrace synthetic(const std::vector<double>& gaps) {
  SolveTrace tr("synthetic");
  for (std::size_t t = 0; t < gaps.size(); ++t) {
    IterationRecord r;
    r.iter = static_cast<int>(t);
    r.composite_value = gaps[t];
    r.f_value = gaps[t];
    r.gap = gaps[t];
    r.x = vec({0});
    tr.append(r);
  }
  return tr;
}

}  // namespace

TEST_CASE("grid oracle: 1-D quadratic, free and clipped") {
  const QuadraticModel m(vec({0}), vec({1}), SymMatrix::identity(1), 1.0);
  const auto free = grid_minimize_quadratic(m, {interval(-2, 2), std::nullopt, kInf}, 1e-4);
  CHECK(free.point[0] == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(free.value == doctest::Approx(-0.5).epsilon(1e-8));
  const auto clipped = grid_minimize_quadratic(m, {interval(-0.5, 2), std::nullopt, kInf}, 1e-4);
  CHECK(clipped.point[0] == -0.5);
  CHECK(clipped.value == doctest::Approx(-0.5 + 0.125));
  CHECK_THROWS_AS(grid_minimize_quadratic(QuadraticModel(Vector::Zero(4), Vector::Ones(4), SymMatrix::identity(4), 1.0),
                                          {Box{Vector::Zero(4), Vector::Ones(4)}, std::nullopt, kInf}, 0.1),
                  DimensionError);
}

TEST_CASE("grid oracle agrees with the subproblem solver on an anisotropic 2-D instance") {
  const QuadraticModel m(vec({0, 0}), vec({1, -3}), SymMatrix::diagonal(vec({1, 25})), 1.0);
  const double r = 0.4;
  const auto sol = solve_tr_subproblem(m, NormSpec::l2(), r);
  const auto grid = grid_minimize_quadratic(m, {Box{vec({-r, -r}), vec({r, r})}, NormSpec::l2(), r}, 1e-3);
  CHECK((sol.step - grid.point).norm() <= 1e-3 * 3);
  CHECK(std::abs(sol.model_value - grid.value) <= 1e-3);
}

TEST_CASE("grid oracle and subproblem solvers agree on 500 random instances") {
  std::mt19937_64 rng(500);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 500; ++t) {
    const Index n = t % 3 == 0 ? 1 : 2;
    Matrix B(n, n);
    for (Index i = 0; i < B.size(); ++i) B.data()[i] = g(rng);
    const Matrix H = B * B.transpose();
    Vector grad(n), anchor(n);
    for (Index i = 0; i < n; ++i) {
      grad[i] = 2 * g(rng);
      anchor[i] = 0.3 * g(rng);
    }
    ProxTerm prox = ProxTerm::zero();
    const double pick = u(rng);
    if (pick < 0.3) prox = ProxTerm::l1(u(rng));
    else if (pick < 0.55) prox = ProxTerm::box(anchor.array() - 0.1 - u(rng), anchor.array() + 0.1 + u(rng));
    const double sigma = 0.5 + 2 * u(rng);
    const NormSpec norm = u(rng) < 0.5 ? NormSpec::l2() : NormSpec::linf();
    const double radius = 0.2 + 1.5 * u(rng);
    const QuadraticModel m(anchor, grad, SymMatrix(H), sigma, prox);

    Box bx{Vector::Constant(n, -radius), Vector::Constant(n, radius)};
    if (prox.kind() == ProxTerm::Kind::box) {
      bx.lo = bx.lo.cwiseMax(prox.lo() - anchor);
      bx.hi = bx.hi.cwiseMin(prox.hi() - anchor);
    }
    const double res = n == 1 ? 1e-4 : 5e-3;
    const auto grid = grid_minimize_quadratic(m, {bx, norm, radius}, res);
    const double theta = t % 2 ? 1.0 : 0.5;
    const auto sol = theta == 1.0 ? solve_tr_subproblem(m, norm, radius)
                                  : solve_prox_subproblem(m, norm, radius, theta);
    // Lipschitz constant of the model over the region times the grid spacing
    const double lip =
        grad.norm() + sigma * H.norm() * radius * std::sqrt(double(n)) + (prox.kind() == ProxTerm::Kind::l1 ? prox.lambda() * n : 0);
    const double tol = lip * res * std::sqrt(double(n)) + 1e-9;
    CHECK_MESSAGE(norm(sol.step) <= radius * (1 + 1e-9), "instance " << t);
    if (theta == 1.0) {
      CHECK_MESSAGE(sol.model_value <= grid.value + 1e-9, "instance " << t);
      CHECK_MESSAGE(grid.value <= sol.model_value + tol, "instance " << t);
    } else {
      // Q(step) <= Theta q* <= Theta times the grid minimum
      CHECK_MESSAGE(sol.model_value <= theta * grid.value + 1e-9, "instance " << t);
    }
  }
}

TEST_CASE("finite differences") {
  Matrix P(2, 2);
  P << 3, 1, 1, 2;
  const QuadraticObjective q(SymMatrix(P), vec({1, -2}));
  const auto e = finite_diff_check(q, vec({0.3, 0.7}));
  CHECK(e.grad_err <= 1e-10);
  CHECK(e.hess_err <= 1e-10);

  const GlmObjective lg(Matrix::Identity(2, 2), ScalarLink::logistic());
  const auto el = finite_diff_check(lg, vec({0, 0}), 1e-6);
  CHECK(el.grad_err <= 1e-5);
  CHECK(el.hess_err <= 1e-5);

  const GlmObjective ent(Matrix::Identity(1, 1), ScalarLink::entropy());
  CHECK_THROWS_AS(finite_diff_check(ent, vec({5e-7}), 1e-6), DomainError);
  CHECK_THROWS_AS(finite_diff_check(ent, vec({-1}), 1e-6), DomainError);
}

TEST_CASE("fit_rate") {
  std::vector<double> half;
  for (int t = 0; t < 30; ++t) half.push_back(std::pow(0.5, t));
  const auto fit = fit_rate(synthetic(half), 0.0);
  CHECK(std::abs(fit.geometric_factor - 0.5) <= 1e-12);
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK(fit.points_used == 30);
  CHECK_THROWS_AS(fit_rate(synthetic({1, 0.5, 0.25}), 0.0), std::invalid_argument);
  // the noise floor cuts the trace
  CHECK(fit_rate(synthetic(half), 0.0, 0.5, 1e-3).points_used == 10);

  const auto f = make_counterexample(CounterexampleKind::power_even, 2);
  SolverConfig cfg;
  cfg.max_iter = 60;
  cfg.gap_tol = 1e-30;
  cfg.decrement_tol = 0;
  const auto tr = exact_newton(*f, vec({3}), cfg);
  CHECK(std::abs(fit_rate(tr, 0.0, 0.5, 1e-20).geometric_factor - 16.0 / 81.0) <= 1e-9);

  // gradient descent with step 1/L on diag(1, 10): the slow coordinate shrinks by 1 - mu/L,
  // so the gap shrinks by (1 - mu/L)^2, within the classical 1 - mu/L bound
  const QuadraticObjective stiff(SymMatrix::diagonal(vec({1, 10})), vec({0, 0}));
  const auto gd = gradient_descent_baseline(CompositeObjective{std::make_shared<QuadraticObjective>(stiff)},
                                            vec({1, 1}), 0.1, cfg);
  const double gf = fit_rate(gd, 0.0).geometric_factor;
  CHECK(gf == doctest::Approx(0.81).epsilon(1e-9));
  CHECK(gf <= 1 - 0.1);
}

TEST_CASE("scalar stability: closed forms") {
  CHECK(scalar_stability_exact(ScalarLink::entropy(), 1, 4) == doctest::Approx(4.0));
  CHECK(scalar_stability_exact(ScalarLink::robust_q(1.5), 1, 4) == doctest::Approx(2.0));
  CHECK(scalar_stability_exact(ScalarLink::exp_shift(), -1, 1) == doctest::Approx(std::exp(2.0)));
  CHECK(scalar_stability_exact(ScalarLink::neg_exp_linear(), 0, 2) == doctest::Approx(std::exp(2.0)));
  // logistic: phi'' peaks at 0 and is even
  const double s2 = 1 / (1 + std::exp(-2.0));
  CHECK(scalar_stability_exact(ScalarLink::logistic(), -2, 2) == doctest::Approx(0.25 / (s2 * (1 - s2))));
  CHECK(scalar_stability_exact(ScalarLink::logistic(), 1, 2) == doctest::Approx(ScalarLink::logistic().d2(1) / ScalarLink::logistic().d2(2)));
  CHECK(scalar_stability_exact(ScalarLink::power_even(2), 1, 2) == doctest::Approx(4.0));
  CHECK_THROWS_AS(scalar_stability_exact(ScalarLink::power_even(2), -1, 1), DomainError);
}

TEST_CASE("scalar stability bounds the sampled estimate, which gets within 1%") {
  struct Case {
    ScalarLink link;
    double a, b;
  };
  const Case cases[] = {{ScalarLink::entropy(), 1, 4},     {ScalarLink::robust_q(1.5), 1, 4},
                        {ScalarLink::exp_shift(), -2, 2},  {ScalarLink::logistic(), -2, 2},
                        {ScalarLink::neg_exp_linear(), -1, 1}};
  for (const auto& c : cases) {
    const auto f = std::make_shared<GlmObjective>(Matrix::Identity(1, 1), c.link);
    const auto dom = LevelSetDomain::box(CompositeObjective{f}, interval(c.a, c.b));
    SamplerConfig cfg;
    cfg.grid_resolution = 1e-3;
    const double est = estimate_global_c(*f, dom, cfg).estimate;
    const double exact = scalar_stability_exact(c.link, c.a, c.b);
    CHECK_MESSAGE(est <= exact * (1 + 1e-12), c.link.name());
    CHECK_MESSAGE(est >= 0.99 * exact, c.link.name());
  }
}
