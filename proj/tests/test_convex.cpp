#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jsp/convex.hpp"

#include <random>

using namespace jsp;
using namespace jsp::convex;

namespace {

ConvexSubproblem scalar_problem() {
  ConvexSubproblem p;
  p.n_vars = 1;
  return p;
}

LinConstraint lin1(double a, double b) {
  LinConstraint c;
  c.a = Vector::Constant(1, a);
  c.b = b;
  return c;
}

}  // namespace

TEST_CASE("minimize x^2 subject to x >= 1") {
  auto p = scalar_problem();
  p.Q = Matrix::Identity(1, 1);
  p.c = Vector::Zero(1);
  p.lin.push_back(lin1(-1.0, -1.0));  // -x <= -1
  const auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.objective_value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(sol.objective_value - p.objective(sol.x)) <=
        1e-9 * std::max(1.0, std::abs(sol.objective_value)));
}

TEST_CASE("maximize log x subject to x <= 5") {
  auto p = scalar_problem();
  p.log_terms.push_back({1.0, Vector::Ones(1), 0.0});  // -log(x) in the objective
  p.lin.push_back(lin1(1.0, 5.0));
  const auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("phase I finds interval points and certifies empty intervals") {
  auto p = scalar_problem();
  p.lin.push_back(lin1(-1.0, -1.0));  // x >= 1
  p.lin.push_back(lin1(1.0, 2.0));    // x <= 2
  auto sol = phase1_feasibility(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.x[0] >= 1.0);
  CHECK(sol.x[0] <= 2.0);
  CHECK(sol.feasibility_margin > 0.0);

  auto q = scalar_problem();
  q.lin.push_back(lin1(-1.0, -1.0));  // x >= 1
  q.lin.push_back(lin1(1.0, 0.0));    // x <= 0
  sol = phase1_feasibility(q);
  CHECK(sol.status == SolveStatus::Infeasible);
  CHECK(sol.feasibility_margin < 0.0);
}

TEST_CASE("phase I handles a cone constraint") {
  // || [1] ||_2 <= x  =>  x >= 1
  auto p = scalar_problem();
  SocConstraint sc;
  sc.A = Matrix::Zero(1, 1);
  sc.b = Vector::Ones(1);
  sc.g = Vector::Ones(1);
  sc.f = 0.0;
  p.soc.push_back(sc);
  const auto sol = phase1_feasibility(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.x[0] >= 1.0);
}

TEST_CASE("box-constrained least squares hits the clamped target") {
  const int n = 5;
  std::mt19937_64 gen(7);
  std::normal_distribution<double> normal(0.0, 2.0);
  ConvexSubproblem p;
  p.n_vars = n;
  p.Q = Matrix::Identity(n, n);
  Vector target(n);
  for (int i = 0; i < n; ++i) target[i] = normal(gen);
  p.c = -2.0 * target;
  p.c0 = target.squaredNorm();
  for (int i = 0; i < n; ++i) {
    Vector a = Vector::Zero(n);
    a[i] = 1.0;
    p.lin.push_back({a, 1.0});
    p.lin.push_back({-a, 1.0});  // -1 <= x_i <= 1
  }
  const auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  double expect = 0.0;
  for (int i = 0; i < n; ++i) {
    const double xi = std::clamp(target[i], -1.0, 1.0);
    expect += (xi - target[i]) * (xi - target[i]);
    CHECK(sol.x[i] == doctest::Approx(xi).epsilon(1e-5));
  }
  CHECK(sol.objective_value == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("projection onto a second-order cone matches the closed form") {
  // minimize ||(u, v) - (pu, pv)||^2 s.t. ||u|| <= v
  const int d = 3;
  std::mt19937_64 gen(11);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Vector pu(d);
    for (int i = 0; i < d; ++i) pu[i] = normal(gen);
    const double pv = normal(gen);

    ConvexSubproblem p;
    p.n_vars = d + 1;
    p.Q = Matrix::Identity(d + 1, d + 1);
    Vector full(d + 1);
    full.head(d) = pu;
    full[d] = pv;
    p.c = -2.0 * full;
    p.c0 = full.squaredNorm();
    SocConstraint sc;
    sc.A = Matrix::Zero(d, d + 1);
    sc.A.topLeftCorner(d, d).setIdentity();
    sc.b = Vector::Zero(d);
    sc.g = Vector::Zero(d + 1);
    sc.g[d] = 1.0;
    p.soc.push_back(sc);

    const auto sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);

    const double nu = pu.norm();
    Vector expect(d + 1);
    if (nu <= pv) {
      expect = full;
    } else if (nu <= -pv) {
      expect.setZero();
    } else {
      const double s = 0.5 * (nu + pv);
      expect.head(d) = (s / nu) * pu;
      expect[d] = s;
    }
    CHECK((sol.x - expect).norm() <= 1e-5 * (1.0 + expect.norm()));
  }
}

TEST_CASE("random strictly feasible QCQPs are never beaten by rejection sampling") {
  std::mt19937_64 gen(2718);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> box(-3.0, 3.0);
  for (int trial = 0; trial < 4; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 5);  // up to 6 vars
    ConvexSubproblem p;
    p.n_vars = n;
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = normal(gen);
    p.Q = a.transpose() * a / n + 0.1 * Matrix::Identity(n, n);
    p.c = Vector::Zero(n);
    for (int i = 0; i < n; ++i) p.c[i] = normal(gen);
    // Bounding box keeps the sampler simple.
    for (int i = 0; i < n; ++i) {
      Vector e = Vector::Zero(n);
      e[i] = 1.0;
      p.lin.push_back({e, 3.0});
      p.lin.push_back({-e, 3.0});
    }
    // Two random quadratic constraints, strictly feasible at a random anchor.
    Vector anchor(n);
    for (int i = 0; i < n; ++i) anchor[i] = 0.5 * normal(gen);
    for (int k = 0; k < 2; ++k) {
      Matrix b(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b(i, j) = normal(gen);
      QuadConstraint qc;
      qc.P = b.transpose() * b / n;
      qc.q = Vector(n);
      for (int i = 0; i < n; ++i) qc.q[i] = 0.3 * normal(gen);
      qc.r = -(anchor.dot(qc.P * anchor) + qc.q.dot(anchor)) - 0.5;
      p.quad.push_back(std::move(qc));
    }

    const auto sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(p.max_violation(sol.x) <= 1e-7);

    double best = std::numeric_limits<double>::infinity();
    Vector x(n);
    for (int s = 0; s < 100000; ++s) {
      for (int i = 0; i < n; ++i) x[i] = box(gen);
      if (p.max_violation(x) > 0.0) continue;
      best = std::min(best, p.objective(x));
    }
    CHECK(sol.objective_value <= best + 1e-6);
  }
}

TEST_CASE("equalities are eliminated exactly") {
  ConvexSubproblem p;
  p.n_vars = 2;
  p.Q = Matrix::Identity(2, 2);
  p.c = Vector::Zero(2);
  EqConstraint ec;
  ec.a = Vector::Ones(2);
  ec.b = 2.0;
  p.eq.push_back(ec);
  const auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.x[1] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(std::abs(sol.x.sum() - 2.0) <= 1e-9);
}

TEST_CASE("inconsistent equalities report infeasible") {
  ConvexSubproblem p;
  p.n_vars = 2;
  p.Q = Matrix::Identity(2, 2);
  p.eq.push_back({Vector::Ones(2), 2.0});
  p.eq.push_back({Vector::Ones(2), 3.0});
  CHECK(solve(p).status == SolveStatus::Infeasible);
}

TEST_CASE("boundary warm starts are accepted") {
  auto p = scalar_problem();
  p.Q = Matrix::Identity(1, 1);
  p.c = Vector::Zero(1);
  p.lin.push_back(lin1(-1.0, -1.0));  // x >= 1
  const auto sol = solve(p, {}, Vector::Constant(1, 1.0));  // start exactly on the constraint
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("identical inputs give identical outputs") {
  auto p = scalar_problem();
  p.n_vars = 3;
  p.Q = Matrix::Identity(3, 3);
  p.c = Vector::Constant(3, -1.0);
  for (int i = 0; i < 3; ++i) {
    Vector e = Vector::Zero(3);
    e[i] = 1.0;
    p.lin.push_back({e, 2.0});
    p.lin.push_back({-e, 0.0});
  }
  const auto a = solve(p);
  const auto b = solve(p);
  REQUIRE(a.status == SolveStatus::Optimal);
  CHECK(a.x == b.x);
  CHECK(a.objective_value == b.objective_value);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("merit is nonincreasing across accepted Newton steps") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = 4;
  ConvexSubproblem p;
  p.n_vars = n;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = normal(gen);
  p.Q = a.transpose() * a / n + 0.05 * Matrix::Identity(n, n);
  p.c = Vector::Constant(n, 0.3);
  for (int i = 0; i < n; ++i) {
    Vector e = Vector::Zero(n);
    e[i] = 1.0;
    p.lin.push_back({e, 1.5});
    p.lin.push_back({-e, 1.5});
  }
  const auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  for (const auto& stage : sol.merit_history)
    for (std::size_t k = 1; k < stage.size(); ++k)
      CHECK(stage[k] <= stage[k - 1] + 1e-12);
}
