#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jsp/ccp.hpp"

#include <cmath>

using namespace jsp;
using namespace jsp::ccp;

namespace {

// minimize x^4 - x^2, written as a DC program: the quartic goes through
// the epigraph chain x^2 <= v, v^2 <= u and the concave part -x^2 is
// linearized around the current iterate. State = (x, v, u).
class QuarticToy : public DcAdapter {
 public:
  convex::ConvexSubproblem convexify(const Vector& s, const PenaltySchedule&) const override {
    const double xk = s[0];
    convex::ConvexSubproblem p;
    p.n_vars = 3;
    p.c = Vector::Zero(3);
    p.c[0] = -2.0 * xk;
    p.c[2] = 1.0;
    p.c0 = xk * xk;
    convex::QuadConstraint c1;  // x^2 <= v
    c1.P = Matrix::Zero(3, 3);
    c1.P(0, 0) = 1.0;
    c1.q = Vector::Zero(3);
    c1.q[1] = -1.0;
    p.quad.push_back(std::move(c1));
    convex::QuadConstraint c2;  // v^2 <= u
    c2.P = Matrix::Zero(3, 3);
    c2.P(1, 1) = 1.0;
    c2.q = Vector::Zero(3);
    c2.q[2] = -1.0;
    p.quad.push_back(std::move(c2));
    return p;
  }
  bool maximize() const override { return false; }
  double objective(const Vector& s) const override {
    return std::pow(s[0], 4) - s[0] * s[0];
  }
  double penalized_objective(const Vector& s, const PenaltySchedule&) const override {
    return s[2] - s[0] * s[0];
  }
  double max_dc_violation(const Vector& s) const override {
    return std::max(s[0] * s[0] - s[1], s[1] * s[1] - s[2]);
  }
  Vector eta_of(const Vector&) const override { return Vector(); }
};

// Pure convex problem: minimize (x-3)^2 with x <= 10; no concave part, so
// the very first subproblem already is the full problem.
class PureConvexToy : public DcAdapter {
 public:
  convex::ConvexSubproblem convexify(const Vector&, const PenaltySchedule&) const override {
    convex::ConvexSubproblem p;
    p.n_vars = 1;
    p.Q = Matrix::Identity(1, 1);
    p.c = Vector::Constant(1, -6.0);
    p.c0 = 9.0;
    p.lin.push_back({Vector::Ones(1), 10.0});
    return p;
  }
  bool maximize() const override { return false; }
  double objective(const Vector& s) const override { return (s[0] - 3.0) * (s[0] - 3.0); }
  double penalized_objective(const Vector& s, const PenaltySchedule&) const override {
    return objective(s);
  }
  double max_dc_violation(const Vector& s) const override { return s[0] - 10.0; }
  Vector eta_of(const Vector&) const override { return Vector(); }
};

}  // namespace

TEST_CASE("penalty schedule advances multiplicatively with caps") {
  PenaltySchedule s;
  s.validate();
  CHECK(s.lambda1.value == doctest::Approx(0.5));
  s.advance();
  CHECK(s.lambda1.value == doctest::Approx(0.55));
  CHECK(s.lambda2.value == 0.0);
  CHECK(s.lambda3.value == 0.0);
  for (int k = 0; k < 29; ++k) s.advance();
  CHECK(s.omega.value == doctest::Approx(std::min(0.01 * std::pow(1.2, 30.0), 20.0)));
  CHECK(s.mu.value == doctest::Approx(std::min(0.01 * std::pow(1.2, 30.0), 20.0)));
  CHECK(s.lambda2.value == 0.0);
  for (int k = 0; k < 300; ++k) s.advance();
  CHECK(s.lambda1.value == doctest::Approx(10.0).epsilon(0.1));
  CHECK(s.lambda1.value <= 10.0 + 1e-12);
  CHECK(s.omega.value <= 20.0 + 1e-12);

  PenaltySchedule bad;
  bad.lambda1.growth = 0.9;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = PenaltySchedule{};
  bad.omega.cap = 0.001;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("quartic toy converges to the analytic stationary point") {
  QuarticToy toy;
  Vector x0(3);
  x0 << 1.0, 1.0, 1.0;
  CcpOptions opts;
  opts.delta = 1e-7;
  const auto rep = run_ccp(toy, x0, PenaltySchedule{}, opts);
  CHECK(rep.termination == CcpTermination::Converged);
  const double x_final = rep.final_state[0];
  CHECK(x_final == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-4));
  // Every iterate satisfies the epigraph constraints.
  for (const auto& it : rep.iterates) CHECK(it.max_dc_violation <= 1e-6);
  // Subproblem objective sequence is monotone nonincreasing (frozen penalties).
  for (std::size_t k = 1; k < rep.iterates.size(); ++k)
    CHECK(rep.iterates[k].subproblem_objective <=
          rep.iterates[k - 1].subproblem_objective + 1e-6);
  CHECK(rep.iterates.front().objective > rep.iterates.back().objective);
  CHECK(rep.wall_time_s >= 0.0);
}

TEST_CASE("pure convex adapter reaches the optimum in one update") {
  PureConvexToy toy;
  const auto rep = run_ccp(toy, Vector::Zero(1), PenaltySchedule{}, CcpOptions{});
  CHECK(rep.termination == CcpTermination::Converged);
  REQUIRE(rep.iterates.size() >= 2);
  // iterate 0 is the start; iterate 1 already sits at the optimum
  CHECK(rep.iterates[1].objective == doctest::Approx(0.0).epsilon(1e-5));
  CHECK(rep.final_state[0] == doctest::Approx(3.0).epsilon(1e-5));
}

TEST_CASE("tangency: subproblem objective at the expansion point equals the penalized objective") {
  QuarticToy toy;
  PenaltySchedule pen;
  for (double xv : {0.3, 0.9, 1.7}) {
    Vector s(3);
    s << xv, xv * xv, std::pow(xv, 4);
    const auto sub = toy.convexify(s, pen);
    CHECK(std::abs(sub.objective(s) - toy.penalized_objective(s, pen)) <= 1e-10);
  }
}

TEST_CASE("run_ccp rejects a nonpositive delta") {
  QuarticToy toy;
  Vector x0(3);
  x0 << 1.0, 1.0, 1.0;
  CcpOptions opts;
  opts.delta = 0.0;
  CHECK_THROWS_AS(run_ccp(toy, x0, PenaltySchedule{}, opts), std::invalid_argument);
}
