#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jsp/embedding.hpp"
#include "jsp/entropy.hpp"
#include "jsp/model.hpp"
#include "jsp/wsr.hpp"

#include <random>

using namespace jsp;
using namespace jsp::wsr;

namespace {

ProblemInstance random_instance(int n, int m, std::uint64_t seed, double eps = 1.0,
                                double p_total = 10.0) {
  ProblemInstance inst;
  inst.H = generate_channel(n, m, seed);
  inst.sigma2 = 1.0;
  inst.alpha = Vector::Ones(n);
  inst.beta = Vector::Ones(n);
  inst.eps = Vector::Constant(n, eps);
  inst.p_total = p_total;
  return inst;
}

}  // namespace

TEST_CASE("entropy penalty endpoints, symmetry point and gradient") {
  CHECK(entropy_penalty(0.0) == doctest::Approx(0.0));
  CHECK(entropy_penalty(1.0) == doctest::Approx(0.0));
  CHECK(entropy_penalty(0.5) == doctest::Approx(std::log(0.5)));
  CHECK(entropy_penalty_grad(0.5) == doctest::Approx(0.0));
  CHECK(entropy_penalty_grad(0.9) > 0.0);
  CHECK(entropy_penalty_grad(0.1) < 0.0);
  // clamped endpoints stay finite
  CHECK(std::isfinite(entropy_penalty_grad(0.0)));
  CHECK(std::isfinite(entropy_penalty_grad(1.0)));
  // gradient matches central differences away from the clamp
  for (double e : {0.2, 0.45, 0.7}) {
    const double h = 1e-6;
    const double fd = (entropy_penalty(e + h) - entropy_penalty(e - h)) / (2 * h);
    CHECK(entropy_penalty_grad(e) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("received-power-over-slack value on the hand case") {
  ProblemInstance inst = random_instance(1, 2, 1);
  inst.H(0, 0) = Complex(1, 0);
  inst.H(0, 1) = Complex(0, 0);
  CMatrix w = CMatrix::Zero(2, 1);
  w(0, 0) = Complex(1, 0);
  CHECK(rx_power_over_slack(inst, w, 2.0, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(rx_power_over_slack(inst, w, 0.0, 0), std::invalid_argument);
  // G decreases monotonically to 0 as the slack grows
  double prev = rx_power_over_slack(inst, w, 1.0, 0);
  for (double z : {2.0, 8.0, 64.0, 1e6}) {
    const double cur = rx_power_over_slack(inst, w, z, 0);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(prev < 1e-5);
}

TEST_CASE("received-power-over-slack gradient matches central differences") {
  std::mt19937_64 seeds(99);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3, m = 2;
    auto inst = random_instance(n, m, seeds());
    CMatrix w = generate_channel(m, n, seeds());
    const double zeta = 1.0 + (seeds() % 1000) / 250.0;
    const int i = static_cast<int>(seeds() % n);
    const int wd = embed::precoder_dim(n, m);

    const Vector grad = rx_power_over_slack_gradient(inst, w, zeta, i);
    Vector x = embed::pack_precoder(w, wd + 1);
    x[wd] = zeta;
    auto eval = [&](const Vector& v) {
      return rx_power_over_slack(inst, embed::unpack_precoder(v, n, m), v[wd], i);
    };
    for (int k = 0; k < wd + 1; ++k) {
      const double h = 1e-6 * std::max(1.0, std::abs(x[k]));
      Vector xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      const double fd = (eval(xp) - eval(xm)) / (2 * h);
      CHECK(grad[k] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("slack constraint is equivalent to the SINR bound in both directions") {
  std::mt19937_64 seeds(123);
  int checked = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 3, m = 2;
    auto inst = random_instance(n, m, seeds());
    CMatrix w = generate_channel(m, n, seeds());
    const double zeta = 0.05 + (seeds() % 1000) / 300.0;
    const int i = static_cast<int>(seeds() % n);
    const double lhs = interference(inst, w, i) - rx_power_over_slack(inst, w, zeta, i);
    const double rhs = zeta - (1.0 + sinr(inst, w, i));
    if (lhs <= 0.0) CHECK(rhs <= 1e-9 * std::max(1.0, std::abs(zeta)));
    if (rhs <= 0.0) CHECK(lhs <= 1e-9 * std::max(1.0, interference(inst, w, i)));
    ++checked;
  }
  CHECK(checked == 2000);
}

TEST_CASE("subproblem is tangent-exact and has the documented size") {
  auto inst = random_instance(3, 2, 7);
  WsrState s;
  s.eta = Vector::Constant(3, 2.0 / 3.0);
  s.W = 0.3 * generate_channel(2, 3, 8);
  s.zeta = Vector::Constant(3, 1.2);
  // make the state feasible: scale precoders into the per-user caps
  for (int i = 0; i < 3; ++i) {
    const double cap = inst.p_total * s.eta[i];
    const double nrm = s.W.col(i).squaredNorm();
    if (nrm > cap) s.W.col(i) *= std::sqrt(0.9 * cap / nrm);
    s.zeta[i] = 0.5 * (1.0 + s.eta[i] * inst.eps[i] + 1.0 + sinr(inst, s.W, i));
  }
  const auto sub = build_wsr_subproblem(inst, s, 0.5);
  CHECK(sub.n_vars == 2 * 3 * 2 + 2 * 3);
  sub.validate();
  const Vector x0 = s.pack();

  // Linearized SINR rows evaluate exactly to I_i - G_i at the expansion point.
  const int n_quad = static_cast<int>(sub.quad.size());
  for (int i = 0; i < 3; ++i) {
    const auto& qc = sub.quad[n_quad - 3 + i];
    const double lin_val = x0.dot(qc.P * x0) + qc.q.dot(x0) + qc.r;
    const double dc_val =
        interference(inst, s.W, i) - rx_power_over_slack(inst, s.W, s.zeta[i], i);
    CHECK(lin_val == doctest::Approx(dc_val).epsilon(1e-10));
  }

  // The subproblem objective at the expansion point equals the penalized
  // objective (tangency of the entropy term).
  WsrAdapter adapter(inst);
  ccp::PenaltySchedule pen;
  CHECK(std::abs(sub.objective(x0) - -adapter.penalized_objective(x0, pen)) <= 1e-10);
}

TEST_CASE("all-zero state keeps the subproblem feasible") {
  auto inst = random_instance(3, 2, 21);
  WsrState s;
  s.W = CMatrix::Zero(2, 3);
  s.eta = Vector::Zero(3);
  s.zeta = Vector::Ones(3);
  const auto sub = build_wsr_subproblem(inst, s, 0.5);
  CHECK(sub.max_violation(s.pack()) <= 1e-12);
}

TEST_CASE("initial point search accepts the trivial all-zero request") {
  auto inst = random_instance(3, 2, 31);
  const auto s = fip_wsr(inst, Vector::Zero(3), 0.5);
  CHECK(s.W.norm() == 0.0);
  CHECK(s.eta.norm() == 0.0);
  CHECK((s.zeta.array() == 1.0).all());
  WsrAdapter adapter(inst);
  CHECK(adapter.max_dc_violation(s.pack()) <= 1e-9);
}

TEST_CASE("single-user initial point satisfies every constraint") {
  ProblemInstance inst = random_instance(1, 2, 41, /*eps=*/1.0, /*p_total=*/4.0);
  inst.H(0, 0) = Complex(1, 0);
  inst.H(0, 1) = Complex(0, 0);
  const auto s = fip_wsr(inst, Vector::Ones(1), 0.5);
  CHECK(s.W.norm() > 0.0);
  CHECK(sinr(inst, s.W, 0) >= 1.0 - 1e-7);
  WsrAdapter adapter(inst);
  CHECK(adapter.max_dc_violation(s.pack()) <= 1e-7);
}

TEST_CASE("initial point stays feasible across random seeds") {
  std::mt19937_64 seeds(5150);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = random_instance(4, 2, seeds(), /*eps=*/1.5);
    const auto s =
        fip_wsr(inst, Vector::Constant(4, 0.5), 0.5);
    WsrAdapter adapter(inst);
    CHECK(adapter.max_dc_violation(s.pack()) <= 1e-7);
  }
}

TEST_CASE("single-user joint run schedules the user at full power") {
  ProblemInstance inst;
  inst.H = CMatrix::Constant(1, 1, Complex(1, 0));
  inst.sigma2 = 1.0;
  inst.alpha = Vector::Ones(1);
  inst.beta = Vector::Ones(1);
  inst.eps = Vector::Ones(1);
  inst.p_total = 10.0;
  const auto rep = jsp_wsr(inst, ccp::PenaltySchedule{});
  CHECK(!rep.failed);
  REQUIRE(rep.schedule == std::vector<int>{0});
  CHECK(rep.total_power == doctest::Approx(10.0).epsilon(1e-3));
  CHECK(rep.metric == doctest::Approx(std::log2(11.0)).epsilon(1e-3));
  CHECK(rep.feasible);
}

TEST_CASE("small joint run terminates near-binary and feasible") {
  auto inst = random_instance(3, 2, 77, /*eps=*/1.0);
  const auto rep = jsp_wsr(inst, ccp::PenaltySchedule{});
  CHECK(!rep.failed);
  CHECK(static_cast<int>(rep.schedule.size()) <= 2);
  for (int i = 0; i < 3; ++i)
    CHECK(std::min(rep.eta[i], 1.0 - rep.eta[i]) <= 1e-2);
  CHECK(rep.feasible);
  for (int i : rep.schedule) CHECK(sinr(inst, rep.W, i) >= inst.eps[i] * (1 - 1e-4));
  CHECK(rep.total_power <= inst.p_total + 1e-6 * inst.p_total);
  // every CCP iterate satisfied the relaxed-program constraints
  for (const auto& it : rep.ccp.iterates) CHECK(it.max_dc_violation <= 1e-6);
}

TEST_CASE("fixed-subset precoding matches the joint run on a single user") {
  ProblemInstance inst;
  inst.H = CMatrix::Constant(1, 1, Complex(1, 0));
  inst.sigma2 = 1.0;
  inst.alpha = Vector::Ones(1);
  inst.beta = Vector::Ones(1);
  inst.eps = Vector::Ones(1);
  inst.p_total = 10.0;
  const auto res = solve_fixed_set_wsr(inst, {0}, ccp::CcpOptions{});
  REQUIRE(res.feasible);
  CHECK(res.wsr_bits == doctest::Approx(std::log2(11.0)).epsilon(1e-3));
}
