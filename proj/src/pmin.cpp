#include "jsp/pmin.hpp"

#include "jsp/embedding.hpp"
#include "jsp/entropy.hpp"
#include "jsp/model.hpp"
#include "jsp/socp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace jsp::pmin {

namespace {

int wdim(const ProblemInstance& inst) {
  return embed::precoder_dim(inst.n_users(), inst.n_antennas());
}

}  // namespace

Vector PminState::pack() const {
  const int n_users = static_cast<int>(W.cols());
  const int wd = embed::precoder_dim(n_users, static_cast<int>(W.rows()));
  Vector x = embed::pack_precoder(W, wd + n_users);
  x.segment(wd, n_users) = eta;
  return x;
}

PminState PminState::unpack(const Vector& x, int n_users, int n_antennas) {
  const int wd = embed::precoder_dim(n_users, n_antennas);
  PminState s;
  s.W = embed::unpack_precoder(x, n_users, n_antennas);
  s.eta = x.segment(wd, n_users);
  return s;
}

double threshold_ratio(const ProblemInstance& inst, const CMatrix& W, double eta_i, int i) {
  if (eta_i < 0.0) throw std::invalid_argument("threshold_ratio: eta must be nonnegative");
  double total = inst.sigma2;
  for (int j = 0; j < W.cols(); ++j) total += std::norm(Complex(inst.H.row(i) * W.col(j)));
  return total / (1.0 + inst.eps[i] * eta_i);
}

Vector threshold_ratio_gradient(const ProblemInstance& inst, const CMatrix& W, double eta_i,
                                int i) {
  if (eta_i < 0.0) throw std::invalid_argument("threshold_ratio: eta must be nonnegative");
  const int n = inst.n_users();
  const int m = inst.n_antennas();
  const int wd = wdim(inst);
  Vector g = Vector::Zero(wd + 1);
  const double den = 1.0 + inst.eps[i] * eta_i;
  double total = inst.sigma2;
  for (int j = 0; j < n; ++j) {
    const Complex hw = inst.H.row(i) * W.col(j);
    total += std::norm(hw);
    const int off = embed::col_offset(j, m);
    for (int k = 0; k < m; ++k) {
      const double p = inst.H(i, k).real();
      const double q = inst.H(i, k).imag();
      g[off + 2 * k] += 2.0 * (hw.real() * p + hw.imag() * q) / den;
      g[off + 2 * k + 1] += 2.0 * (hw.real() * -q + hw.imag() * p) / den;
    }
  }
  g[wd] = -total * inst.eps[i] / (den * den);
  return g;
}

namespace {

// Users at (eta, w) = (0, 0) are pinned; see the max-min chain for the
// reasoning.
constexpr double kDropTol = 1e-7;

std::vector<char> dropped_users(const CMatrix& w, const Vector& eta) {
  std::vector<char> out(eta.size(), 0);
  for (int i = 0; i < eta.size(); ++i)
    out[i] = eta[i] <= kDropTol && w.col(i).squaredNorm() <= kDropTol;
  return out;
}

}  // namespace

convex::ConvexSubproblem build_pmin_subproblem(const ProblemInstance& inst,
                                               const PminState& state, double lambda3,
                                               double mu, double upsilon) {
  const int n_users = inst.n_users();
  const int m = inst.n_antennas();
  const int wd = wdim(inst);
  const int n = wd + n_users;
  const int eta_off = wd;
  const Vector x0 = state.pack();
  const auto pinned = dropped_users(state.W, state.eta);

  convex::ConvexSubproblem prob;
  prob.n_vars = n;
  prob.c = Vector::Zero(n);

  prob.Q = Matrix::Zero(n, n);
  for (int i = 0; i < n_users; ++i) embed::add_column_power(prob.Q, i, m);
  prob.Q.block(eta_off, eta_off, n_users, n_users).setConstant(mu);
  prob.c.segment(eta_off, n_users).array() += -2.0 * m * mu;
  prob.c0 += mu * static_cast<double>(m) * m;

  for (int i = 0; i < n_users; ++i) {
    const double gp = entropy_penalty_grad(state.eta[i]);
    prob.c[eta_off + i] += -lambda3 * gp;
    prob.c0 += lambda3 * (state.eta[i] * gp - entropy_penalty(state.eta[i]));
  }

  for (int i = 0; i < n_users; ++i) {
    if (pinned[i]) continue;
    // Same per-iteration shrink bound as the max-min chain: guards the
    // weak-penalty phase against an irreversible collapse of the shares.
    const double floor = 0.5 * std::clamp(state.eta[i], 0.0, 1.0);
    Vector a = Vector::Zero(n);
    a[eta_off + i] = -1.0;
    prob.lin.push_back({a, -floor});
    Vector b = Vector::Zero(n);
    b[eta_off + i] = 1.0;
    prob.lin.push_back({b, 1.0});
  }
  for (int i = 0; i < n_users; ++i) {
    if (pinned[i]) continue;
    convex::QuadConstraint qc;
    qc.P = Matrix::Zero(n, n);
    embed::add_column_power(qc.P, i, m);
    qc.q = Vector::Zero(n);
    qc.q[eta_off + i] = -upsilon;
    prob.quad.push_back(std::move(qc));
  }
  for (int i = 0; i < n_users; ++i) {
    if (pinned[i]) continue;
    const double ei = std::max(0.0, state.eta[i]);
    const double f0 = threshold_ratio(inst, state.W, ei, i);
    const Vector grad = threshold_ratio_gradient(inst, state.W, ei, i);
    Vector gfull = Vector::Zero(n);
    gfull.head(wd) = grad.head(wd);
    gfull[eta_off + i] = grad[wd];
    convex::QuadConstraint qc;
    qc.P = Matrix::Zero(n, n);
    for (int j = 0; j < n_users; ++j) {
      if (j == i) continue;
      embed::add_cross_power(qc.P, inst.H, i, j);
    }
    qc.q = -gfull;
    qc.r = inst.sigma2 - f0 + gfull.dot(x0);
    prob.quad.push_back(std::move(qc));
  }
  for (int i = 0; i < n_users; ++i) {
    if (!pinned[i]) continue;
    const int off = embed::col_offset(i, m);
    for (int k = 0; k < 2 * m; ++k) {
      Vector a = Vector::Zero(n);
      a[off + k] = 1.0;
      prob.eq.push_back({std::move(a), 0.0});
    }
    Vector a = Vector::Zero(n);
    a[eta_off + i] = 1.0;
    prob.eq.push_back({std::move(a), 0.0});
  }
  return prob;
}

double default_upsilon(const ProblemInstance& inst) {
  double need = 0.0;
  for (int i = 0; i < inst.n_users(); ++i)
    need = std::max(need, inst.eps[i] * inst.sigma2 / inst.H.row(i).squaredNorm());
  return std::max(inst.p_total, 10.0 * inst.n_users() * need);
}

std::optional<PminState> fip_pmin(const ProblemInstance& inst, Vector eta_hat, double delta,
                                  double upsilon, int max_scalings) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("fip_pmin: delta must be in (0,1)");
  const int n_users = inst.n_users();
  if (eta_hat.size() != n_users) throw std::invalid_argument("fip_pmin: bad eta_hat length");
  std::vector<int> support;
  for (int i = 0; i < n_users; ++i) {
    if (eta_hat[i] > 0.0) support.push_back(i);
    if (eta_hat[i] < 0.0 || eta_hat[i] > 1.0)
      throw std::invalid_argument("fip_pmin: eta_hat out of [0,1]");
  }

  const int ns = static_cast<int>(support.size());
  for (int k = 0; k < max_scalings; ++k) {
    socp::PowerMinSpec spec;
    spec.users = support;
    spec.targets = Vector(ns);
    spec.power_caps = Vector(ns);
    for (int s = 0; s < ns; ++s) {
      const int u = support[s];
      spec.targets[s] = eta_hat[u] * inst.eps[u];
      spec.power_caps[s] = eta_hat[u] * upsilon;
    }
    const auto res = socp::fixed_support_power_min(inst, spec);
    if (res.feasible) {
      PminState state;
      state.W = res.W;
      state.eta = eta_hat;
      return state;
    }
    eta_hat *= delta;
  }
  return std::nullopt;
}

convex::ConvexSubproblem PminAdapter::convexify(const Vector& state,
                                                const ccp::PenaltySchedule& penalties) const {
  auto s = PminState::unpack(state, inst_.n_users(), inst_.n_antennas());
  // Expand around the clamped point when an iterate grazes the relaxed box.
  s.eta = s.eta.cwiseMax(0.0).cwiseMin(1.0);
  return build_pmin_subproblem(inst_, s, penalties.lambda3.value, penalties.mu.value,
                               upsilon_);
}

double PminAdapter::objective(const Vector& state) const {
  const auto s = PminState::unpack(state, inst_.n_users(), inst_.n_antennas());
  return total_power(s.W);
}

double PminAdapter::penalized_objective(const Vector& state,
                                        const ccp::PenaltySchedule& penalties) const {
  const auto s = PminState::unpack(state, inst_.n_users(), inst_.n_antennas());
  double v = total_power(s.W);
  for (int i = 0; i < inst_.n_users(); ++i)
    v -= penalties.lambda3.value * entropy_penalty(s.eta[i]);
  const double card = s.eta.sum() - inst_.n_antennas();
  v += penalties.mu.value * card * card;
  return v;
}

double PminAdapter::max_dc_violation(const Vector& state) const {
  const auto s = PminState::unpack(state, inst_.n_users(), inst_.n_antennas());
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < inst_.n_users(); ++i) {
    worst = std::max(worst, -s.eta[i]);
    worst = std::max(worst, s.eta[i] - 1.0);
    worst = std::max(worst, s.W.col(i).squaredNorm() - upsilon_ * s.eta[i]);
    worst = std::max(worst, interference(inst_, s.W, i) -
                                threshold_ratio(inst_, s.W, std::max(0.0, s.eta[i]), i));
  }
  return worst;
}

Vector PminAdapter::eta_of(const Vector& state) const {
  return state.segment(wdim(inst_), inst_.n_users());
}

RunReport jsp_pmin(const ProblemInstance& inst, const ccp::PenaltySchedule& schedule,
                   double delta, int max_iters, double upsilon,
                   const std::optional<Vector>& eta_hat,
                   const ccp::CcpOptions* opts_override) {
  inst.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int n_users = inst.n_users();
  const int m = inst.n_antennas();
  if (upsilon <= 0.0) upsilon = default_upsilon(inst);

  RunReport rep;
  rep.algorithm = "jsp-pmin";

  // Uniform fractional start with the exact cardinality mass (see the
  // max-min chain).
  const Vector eta0 =
      eta_hat.value_or(Vector::Constant(n_users, std::min(1.0, static_cast<double>(m) / n_users)));

  const auto start = fip_pmin(inst, eta0, 0.5, upsilon);
  if (!start) {
    rep.failed = true;
    rep.failure_reason = "no feasible initial point";
    rep.W = CMatrix::Zero(m, n_users);
    rep.eta = Vector::Zero(n_users);
    rep.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
  }

  ccp::CcpOptions opts;
  if (opts_override) opts = *opts_override;
  opts.delta = delta;
  opts.max_iters = max_iters;

  PminAdapter adapter(inst, upsilon);
  rep.ccp = ccp::run_ccp(adapter, start->pack(), schedule, opts);
  rep.failed = rep.ccp.termination == ccp::CcpTermination::SubproblemFailure;
  if (rep.failed)
    rep.failure_reason = "subproblem " + convex::to_string(rep.ccp.last_solver_status);

  const auto fin = PminState::unpack(rep.ccp.final_state, n_users, m);
  rep.eta = fin.eta;
  rep.schedule = schedule_from_eta(fin.eta);
  rep.W = fin.W;
  for (int i = 0; i < n_users; ++i) {
    const bool selected =
        std::find(rep.schedule.begin(), rep.schedule.end(), i) != rep.schedule.end();
    if (!selected) rep.W.col(i).setZero();
  }
  rep.max_violation = adapter.max_dc_violation(rep.ccp.final_state);

  // Final pass: exact minimum-power precoding for the rounded schedule
  // (the relaxed targets eps*eta sit just under the binary ones).
  bool polished = false;
  if (!rep.schedule.empty() && !rep.failed) {
    const auto fixed = solve_fixed_set_pmin(inst, rep.schedule);
    if (fixed.feasible) {
      rep.W = fixed.W;
      polished = true;
    }
  }
  rep.total_power = total_power(rep.W);
  rep.metric = rep.total_power;

  rep.feasible = polished && static_cast<int>(rep.schedule.size()) == std::min(m, n_users);
  for (int i : rep.schedule)
    if (sinr(inst, rep.W, i) < inst.eps[i] * (1.0 - 1e-4)) rep.feasible = false;
  rep.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

FixedSetPminResult solve_fixed_set_pmin(const ProblemInstance& inst,
                                        const std::vector<int>& subset) {
  FixedSetPminResult res;
  res.W = CMatrix::Zero(inst.n_antennas(), inst.n_users());
  if (subset.empty()) {
    res.feasible = true;
    return res;
  }
  socp::PowerMinSpec spec;
  spec.users = subset;
  spec.targets = Vector(static_cast<int>(subset.size()));
  for (std::size_t s = 0; s < subset.size(); ++s) spec.targets[s] = inst.eps[subset[s]];
  const auto sol = socp::fixed_support_power_min(inst, spec);
  res.feasible = sol.feasible;
  if (sol.feasible) {
    res.W = sol.W;
    res.power = sol.power;
  }
  return res;
}

}  // namespace jsp::pmin
