#include "jsp/wsr.hpp"

#include "jsp/embedding.hpp"
#include "jsp/entropy.hpp"
#include "jsp/model.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace jsp::wsr {

namespace {

int wdim(const ProblemInstance& inst) {
  return embed::precoder_dim(inst.n_users(), inst.n_antennas());
}

}  // namespace

Vector WsrState::pack() const {
  const int n_users = static_cast<int>(W.cols());
  const int n_ant = static_cast<int>(W.rows());
  const int wd = embed::precoder_dim(n_users, n_ant);
  Vector x = embed::pack_precoder(W, wd + 2 * n_users);
  x.segment(wd, n_users) = eta;
  x.segment(wd + n_users, n_users) = zeta;
  return x;
}

WsrState WsrState::unpack(const Vector& x, int n_users, int n_antennas) {
  const int wd = embed::precoder_dim(n_users, n_antennas);
  WsrState s;
  s.W = embed::unpack_precoder(x, n_users, n_antennas);
  s.eta = x.segment(wd, n_users);
  s.zeta = x.segment(wd + n_users, n_users);
  return s;
}

double rx_power_over_slack(const ProblemInstance& inst, const CMatrix& W, double zeta_i,
                           int i) {
  if (!(zeta_i > 0.0)) throw std::invalid_argument("rx_power_over_slack: zeta must be positive");
  double total = inst.sigma2;
  for (int j = 0; j < W.cols(); ++j) total += std::norm(Complex(inst.H.row(i) * W.col(j)));
  return total / zeta_i;
}

Vector rx_power_over_slack_gradient(const ProblemInstance& inst, const CMatrix& W,
                                    double zeta_i, int i) {
  if (!(zeta_i > 0.0)) throw std::invalid_argument("rx_power_over_slack: zeta must be positive");
  const int n = inst.n_users();
  const int m = inst.n_antennas();
  const int wd = wdim(inst);
  Vector g = Vector::Zero(wd + 1);
  double total = inst.sigma2;
  for (int j = 0; j < n; ++j) {
    const Complex hw = inst.H.row(i) * W.col(j);
    total += std::norm(hw);
    const int off = embed::col_offset(j, m);
    // d|h^H w|^2 / dw in the real embedding: 2*(Re(hw)*a_re + Im(hw)*a_im)
    for (int k = 0; k < m; ++k) {
      const double p = inst.H(i, k).real();
      const double q = inst.H(i, k).imag();
      g[off + 2 * k] += 2.0 * (hw.real() * p + hw.imag() * q) / zeta_i;
      g[off + 2 * k + 1] += 2.0 * (hw.real() * -q + hw.imag() * p) / zeta_i;
    }
  }
  g[wd] = -total / (zeta_i * zeta_i);
  return g;
}

namespace {

// Tangent data of the entropy bonus sum lambda * P(eta) around eta_prev,
// written as linear part + constant for a minimization objective.
void entropy_tangent_min(const Vector& eta_prev, double lambda, int eta_off, Vector& c,
                         double& c0) {
  for (int i = 0; i < eta_prev.size(); ++i) {
    const double gp = entropy_penalty_grad(eta_prev[i]);
    c[eta_off + i] += -lambda * gp;
    c0 += lambda * (eta_prev[i] * gp - entropy_penalty(eta_prev[i]));
  }
}

Matrix cross_power_sum(const ProblemInstance& inst, int i, int n_total) {
  Matrix p = Matrix::Zero(n_total, n_total);
  for (int j = 0; j < inst.n_users(); ++j) {
    if (j == i) continue;
    embed::add_cross_power(p, inst.H, i, j);
  }
  return p;
}

// Users the iteration has driven to (eta, w) = (0, 0) stay there: the
// tangent of the coupling term blocks eta from rising once the precoder
// is zero, and their SINR rows hold identically on that face. Pinning
// them keeps the barrier away from zero-width slivers.
constexpr double kDropTol = 1e-7;

std::vector<char> dropped_users(const CMatrix& w, const Vector& eta) {
  std::vector<char> out(eta.size(), 0);
  for (int i = 0; i < eta.size(); ++i)
    out[i] = eta[i] <= kDropTol && w.col(i).squaredNorm() <= kDropTol;
  return out;
}

void pin_column(convex::ConvexSubproblem& prob, int col, int n_antennas, int n_total) {
  const int off = embed::col_offset(col, n_antennas);
  for (int k = 0; k < 2 * n_antennas; ++k) {
    Vector a = Vector::Zero(n_total);
    a[off + k] = 1.0;
    prob.eq.push_back({std::move(a), 0.0});
  }
}

}  // namespace

convex::ConvexSubproblem build_wsr_subproblem(const ProblemInstance& inst,
                                              const WsrState& state, double lambda1) {
  const int n_users = inst.n_users();
  const int m = inst.n_antennas();
  const int wd = wdim(inst);
  const int n = wd + 2 * n_users;
  const int eta_off = wd;
  const int zeta_off = wd + n_users;
  const Vector x0 = state.pack();

  convex::ConvexSubproblem prob;
  prob.n_vars = n;
  prob.c = Vector::Zero(n);
  const auto pinned = dropped_users(state.W, state.eta);

  for (int i = 0; i < n_users; ++i) {
    if (pinned[i]) continue;
    convex::LogTerm lt;
    lt.weight = inst.alpha[i];
    lt.a = Vector::Zero(n);
    lt.a[zeta_off + i] = 1.0;
    prob.log_terms.push_back(std::move(lt));
  }
  entropy_tangent_min(state.eta.cwiseMax(0.0).cwiseMin(1.0), lambda1, eta_off, prob.c,
                      prob.c0);

  // Box on eta and the cardinality budget.
  for (int i = 0; i < n_users; ++i) {
    if (pinned[i]) continue;
    Vector a = Vector::Zero(n);
    a[eta_off + i] = -1.0;
    prob.lin.push_back({a, 0.0});
    Vector b = Vector::Zero(n);
    b[eta_off + i] = 1.0;
    prob.lin.push_back({b, 1.0});
  }
  {
    Vector a = Vector::Zero(n);
    a.segment(eta_off, n_users).setOnes();
    prob.lin.push_back({a, static_cast<double>(m)});
  }
  // Slack floor: 1 + eta_i * eps_i <= zeta_i.
  for (int i = 0; i < n_users; ++i) {
    if (pinned[i]) continue;
    Vector a = Vector::Zero(n);
    a[eta_off + i] = inst.eps[i];
    a[zeta_off + i] = -1.0;
    prob.lin.push_back({a, -1.0});
  }
  // Per-user power caps and the total budget.
  for (int i = 0; i < n_users; ++i) {
    if (pinned[i]) continue;
    convex::QuadConstraint qc;
    qc.P = Matrix::Zero(n, n);
    embed::add_column_power(qc.P, i, m);
    qc.q = Vector::Zero(n);
    qc.q[eta_off + i] = -inst.p_total;
    prob.quad.push_back(std::move(qc));
  }
  {
    convex::QuadConstraint qc;
    qc.P = Matrix::Zero(n, n);
    for (int i = 0; i < n_users; ++i) embed::add_column_power(qc.P, i, m);
    qc.q = Vector::Zero(n);
    qc.r = -inst.p_total;
    prob.quad.push_back(std::move(qc));
  }
  // Linearized SINR-slack constraints; identically zero for pinned users.
  for (int i = 0; i < n_users; ++i) {
    if (pinned[i]) continue;
    const double zi = std::max(state.zeta[i], 1e-12);
    const double g0 = rx_power_over_slack(inst, state.W, zi, i);
    const Vector grad = rx_power_over_slack_gradient(inst, state.W, zi, i);
    Vector gfull = Vector::Zero(n);
    gfull.head(wd) = grad.head(wd);
    gfull[zeta_off + i] = grad[wd];
    convex::QuadConstraint qc;
    qc.P = cross_power_sum(inst, i, n);
    qc.q = -gfull;
    qc.r = inst.sigma2 - g0 + gfull.dot(x0);
    prob.quad.push_back(std::move(qc));
  }
  for (int i = 0; i < n_users; ++i) {
    if (!pinned[i]) continue;
    pin_column(prob, i, m, n);
    Vector a = Vector::Zero(n);
    a[eta_off + i] = 1.0;
    prob.eq.push_back({std::move(a), 0.0});
    Vector z = Vector::Zero(n);
    z[zeta_off + i] = 1.0;
    prob.eq.push_back({std::move(z), 1.0});
  }
  return prob;
}

namespace {

// Cone-feasibility program of the initial-point search: find W meeting
// the SINR targets eta_hat[i] * eps[i] under the per-user and total power
// caps. Users with a zero target carry only their power cap.
convex::ConvexSubproblem wsr_cone_problem(const ProblemInstance& inst, const Vector& eta_hat) {
  const int n_users = inst.n_users();
  const int m = inst.n_antennas();
  const int n = embed::precoder_dim(n_users, m);
  convex::ConvexSubproblem prob;
  prob.n_vars = n;
  const double sigma = std::sqrt(inst.sigma2);
  for (int i = 0; i < n_users; ++i) {
    convex::QuadConstraint qc;
    qc.P = Matrix::Zero(n, n);
    embed::add_column_power(qc.P, i, m);
    qc.q = Vector::Zero(n);
    qc.r = -eta_hat[i] * inst.p_total;
    prob.quad.push_back(std::move(qc));

    const double target = eta_hat[i] * inst.eps[i];
    if (target > 0.0) {
      const int rows = 1 + 2 * (n_users - 1);
      convex::SocConstraint sc;
      sc.A = Matrix::Zero(rows, n);
      sc.b = Vector::Zero(rows);
      sc.b[0] = sigma;
      int row = 1;
      for (int j = 0; j < n_users; ++j) {
        if (j == i) continue;
        sc.A.row(row++) = embed::re_functional(inst.H, i, j, n).transpose();
        sc.A.row(row++) = embed::im_functional(inst.H, i, j, n).transpose();
      }
      sc.g = embed::re_functional(inst.H, i, i, n) / std::sqrt(target);
      prob.soc.push_back(std::move(sc));
      prob.lin.push_back({-embed::re_functional(inst.H, i, i, n), 0.0});
      prob.eq.push_back({embed::im_functional(inst.H, i, i, n), 0.0});
    }
  }
  {
    convex::QuadConstraint qc;
    qc.P = Matrix::Identity(n, n);
    qc.q = Vector::Zero(n);
    qc.r = -inst.p_total;
    prob.quad.push_back(std::move(qc));
  }
  return prob;
}

// Slack chosen strictly between its floor and 1 + SINR.
Vector pick_zeta(const ProblemInstance& inst, const CMatrix& W, const Vector& eta_hat) {
  const int n_users = inst.n_users();
  Vector zeta(n_users);
  for (int i = 0; i < n_users; ++i) {
    const double lo = 1.0 + eta_hat[i] * inst.eps[i];
    const double hi = 1.0 + sinr(inst, W, i);
    zeta[i] = hi > lo ? 0.5 * (lo + hi) : lo;
  }
  return zeta;
}

}  // namespace

WsrState fip_wsr(const ProblemInstance& inst, Vector eta_hat, double delta, int max_scalings) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("fip_wsr: delta must be in (0,1)");
  const int n_users = inst.n_users();
  if (eta_hat.size() != n_users) throw std::invalid_argument("fip_wsr: bad eta_hat length");
  if ((eta_hat.array() < 0.0).any() || (eta_hat.array() > 1.0).any() ||
      eta_hat.sum() > inst.n_antennas() + 1e-12)
    throw std::invalid_argument("fip_wsr: eta_hat violates the scheduling constraints");

  for (int k = 0; k < max_scalings; ++k) {
    const auto prob = wsr_cone_problem(inst, eta_hat);
    const auto sol = convex::phase1_feasibility(prob);
    if (sol.status == convex::SolveStatus::Optimal) {
      WsrState s;
      s.W = embed::unpack_precoder(sol.x, n_users, inst.n_antennas());
      s.eta = eta_hat;
      s.zeta = pick_zeta(inst, s.W, eta_hat);
      return s;
    }
    eta_hat *= delta;
  }
  // Trivial fallback: nothing scheduled, unit slacks.
  WsrState s;
  s.W = CMatrix::Zero(inst.n_antennas(), n_users);
  s.eta = Vector::Zero(n_users);
  s.zeta = Vector::Ones(n_users);
  return s;
}

convex::ConvexSubproblem WsrAdapter::convexify(const Vector& state,
                                               const ccp::PenaltySchedule& penalties) const {
  const auto s = WsrState::unpack(state, inst_.n_users(), inst_.n_antennas());
  return build_wsr_subproblem(inst_, s, penalties.lambda1.value);
}

double WsrAdapter::objective(const Vector& state) const {
  const auto s = WsrState::unpack(state, inst_.n_users(), inst_.n_antennas());
  double v = 0.0;
  for (int i = 0; i < inst_.n_users(); ++i) v += inst_.alpha[i] * std::log(s.zeta[i]);
  return v;
}

double WsrAdapter::penalized_objective(const Vector& state,
                                       const ccp::PenaltySchedule& penalties) const {
  const auto s = WsrState::unpack(state, inst_.n_users(), inst_.n_antennas());
  double v = objective(state);
  for (int i = 0; i < inst_.n_users(); ++i)
    v += penalties.lambda1.value * entropy_penalty(s.eta[i]);
  return v;
}

double WsrAdapter::max_dc_violation(const Vector& state) const {
  const auto s = WsrState::unpack(state, inst_.n_users(), inst_.n_antennas());
  const int n_users = inst_.n_users();
  double worst = s.eta.sum() - inst_.n_antennas();
  worst = std::max(worst, total_power(s.W) - inst_.p_total);
  for (int i = 0; i < n_users; ++i) {
    worst = std::max(worst, -s.eta[i]);
    worst = std::max(worst, s.eta[i] - 1.0);
    worst = std::max(worst, s.W.col(i).squaredNorm() - inst_.p_total * s.eta[i]);
    worst = std::max(worst, 1.0 + s.eta[i] * inst_.eps[i] - s.zeta[i]);
    if (!(s.zeta[i] > 0.0)) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, interference(inst_, s.W, i) -
                                rx_power_over_slack(inst_, s.W, s.zeta[i], i));
  }
  return worst;
}

Vector WsrAdapter::eta_of(const Vector& state) const {
  return state.segment(wdim(inst_), inst_.n_users());
}

RunReport jsp_wsr(const ProblemInstance& inst, const ccp::PenaltySchedule& schedule,
                  double delta, int max_iters, const std::optional<Vector>& eta_hat,
                  const ccp::CcpOptions* opts_override) {
  inst.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int n_users = inst.n_users();
  const int m = inst.n_antennas();

  Vector eta0 = eta_hat.value_or(
      Vector::Constant(n_users, std::min(1.0, static_cast<double>(m) / n_users)));
  const WsrState start = fip_wsr(inst, eta0, 0.5);

  ccp::CcpOptions opts;
  if (opts_override) opts = *opts_override;
  opts.delta = delta;
  opts.max_iters = max_iters;

  WsrAdapter adapter(inst);
  RunReport rep;
  rep.algorithm = "jsp-wsr";
  rep.ccp = ccp::run_ccp(adapter, start.pack(), schedule, opts);
  rep.failed = rep.ccp.termination == ccp::CcpTermination::SubproblemFailure;
  if (rep.failed)
    rep.failure_reason = "subproblem " + convex::to_string(rep.ccp.last_solver_status);

  const auto fin = WsrState::unpack(rep.ccp.final_state, n_users, m);
  rep.eta = fin.eta;
  rep.schedule = schedule_from_eta(fin.eta);
  rep.W = fin.W;
  for (int i = 0; i < n_users; ++i) {
    const bool selected =
        std::find(rep.schedule.begin(), rep.schedule.end(), i) != rep.schedule.end();
    if (!selected) rep.W.col(i).setZero();
  }
  rep.total_power = total_power(rep.W);
  rep.metric = 0.0;
  rep.feasible = rep.total_power <= inst.p_total + 1e-6 * std::max(1.0, inst.p_total);
  for (int i : rep.schedule) {
    rep.metric += inst.alpha[i] * rate(inst, rep.W, i);
    if (sinr(inst, rep.W, i) < inst.eps[i] * (1.0 - 1e-4)) rep.feasible = false;
  }
  rep.max_violation = adapter.max_dc_violation(rep.ccp.final_state);
  rep.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// ---------------------------------------------------------------------------
// Frozen-subset precoding (scheduling pinned, used by benchmarks/oracles)

namespace {

ProblemInstance restrict_instance(const ProblemInstance& inst, const std::vector<int>& subset) {
  ProblemInstance sub;
  const int ns = static_cast<int>(subset.size());
  sub.H = CMatrix(ns, inst.n_antennas());
  sub.alpha = Vector(ns);
  sub.beta = Vector(ns);
  sub.eps = Vector(ns);
  for (int i = 0; i < ns; ++i) {
    sub.H.row(i) = inst.H.row(subset[i]);
    sub.alpha[i] = inst.alpha[subset[i]];
    sub.beta[i] = inst.beta[subset[i]];
    sub.eps[i] = inst.eps[subset[i]];
  }
  sub.sigma2 = inst.sigma2;
  sub.p_total = inst.p_total;
  return sub;
}

// State layout [precoders | zeta]; eta identically one.
class FixedSetWsrAdapter : public ccp::DcAdapter {
 public:
  explicit FixedSetWsrAdapter(const ProblemInstance& sub) : sub_(sub) {}

  convex::ConvexSubproblem convexify(const Vector& state,
                                     const ccp::PenaltySchedule&) const override {
    const int ns = sub_.n_users();
    const int wd = wdim(sub_);
    const int n = wd + ns;
    CMatrix w = embed::unpack_precoder(state, ns, sub_.n_antennas());
    Vector zeta = state.segment(wd, ns);

    convex::ConvexSubproblem prob;
    prob.n_vars = n;
    for (int i = 0; i < ns; ++i) {
      convex::LogTerm lt;
      lt.weight = sub_.alpha[i];
      lt.a = Vector::Zero(n);
      lt.a[wd + i] = 1.0;
      prob.log_terms.push_back(std::move(lt));
    }
    for (int i = 0; i < ns; ++i) {
      Vector a = Vector::Zero(n);
      a[wd + i] = -1.0;
      prob.lin.push_back({a, -(1.0 + sub_.eps[i])});

      convex::QuadConstraint cap;
      cap.P = Matrix::Zero(n, n);
      embed::add_column_power(cap.P, i, sub_.n_antennas());
      cap.q = Vector::Zero(n);
      cap.r = -sub_.p_total;
      prob.quad.push_back(std::move(cap));
    }
    {
      convex::QuadConstraint qc;
      qc.P = Matrix::Zero(n, n);
      for (int i = 0; i < ns; ++i) embed::add_column_power(qc.P, i, sub_.n_antennas());
      qc.q = Vector::Zero(n);
      qc.r = -sub_.p_total;
      prob.quad.push_back(std::move(qc));
    }
    for (int i = 0; i < ns; ++i) {
      const double g0 = rx_power_over_slack(sub_, w, zeta[i], i);
      const Vector grad = rx_power_over_slack_gradient(sub_, w, zeta[i], i);
      Vector gfull = Vector::Zero(n);
      gfull.head(wd) = grad.head(wd);
      gfull[wd + i] = grad[wd];
      convex::QuadConstraint qc;
      qc.P = cross_power_sum(sub_, i, n);
      qc.q = -gfull;
      qc.r = sub_.sigma2 - g0 + gfull.dot(state);
      prob.quad.push_back(std::move(qc));
    }
    return prob;
  }

  bool maximize() const override { return true; }

  double objective(const Vector& state) const override {
    const int wd = wdim(sub_);
    double v = 0.0;
    for (int i = 0; i < sub_.n_users(); ++i)
      v += sub_.alpha[i] * std::log(state[wd + i]);
    return v;
  }

  double penalized_objective(const Vector& state, const ccp::PenaltySchedule&) const override {
    return objective(state);
  }

  double max_dc_violation(const Vector& state) const override {
    const int ns = sub_.n_users();
    const int wd = wdim(sub_);
    CMatrix w = embed::unpack_precoder(state, ns, sub_.n_antennas());
    Vector zeta = state.segment(wd, ns);
    double worst = total_power(w) - sub_.p_total;
    for (int i = 0; i < ns; ++i) {
      worst = std::max(worst, w.col(i).squaredNorm() - sub_.p_total);
      worst = std::max(worst, 1.0 + sub_.eps[i] - zeta[i]);
      if (!(zeta[i] > 0.0)) return std::numeric_limits<double>::infinity();
      worst = std::max(worst,
                       interference(sub_, w, i) - rx_power_over_slack(sub_, w, zeta[i], i));
    }
    return worst;
  }

  Vector eta_of(const Vector&) const override { return Vector(); }

 private:
  const ProblemInstance& sub_;
};

}  // namespace

FixedSetWsrResult solve_fixed_set_wsr(const ProblemInstance& inst,
                                      const std::vector<int>& subset,
                                      const ccp::CcpOptions& opts,
                                      const std::optional<CMatrix>& w_start) {
  FixedSetWsrResult res;
  res.W = CMatrix::Zero(inst.n_antennas(), inst.n_users());
  if (subset.empty()) {
    res.feasible = true;
    return res;
  }
  const ProblemInstance sub = restrict_instance(inst, subset);
  const int ns = sub.n_users();

  CMatrix ws;
  if (w_start) {
    ws = CMatrix(sub.n_antennas(), ns);
    for (int i = 0; i < ns; ++i) ws.col(i) = w_start->col(subset[i]);
  } else {
    const auto cone = wsr_cone_problem(sub, Vector::Ones(ns));
    const auto sol = convex::phase1_feasibility(cone);
    if (sol.status != convex::SolveStatus::Optimal) return res;  // infeasible subset
    ws = embed::unpack_precoder(sol.x, ns, sub.n_antennas());
  }

  const int wd = wdim(sub);
  Vector state(wd + ns);
  state.head(wd) = embed::pack_precoder(ws, wd);
  state.segment(wd, ns) = pick_zeta(sub, ws, Vector::Ones(ns));

  FixedSetWsrAdapter adapter(sub);
  res.ccp = ccp::run_ccp(adapter, state, ccp::PenaltySchedule{}, opts);
  if (res.ccp.termination == ccp::CcpTermination::SubproblemFailure) return res;

  const CMatrix wfin = embed::unpack_precoder(res.ccp.final_state, ns, sub.n_antennas());
  for (int i = 0; i < ns; ++i) res.W.col(subset[i]) = wfin.col(i);
  res.feasible = true;
  res.wsr_bits = 0.0;
  for (int i : subset) res.wsr_bits += inst.alpha[i] * rate(inst, res.W, i);
  return res;
}

}  // namespace jsp::wsr
