#include "jsp/mmsinr.hpp"

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

namespace jsp::mm {

namespace {

int wdim(const ProblemInstance& inst) {
  return embed::precoder_dim(inst.n_users(), inst.n_antennas());
}

}  // namespace

Vector MmState::pack() const {
  const int n_users = static_cast<int>(W.cols());
  const int wd = embed::precoder_dim(n_users, static_cast<int>(W.rows()));
  Vector x = embed::pack_precoder(W, wd + n_users + 1);
  x.segment(wd, n_users) = eta;
  x[wd + n_users] = t;
  return x;
}

MmState MmState::unpack(const Vector& x, int n_users, int n_antennas) {
  const int wd = embed::precoder_dim(n_users, n_antennas);
  MmState s;
  s.W = embed::unpack_precoder(x, n_users, n_antennas);
  s.eta = x.segment(wd, n_users);
  s.t = x[wd + n_users];
  return s;
}

MmDcTerms mm_dc_terms(const ProblemInstance& inst, const CMatrix& W, double eta_i, double t,
                      int i) {
  if (!(t > 0.0)) throw std::invalid_argument("mm_dc_terms: t must be positive");
  if (eta_i < 0.0) throw std::invalid_argument("mm_dc_terms: eta must be nonnegative");
  const int n = inst.n_users();
  const int m = inst.n_antennas();
  const int wd = wdim(inst);
  const int eta_idx = wd;
  const int t_idx = wd + 1;

  MmDcTerms out;
  out.interference_ratio_grad = Vector::Zero(wd + 2);
  out.coupled_ratio_grad = Vector::Zero(wd + 2);
  out.threshold_ratio_grad = Vector::Zero(wd + 2);

  double interf = inst.sigma2;  // I_i
  double coupled = 0.0;         // beta_i |h_i^H w_i|^2
  const double den_h = t + eta_i;
  const double den_j = 1.0 + eta_i * inst.eps[i];
  for (int j = 0; j < n; ++j) {
    const Complex hw = inst.H.row(i) * W.col(j);
    const double scale = (j == i) ? inst.beta[i] : 1.0;
    if (j == i)
      coupled = inst.beta[i] * std::norm(hw);
    else
      interf += std::norm(hw);
    const int off = embed::col_offset(j, m);
    for (int k = 0; k < m; ++k) {
      const double p = inst.H(i, k).real();
      const double q = inst.H(i, k).imag();
      const double dre = 2.0 * (hw.real() * p + hw.imag() * q);
      const double dim = 2.0 * (hw.real() * -q + hw.imag() * p);
      if (j != i) {
        out.interference_ratio_grad[off + 2 * k] += dre / t;
        out.interference_ratio_grad[off + 2 * k + 1] += dim / t;
      }
      out.coupled_ratio_grad[off + 2 * k] += scale * dre / den_h;
      out.coupled_ratio_grad[off + 2 * k + 1] += scale * dim / den_h;
      out.threshold_ratio_grad[off + 2 * k] += scale * dre / den_j;
      out.threshold_ratio_grad[off + 2 * k + 1] += scale * dim / den_j;
    }
  }
  const double s_total = interf + coupled;
  out.interference_ratio = interf / t;
  out.coupled_ratio = s_total / den_h;
  out.threshold_ratio = s_total / den_j;
  out.interference_ratio_grad[t_idx] = -interf / (t * t);
  out.coupled_ratio_grad[eta_idx] = -s_total / (den_h * den_h);
  out.coupled_ratio_grad[t_idx] = -s_total / (den_h * den_h);
  out.threshold_ratio_grad[eta_idx] = -s_total * inst.eps[i] / (den_j * den_j);
  return out;
}

namespace {

// Same convention as the sum-rate chain: once a user reaches
// (eta, w) = (0, 0) its SINR rows hold identically and the tangent blocks
// any revival, so the variables are pinned instead of left to pinch the
// barrier.
constexpr double kDropTol = 1e-7;

std::vector<char> dropped_users(const CMatrix& w, const Vector& eta) {
  std::vector<char> out(eta.size(), 0);
  for (int i = 0; i < eta.size(); ++i)
    out[i] = eta[i] <= kDropTol && w.col(i).squaredNorm() <= kDropTol;
  return out;
}

void pin_user(convex::ConvexSubproblem& prob, int col, int n_antennas, int eta_off, int n) {
  const int off = embed::col_offset(col, n_antennas);
  for (int k = 0; k < 2 * n_antennas; ++k) {
    Vector a = Vector::Zero(n);
    a[off + k] = 1.0;
    prob.eq.push_back({std::move(a), 0.0});
  }
  Vector a = Vector::Zero(n);
  a[eta_off + col] = 1.0;
  prob.eq.push_back({std::move(a), 0.0});
}

}  // namespace

convex::ConvexSubproblem build_mm_subproblem(const ProblemInstance& inst, const MmState& state,
                                             double lambda2, double omega) {
  const int n_users = inst.n_users();
  const int m = inst.n_antennas();
  const int wd = wdim(inst);
  const int n = wd + n_users + 1;
  const int eta_off = wd;
  const int t_idx = wd + n_users;
  const Vector x0 = state.pack();
  const auto pinned = dropped_users(state.W, state.eta);

  convex::ConvexSubproblem prob;
  prob.n_vars = n;
  prob.c = Vector::Zero(n);
  prob.c[t_idx] = 1.0;

  // Exact-cardinality quadratic penalty omega * (sum eta - M)^2.
  prob.Q = Matrix::Zero(n, n);
  prob.Q.block(eta_off, eta_off, n_users, n_users).setConstant(omega);
  prob.c.segment(eta_off, n_users).array() += -2.0 * m * omega;
  prob.c0 += omega * static_cast<double>(m) * m;

  for (int i = 0; i < n_users; ++i) {
    const double gp = entropy_penalty_grad(state.eta[i]);
    prob.c[eta_off + i] += -lambda2 * gp;
    prob.c0 += lambda2 * (state.eta[i] * gp - entropy_penalty(state.eta[i]));
  }

  for (int i = 0; i < n_users; ++i) {
    if (pinned[i]) continue;
    // A share may at most halve per iteration (the initial-point search
    // uses the same shrink factor); without the floor the weak early
    // cardinality penalty lets shares free-fall to zero, from where the
    // vanishing coupling tangent cannot bring them back.
    const double floor = 0.5 * std::clamp(state.eta[i], 0.0, 1.0);
    Vector a = Vector::Zero(n);
    a[eta_off + i] = -1.0;
    prob.lin.push_back({a, -floor});
    Vector b = Vector::Zero(n);
    b[eta_off + i] = 1.0;
    prob.lin.push_back({b, 1.0});
  }
  {
    Vector a = Vector::Zero(n);
    a[t_idx] = -1.0;
    prob.lin.push_back({a, -kTMin});
  }
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

  const double sigma = std::sqrt(inst.sigma2);
  for (int i = 0; i < n_users; ++i) {
    if (pinned[i]) continue;
    const auto dc = mm_dc_terms(inst, state.W, std::max(0.0, state.eta[i]), state.t, i);
    auto lift = [&](const Vector& g) {
      Vector full = Vector::Zero(n);
      full.head(wd) = g.head(wd);
      full[eta_off + i] = g[wd];
      full[t_idx] = g[wd + 1];
      return full;
    };

    // C5: I_i(W) - J~_i <= 0 with the threshold ratio minorized.
    {
      const Vector jg = lift(dc.threshold_ratio_grad);
      convex::QuadConstraint qc;
      qc.P = Matrix::Zero(n, n);
      for (int j = 0; j < n_users; ++j) {
        if (j == i) continue;
        embed::add_cross_power(qc.P, inst.H, i, j);
      }
      qc.q = -jg;
      qc.r = inst.sigma2 - dc.threshold_ratio + jg.dot(x0);
      prob.quad.push_back(std::move(qc));
    }
    // C6: I_i(W)/t - H~_i <= 0, written as the rotated cone
    // I_i(W) <= t * H~_i with both factors affine.
    {
      const Vector hg = lift(dc.coupled_ratio_grad);
      const double h0 = dc.coupled_ratio - hg.dot(x0);  // H~(x) = hg.x + h0
      // Rows are scaled up by the cone magnitude over t at the expansion
      // point so the solver's interior margin translates to a
      // margin-sized slack of the epigraph inequality itself.
      const double scale = std::max(1.0, (state.t + dc.coupled_ratio) / state.t);
      const int rows = 2 + 2 * (n_users - 1);
      convex::SocConstraint sc;
      sc.A = Matrix::Zero(rows, n);
      sc.b = Vector::Zero(rows);
      sc.b[0] = 2.0 * sigma * scale;
      int row = 1;
      for (int j = 0; j < n_users; ++j) {
        if (j == i) continue;
        sc.A.row(row++) = 2.0 * scale * embed::re_functional(inst.H, i, j, n).transpose();
        sc.A.row(row++) = 2.0 * scale * embed::im_functional(inst.H, i, j, n).transpose();
      }
      Vector et = Vector::Zero(n);
      et[t_idx] = 1.0;
      sc.A.row(row) = scale * (et - hg).transpose();
      sc.b[row] = -h0 * scale;
      sc.g = scale * (et + hg);
      sc.f = h0 * scale;
      prob.soc.push_back(std::move(sc));
    }
  }
  for (int i = 0; i < n_users; ++i)
    if (pinned[i]) pin_user(prob, i, m, eta_off, n);
  return prob;
}

std::optional<MmState> fip_mm(const ProblemInstance& inst, Vector eta_hat, double delta,
                              int max_scalings) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("fip_mm: delta must be in (0,1)");
  const int n_users = inst.n_users();
  if (eta_hat.size() != n_users) throw std::invalid_argument("fip_mm: bad eta_hat length");
  std::vector<int> support;
  for (int i = 0; i < n_users; ++i) {
    if (eta_hat[i] > 0.0) support.push_back(i);
    if (eta_hat[i] < 0.0 || eta_hat[i] > 1.0)
      throw std::invalid_argument("fip_mm: eta_hat out of [0,1]");
  }
  const int ns = static_cast<int>(support.size());
  for (int k = 0; k < max_scalings; ++k) {
    socp::PowerMinSpec spec;
    spec.users = support;
    spec.targets = Vector(ns);
    spec.power_caps = Vector(ns);
    for (int s = 0; s < ns; ++s) {
      const int u = support[s];
      // Scheduled users need strictly positive SINR for the epigraph
      // constraint, even with a zero threshold.
      spec.targets[s] = std::max(eta_hat[u] * inst.eps[u], 1e-6) / inst.beta[u];
      spec.power_caps[s] = eta_hat[u] * inst.p_total;
    }
    spec.total_cap = inst.p_total;
    const auto res = socp::fixed_support_power_min(inst, spec);
    if (res.feasible) {
      MmState state;
      state.W = res.W;
      state.eta = eta_hat;
      // Use the whole budget: uniform scaling never lowers any SINR.
      double c2 = res.power > 0.0 ? inst.p_total / res.power : 1.0;
      for (int s = 0; s < ns; ++s) {
        const double nrm = state.W.col(support[s]).squaredNorm();
        if (nrm > 0.0) c2 = std::min(c2, spec.power_caps[s] / nrm);
      }
      if (c2 > 1.0) state.W *= std::sqrt(c2);

      double t0_num = std::numeric_limits<double>::infinity();
      double t_floor = kTMin * 10.0;
      for (int u : support) {
        if (eta_hat[u] * inst.eps[u] > 0.0)
          t0_num = std::min(t0_num, eta_hat[u] * inst.eps[u]);
        const double wsinr = inst.beta[u] * sinr(inst, state.W, u);
        t_floor = std::max(t_floor, eta_hat[u] / wsinr * (1.0 + 1e-9));
      }
      state.t = std::isfinite(t0_num) ? std::max(1.0 / t0_num, t_floor) : t_floor;
      return state;
    }
    eta_hat *= delta;
  }
  return std::nullopt;
}

convex::ConvexSubproblem MmAdapter::convexify(const Vector& state,
                                              const ccp::PenaltySchedule& penalties) const {
  auto s = MmState::unpack(state, inst_.n_users(), inst_.n_antennas());
  // Iterates may graze the relaxed box; expand around the clamped point
  // (a tangent taken anywhere still minorizes the convex terms).
  s.eta = s.eta.cwiseMax(0.0).cwiseMin(1.0);
  s.t = std::max(s.t, kTMin);
  return build_mm_subproblem(inst_, s, penalties.lambda2.value, penalties.omega.value);
}

double MmAdapter::objective(const Vector& state) const {
  return state[state.size() - 1];  // t
}

double MmAdapter::penalized_objective(const Vector& state,
                                      const ccp::PenaltySchedule& penalties) const {
  const auto s = MmState::unpack(state, inst_.n_users(), inst_.n_antennas());
  double v = s.t;
  for (int i = 0; i < inst_.n_users(); ++i)
    v -= penalties.lambda2.value * entropy_penalty(s.eta[i]);
  const double card = s.eta.sum() - inst_.n_antennas();
  v += penalties.omega.value * card * card;
  return v;
}

double MmAdapter::max_dc_violation(const Vector& state) const {
  const auto s = MmState::unpack(state, inst_.n_users(), inst_.n_antennas());
  if (!(s.t > 0.0)) return std::numeric_limits<double>::infinity();
  double worst = total_power(s.W) - inst_.p_total;
  worst = std::max(worst, kTMin - s.t);
  for (int i = 0; i < inst_.n_users(); ++i) {
    worst = std::max(worst, -s.eta[i]);
    worst = std::max(worst, s.eta[i] - 1.0);
    worst = std::max(worst, s.W.col(i).squaredNorm() - inst_.p_total * s.eta[i]);
    const auto dc = mm_dc_terms(inst_, s.W, std::max(0.0, s.eta[i]), s.t, i);
    worst = std::max(worst, dc.interference_ratio * s.t - dc.threshold_ratio);  // I_i - J_i
    worst = std::max(worst, dc.interference_ratio - dc.coupled_ratio);          // L_i - H_i
  }
  return worst;
}

Vector MmAdapter::eta_of(const Vector& state) const {
  return state.segment(wdim(inst_), inst_.n_users());
}

RunReport jsp_mmsinr(const ProblemInstance& inst_in, const ccp::PenaltySchedule& schedule,
                     double delta, int max_iters, const std::optional<Vector>& eta_hat,
                     const ccp::CcpOptions* opts_override) {
  inst_in.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int n_users = inst_in.n_users();
  const int m = inst_in.n_antennas();

  // Standardize the weight scale: (beta, eps) -> (beta/c, eps/c) is the
  // same problem with t scaled by c, but the cardinality penalty is
  // absolute, so without this a uniform reweighting could tilt the path.
  const double wscale = inst_in.beta.mean();
  ProblemInstance inst = inst_in;
  inst.beta /= wscale;
  inst.eps /= wscale;

  RunReport rep;
  rep.algorithm = "jsp-mmsinr";

  // Uniform fractional start with the exact cardinality mass: serving
  // every user a small share lets the iteration trade scheduling mass
  // freely (zero-precoder users can never re-enter).
  const Vector eta0 =
      eta_hat.value_or(Vector::Constant(n_users, std::min(1.0, static_cast<double>(m) / n_users)));

  const auto start = fip_mm(inst, eta0, 0.5);
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

  MmAdapter adapter(inst);
  rep.ccp = ccp::run_ccp(adapter, start->pack(), schedule, opts);
  rep.failed = rep.ccp.termination == ccp::CcpTermination::SubproblemFailure;
  if (rep.failed)
    rep.failure_reason = "subproblem " + convex::to_string(rep.ccp.last_solver_status);

  const auto fin = MmState::unpack(rep.ccp.final_state, n_users, m);
  rep.eta = fin.eta;
  rep.schedule = schedule_from_eta(fin.eta);
  rep.W = fin.W;
  for (int i = 0; i < n_users; ++i) {
    const bool selected =
        std::find(rep.schedule.begin(), rep.schedule.end(), i) != rep.schedule.end();
    if (!selected) rep.W.col(i).setZero();
  }
  rep.metric = wscale / fin.t;
  rep.max_violation = adapter.max_dc_violation(rep.ccp.final_state);

  // The capped cardinality penalty leaves eta a hair below one, so the
  // relaxed precoders undershoot the binary-schedule targets; the final
  // precoding pass re-solves the rounded schedule exactly.
  bool polished = false;
  if (!rep.schedule.empty() && !rep.failed) {
    const auto fixed = solve_fixed_set_mm(inst, rep.schedule, opts);
    if (fixed.feasible) {
      rep.W = fixed.W;
      rep.metric = wscale * fixed.msinr;
      polished = true;
    }
  }
  rep.total_power = total_power(rep.W);

  rep.feasible = polished &&
                 static_cast<int>(rep.schedule.size()) == std::min(m, n_users) &&
                 rep.total_power <= inst_in.p_total + 1e-6 * std::max(1.0, inst_in.p_total);
  double min_wsinr = std::numeric_limits<double>::infinity();
  for (int i : rep.schedule) {
    const double wsinr = inst_in.beta[i] * sinr(inst_in, rep.W, i);
    min_wsinr = std::min(min_wsinr, wsinr);
    if (wsinr < inst_in.eps[i] * (1.0 - 1e-4)) rep.feasible = false;
  }
  if (!rep.schedule.empty() && rep.metric > min_wsinr * (1.0 + 1e-3) + 1e-9)
    rep.feasible = false;  // epigraph value must be achieved by the precoders
  rep.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// ---------------------------------------------------------------------------
// Frozen-subset max-min precoding

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

// State layout [precoders | t]; eta identically one.
class FixedSetMmAdapter : public ccp::DcAdapter {
 public:
  explicit FixedSetMmAdapter(const ProblemInstance& sub) : sub_(sub) {}

  convex::ConvexSubproblem convexify(const Vector& state,
                                     const ccp::PenaltySchedule&) const override {
    const int ns = sub_.n_users();
    const int m = sub_.n_antennas();
    const int wd = embed::precoder_dim(ns, m);
    const int n = wd + 1;
    const int t_idx = wd;
    const CMatrix w = embed::unpack_precoder(state, ns, m);
    const double t = state[t_idx];

    convex::ConvexSubproblem prob;
    prob.n_vars = n;
    prob.c = Vector::Zero(n);
    prob.c[t_idx] = 1.0;
    {
      Vector a = Vector::Zero(n);
      a[t_idx] = -1.0;
      prob.lin.push_back({a, -kTMin});
    }
    for (int i = 0; i < ns; ++i) {
      convex::QuadConstraint qc;
      qc.P = Matrix::Zero(n, n);
      embed::add_column_power(qc.P, i, m);
      qc.q = Vector::Zero(n);
      qc.r = -sub_.p_total;
      prob.quad.push_back(std::move(qc));
    }
    {
      convex::QuadConstraint qc;
      qc.P = Matrix::Zero(n, n);
      for (int i = 0; i < ns; ++i) embed::add_column_power(qc.P, i, m);
      qc.q = Vector::Zero(n);
      qc.r = -sub_.p_total;
      prob.quad.push_back(std::move(qc));
    }
    const double sigma = std::sqrt(sub_.sigma2);
    for (int i = 0; i < ns; ++i) {
      const auto dc = mm_dc_terms(sub_, w, 1.0, t, i);
      auto lift = [&](const Vector& g) {
        Vector full = Vector::Zero(n);
        full.head(wd) = g.head(wd);
        full[t_idx] = g[wd + 1];  // eta component dropped (pinned)
        return full;
      };
      {
        const Vector jg = lift(dc.threshold_ratio_grad);
        convex::QuadConstraint qc;
        qc.P = Matrix::Zero(n, n);
        for (int j = 0; j < ns; ++j) {
          if (j == i) continue;
          embed::add_cross_power(qc.P, sub_.H, i, j);
        }
        qc.q = -jg;
        qc.r = sub_.sigma2 - dc.threshold_ratio + jg.dot(state);
        prob.quad.push_back(std::move(qc));
      }
      {
        const Vector hg = lift(dc.coupled_ratio_grad);
        const double h0 = dc.coupled_ratio - hg.dot(state);
        const double scale = std::max(1.0, (t + dc.coupled_ratio) / t);
        const int rows = 2 + 2 * (ns - 1);
        convex::SocConstraint sc;
        sc.A = Matrix::Zero(rows, n);
        sc.b = Vector::Zero(rows);
        sc.b[0] = 2.0 * sigma * scale;
        int row = 1;
        for (int j = 0; j < ns; ++j) {
          if (j == i) continue;
          sc.A.row(row++) = 2.0 * scale * embed::re_functional(sub_.H, i, j, n).transpose();
          sc.A.row(row++) = 2.0 * scale * embed::im_functional(sub_.H, i, j, n).transpose();
        }
        Vector et = Vector::Zero(n);
        et[t_idx] = 1.0;
        sc.A.row(row) = scale * (et - hg).transpose();
        sc.b[row] = -h0 * scale;
        sc.g = scale * (et + hg);
        sc.f = h0 * scale;
        prob.soc.push_back(std::move(sc));
      }
    }
    return prob;
  }

  bool maximize() const override { return false; }
  double objective(const Vector& state) const override { return state[state.size() - 1]; }
  double penalized_objective(const Vector& state, const ccp::PenaltySchedule&) const override {
    return objective(state);
  }
  double max_dc_violation(const Vector& state) const override {
    const int ns = sub_.n_users();
    const int wd = embed::precoder_dim(ns, sub_.n_antennas());
    const CMatrix w = embed::unpack_precoder(state, ns, sub_.n_antennas());
    const double t = state[wd];
    if (!(t > 0.0)) return std::numeric_limits<double>::infinity();
    double worst = total_power(w) - sub_.p_total;
    worst = std::max(worst, kTMin - t);
    for (int i = 0; i < ns; ++i) {
      worst = std::max(worst, w.col(i).squaredNorm() - sub_.p_total);
      const auto dc = mm_dc_terms(sub_, w, 1.0, t, i);
      worst = std::max(worst, dc.interference_ratio * t - dc.threshold_ratio);  // I - J
      worst = std::max(worst, dc.interference_ratio - dc.coupled_ratio);        // L - H
    }
    return worst;
  }
  Vector eta_of(const Vector&) const override { return Vector(); }

 private:
  const ProblemInstance& sub_;
};

}  // namespace

FixedSetMmResult solve_fixed_set_mm(const ProblemInstance& inst, const std::vector<int>& subset,
                                    const ccp::CcpOptions& opts) {
  FixedSetMmResult res;
  res.W = CMatrix::Zero(inst.n_antennas(), inst.n_users());
  if (subset.empty()) return res;
  const ProblemInstance sub = restrict_instance(inst, subset);
  const int ns = sub.n_users();

  const auto start = fip_mm(sub, Vector::Ones(ns), 0.5, /*max_scalings=*/1);
  if (!start) return res;

  const int wd = embed::precoder_dim(ns, sub.n_antennas());
  Vector state(wd + 1);
  state.head(wd) = embed::pack_precoder(start->W, wd);
  state[wd] = start->t;

  FixedSetMmAdapter adapter(sub);
  res.ccp = ccp::run_ccp(adapter, state, ccp::PenaltySchedule{}, opts);
  if (res.ccp.termination == ccp::CcpTermination::SubproblemFailure) return res;

  const CMatrix wfin = embed::unpack_precoder(res.ccp.final_state, ns, sub.n_antennas());
  for (int i = 0; i < ns; ++i) res.W.col(subset[i]) = wfin.col(i);
  res.feasible = true;
  res.msinr = 1.0 / res.ccp.final_state[wd];
  return res;
}

}  // namespace jsp::mm
