#include "jsp/convex.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace jsp::convex {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

double ConvexSubproblem::objective(const Vector& x) const {
  double v = c0;
  if (Q.size() > 0) v += x.dot(Q * x);
  if (c.size() > 0) v += c.dot(x);
  for (const auto& lt : log_terms) {
    if (lt.weight == 0.0) continue;
    v -= lt.weight * std::log(lt.a.dot(x) + lt.b);
  }
  return v;
}

double ConvexSubproblem::max_violation(const Vector& x) const {
  double worst = 0.0;
  for (const auto& qc : quad)
    worst = std::max(worst, x.dot(qc.P * x) + qc.q.dot(x) + qc.r);
  for (const auto& sc : soc)
    worst = std::max(worst, (sc.A * x + sc.b).norm() - (sc.g.dot(x) + sc.f));
  for (const auto& lc : lin) worst = std::max(worst, lc.a.dot(x) - lc.b);
  for (const auto& ec : eq) worst = std::max(worst, std::abs(ec.a.dot(x) - ec.b));
  return worst;
}

void ConvexSubproblem::validate() const {
  if (n_vars < 0) throw std::invalid_argument("subproblem: negative dimension");
  auto want = [this](Eigen::Index got, const char* what) {
    if (got != n_vars) throw std::invalid_argument(std::string("subproblem: bad dimension in ") + what);
  };
  if (Q.size() > 0 && (Q.rows() != n_vars || Q.cols() != n_vars))
    throw std::invalid_argument("subproblem: bad Q shape");
  if (c.size() > 0) want(c.size(), "c");
  for (const auto& lt : log_terms) {
    if (lt.weight < 0.0) throw std::invalid_argument("subproblem: negative log weight");
    want(lt.a.size(), "log term");
  }
  for (const auto& qc : quad) {
    if (qc.P.rows() != n_vars || qc.P.cols() != n_vars)
      throw std::invalid_argument("subproblem: bad quadratic constraint shape");
    want(qc.q.size(), "quadratic constraint");
  }
  for (const auto& sc : soc) {
    if (sc.A.cols() != n_vars || sc.A.rows() != sc.b.size())
      throw std::invalid_argument("subproblem: bad cone constraint shape");
    want(sc.g.size(), "cone constraint");
  }
  for (const auto& lc : lin) want(lc.a.size(), "linear constraint");
  for (const auto& ec : eq) want(ec.a.size(), "equality constraint");
}

namespace {

// Equality elimination x = x0 + N z with orthonormal N.
struct Reduction {
  Vector x0;
  Matrix N;
  bool identity = true;
  int full_dim = 0;

  int dim() const { return identity ? full_dim : static_cast<int>(N.cols()); }
  Vector lift(const Vector& z) const { return identity ? z : Vector(x0 + N * z); }
  Vector project(const Vector& x) const {
    return identity ? x : Vector(N.transpose() * (x - x0));
  }
};

bool make_reduction(const ConvexSubproblem& p, double tol, Reduction& red) {
  red.full_dim = p.n_vars;
  red.x0 = Vector::Zero(p.n_vars);
  if (p.eq.empty()) return true;
  const int ne = static_cast<int>(p.eq.size());
  Matrix aeq(ne, p.n_vars);
  Vector beq(ne);
  for (int i = 0; i < ne; ++i) {
    aeq.row(i) = p.eq[i].a.transpose();
    beq[i] = p.eq[i].b;
  }
  Eigen::BDCSVD<Matrix> svd(aeq, Eigen::ComputeThinU | Eigen::ComputeFullV);
  red.x0 = svd.solve(beq);
  if ((aeq * red.x0 - beq).cwiseAbs().maxCoeff() > std::max(tol, 1e-9)) return false;
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? std::max(1e-13, sv[0] * 1e-12) : 1e-13;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff) ++rank;
  red.identity = false;
  red.N = svd.matrixV().rightCols(p.n_vars - rank);
  return true;
}

struct Evaluator {
  const ConvexSubproblem& p;
  const Reduction& red;
  double margin;
  bool centering = false;  // drop the objective, keep log args as unit barriers
  std::vector<Matrix> soc_dh;  // constant Hessian of each cone discriminant

  Evaluator(const ConvexSubproblem& prob, const Reduction& r, double m)
      : p(prob), red(r), margin(m) {
    soc_dh.reserve(p.soc.size());
    for (const auto& sc : p.soc)
      soc_dh.push_back(2.0 * (sc.g * sc.g.transpose() - sc.A.transpose() * sc.A));
  }

  int barrier_degree() const {
    return static_cast<int>(p.quad.size() + p.lin.size() + 2 * p.soc.size());
  }

  // Smallest slack over relaxed inequalities and log-term arguments.
  double min_slack(const Vector& x) const {
    double s = std::numeric_limits<double>::infinity();
    for (const auto& qc : p.quad)
      s = std::min(s, margin - (x.dot(qc.P * x) + qc.q.dot(x) + qc.r));
    for (const auto& lc : p.lin) s = std::min(s, margin + lc.b - lc.a.dot(x));
    for (const auto& sc : p.soc)
      s = std::min(s, sc.g.dot(x) + sc.f + margin - (sc.A * x + sc.b).norm());
    for (const auto& lt : p.log_terms)
      if (lt.weight > 0.0) s = std::min(s, lt.a.dot(x) + lt.b);
    return s;
  }

  // merit = t * objective + barrier. Returns false outside the domain.
  bool eval(const Vector& z, double t, double& merit, Vector* g_out, Matrix* h_out) const {
    const bool deriv = g_out != nullptr;
    const Vector x = red.lift(z);
    const int n = p.n_vars;
    double m = 0.0;
    Vector gx;
    Matrix hx;
    if (deriv) {
      gx = Vector::Zero(n);
      hx = Matrix::Zero(n, n);
    }

    if (!centering) {
      double f0 = p.c0;
      if (p.Q.size() > 0) {
        const Vector qx = p.Q * x;
        f0 += x.dot(qx);
        if (deriv) {
          gx.noalias() += (2.0 * t) * qx;
          hx.noalias() += (2.0 * t) * p.Q;
        }
      }
      if (p.c.size() > 0) {
        f0 += p.c.dot(x);
        if (deriv) gx.noalias() += t * p.c;
      }
      for (const auto& lt : p.log_terms) {
        if (lt.weight == 0.0) continue;
        const double arg = lt.a.dot(x) + lt.b;
        if (!(arg > 0.0)) return false;
        f0 -= lt.weight * std::log(arg);
        if (deriv) {
          gx.noalias() -= (t * lt.weight / arg) * lt.a;
          hx.noalias() += (t * lt.weight / (arg * arg)) * (lt.a * lt.a.transpose());
        }
      }
      m += t * f0;
    } else {
      for (const auto& lt : p.log_terms) {
        if (lt.weight == 0.0) continue;
        const double arg = lt.a.dot(x) + lt.b;
        if (!(arg > 0.0)) return false;
        m -= std::log(arg);
        if (deriv) {
          gx.noalias() -= lt.a / arg;
          hx.noalias() += (lt.a * lt.a.transpose()) / (arg * arg);
        }
      }
    }

    for (const auto& qc : p.quad) {
      const Vector px = qc.P * x;
      const double f = x.dot(px) + qc.q.dot(x) + qc.r;
      const double slack = margin - f;
      if (!(slack > 0.0)) return false;
      m -= std::log(slack);
      if (deriv) {
        const Vector gf = 2.0 * px + qc.q;
        gx.noalias() += gf / slack;
        hx.noalias() += (2.0 / slack) * qc.P;
        hx.noalias() += (gf * gf.transpose()) / (slack * slack);
      }
    }
    for (const auto& lc : p.lin) {
      const double slack = margin + lc.b - lc.a.dot(x);
      if (!(slack > 0.0)) return false;
      m -= std::log(slack);
      if (deriv) {
        gx.noalias() += lc.a / slack;
        hx.noalias() += (lc.a * lc.a.transpose()) / (slack * slack);
      }
    }
    for (std::size_t k = 0; k < p.soc.size(); ++k) {
      const auto& sc = p.soc[k];
      const Vector v = sc.A * x + sc.b;
      const double u = sc.g.dot(x) + sc.f + margin;
      if (!(u > 0.0)) return false;
      const double disc = u * u - v.squaredNorm();
      if (!(disc > 0.0)) return false;
      m -= std::log(disc);
      if (deriv) {
        const Vector gd = 2.0 * u * sc.g - 2.0 * (sc.A.transpose() * v);
        gx.noalias() -= gd / disc;
        hx.noalias() -= soc_dh[k] / disc;
        hx.noalias() += (gd * gd.transpose()) / (disc * disc);
      }
    }

    if (!std::isfinite(m)) return false;
    merit = m;
    if (deriv) {
      if (red.identity) {
        *g_out = std::move(gx);
        *h_out = std::move(hx);
      } else {
        *g_out = red.N.transpose() * gx;
        *h_out = red.N.transpose() * hx * red.N;
      }
    }
    return true;
  }
};

bool newton_direction(Matrix h, const Vector& g, Vector& d) {
  const double diag_scale = h.size() > 0 ? h.diagonal().cwiseAbs().maxCoeff() : 0.0;
  double ridge = 0.0;
  for (int attempt = 0; attempt < 14; ++attempt) {
    Eigen::LDLT<Matrix> ldlt(h);
    if (ldlt.info() == Eigen::Success) {
      d = ldlt.solve(-g);
      if (d.allFinite() && g.dot(d) < 0.0) return true;
    }
    const double bump = (ridge == 0.0) ? std::max(1e-14, 1e-12 * diag_scale) : ridge * 100.0;
    h.diagonal().array() += bump - ridge;
    ridge = bump;
  }
  return false;
}

struct StageOutcome {
  bool converged = false;
  bool failed = false;
  int steps = 0;
  bool early_exit = false;
};

// Damped Newton on merit(z; t). Accepted iterates strictly decrease the
// merit (Armijo with backtracking, domain-preserving).
StageOutcome newton_stage(const Evaluator& ev, double t, Vector& z, double stage_tol,
                          int max_iters, std::vector<double>& merits,
                          const std::function<bool(const Vector&)>& early_exit) {
  StageOutcome out;
  if (z.size() == 0) {  // fully pinned by equalities
    out.converged = true;
    return out;
  }
  double m;
  Vector g;
  Matrix h;
  int stagnant = 0;
  for (int it = 0; it < max_iters; ++it) {
    out.steps = it;
    if (!ev.eval(z, t, m, &g, &h)) {
      out.failed = true;
      return out;
    }
    Vector d;
    if (!newton_direction(h, g, d)) {
      out.converged = g.lpNorm<Eigen::Infinity>() <= 1e-9 * (1.0 + std::abs(m));
      out.failed = !out.converged;
      return out;
    }
    const double dec2 = -g.dot(d);
    if (0.5 * dec2 <= stage_tol) {
      out.converged = true;
      return out;
    }
    double alpha = 1.0;
    bool accepted = false;
    const double slope = g.dot(d);
    for (int ls = 0; ls < 64; ++ls) {
      double mt;
      const Vector zt = z + alpha * d;
      if (ev.eval(zt, t, mt, nullptr, nullptr) && mt <= m + 1e-4 * alpha * slope) {
        z = zt;
        const double gain = m - mt;
        stagnant = gain <= 1e-13 * (1.0 + std::abs(m)) ? stagnant + 1 : 0;
        m = mt;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted || stagnant >= 3) {
      // Progress exhausted at working precision; the point is the best
      // centered iterate double arithmetic supports at this stage.
      out.converged =
          stagnant >= 3 ||
          0.5 * dec2 <= std::max(1e4 * stage_tol, 1e-7 * (1.0 + std::abs(m)));
      out.failed = !out.converged;
      return out;
    }
    merits.push_back(m);
    if (early_exit && early_exit(z)) {
      out.converged = true;
      out.early_exit = true;
      out.steps = it + 1;
      return out;
    }
  }
  out.steps = max_iters;
  return out;  // hit the iteration cap
}

struct PathResult {
  bool converged = false;
  bool failed = false;
  bool hit_cap = false;
  bool early_exit = false;
  int iterations = 0;
  double final_t = 1.0;
  std::vector<std::vector<double>> merit_history;
};

// Centering pre-pass plus the barrier path over growing t.
PathResult barrier_path(const Evaluator& ev, Vector& z, const SolverOptions& opts,
                        const std::function<bool(const Vector&)>& early_exit) {
  PathResult res;
  const int m_bar = ev.barrier_degree();

  const double healthy = 1e-5;
  if (m_bar > 0 && ev.min_slack(ev.red.lift(z)) < healthy) {
    Evaluator center = ev;
    center.centering = true;
    std::vector<double> merits;
    auto stop_when_centered = [&](const Vector& zz) {
      return center.min_slack(center.red.lift(zz)) >= healthy;
    };
    auto st = newton_stage(center, 1.0, z, 1e-10, 80, merits, stop_when_centered);
    res.iterations += st.steps;
    res.merit_history.push_back(std::move(merits));
    if (st.failed) {
      res.failed = true;
      return res;
    }
  }

  if (m_bar == 0) {
    std::vector<double> merits;
    auto st = newton_stage(ev, 1.0, z, 1e-12, opts.max_newton_iters, merits, early_exit);
    res.iterations += st.steps;
    res.merit_history.push_back(std::move(merits));
    res.converged = st.converged;
    res.failed = st.failed;
    res.hit_cap = !st.converged && !st.failed;
    res.early_exit = st.early_exit;
    res.final_t = 1.0;
    return res;
  }

  const double t_final = m_bar / opts.gap_tol;
  double t = 1.0;
  while (true) {
    std::vector<double> merits;
    const double stage_tol = std::max(1e-12, 0.05 * opts.gap_tol * t);
    auto st = newton_stage(ev, t, z, stage_tol, opts.max_newton_iters, merits, early_exit);
    res.iterations += st.steps;
    res.merit_history.push_back(std::move(merits));
    res.final_t = t;
    if (st.failed) {
      res.failed = true;
      return res;
    }
    if (st.early_exit) {
      res.converged = true;
      res.early_exit = true;
      return res;
    }
    if (!st.converged) {
      res.hit_cap = true;
      return res;
    }
    if (t >= t_final) {
      res.converged = true;
      return res;
    }
    t = std::min(t * opts.barrier_growth, t_final);
  }
}

// Phase I: minimize the worst violation s over (x, s). The box keeps the
// merit bounded when the feasible set has unbounded recession directions.
ConvexSubproblem make_phase1(const ConvexSubproblem& p, double log_arg_floor, double box_radius) {
  ConvexSubproblem f;
  f.n_vars = p.n_vars + 1;
  const int n = p.n_vars;
  f.c = Vector::Zero(n + 1);
  f.c[n] = 1.0;
  for (int i = 0; i <= n; ++i) {
    Vector e = Vector::Zero(n + 1);
    e[i] = 1.0;
    f.lin.push_back({e, box_radius});
    f.lin.push_back({-e, box_radius});
  }
  auto pad = [n](const Vector& v, double tail) {
    Vector w = Vector::Zero(n + 1);
    w.head(n) = v;
    w[n] = tail;
    return w;
  };
  for (const auto& qc : p.quad) {
    QuadConstraint q;
    q.P = Matrix::Zero(n + 1, n + 1);
    q.P.topLeftCorner(n, n) = qc.P;
    q.q = pad(qc.q, -1.0);
    q.r = qc.r;
    f.quad.push_back(std::move(q));
  }
  for (const auto& sc : p.soc) {
    SocConstraint s;
    s.A = Matrix::Zero(sc.A.rows(), n + 1);
    s.A.leftCols(n) = sc.A;
    s.b = sc.b;
    s.g = pad(sc.g, 1.0);
    s.f = sc.f;
    f.soc.push_back(std::move(s));
  }
  for (const auto& lc : p.lin) f.lin.push_back({pad(lc.a, -1.0), lc.b});
  for (const auto& lt : p.log_terms) {
    if (lt.weight == 0.0) continue;
    // keep the log argument at least log_arg_floor - s
    f.lin.push_back({pad(-lt.a, -1.0), lt.b - log_arg_floor});
  }
  for (const auto& ec : p.eq) f.eq.push_back({pad(ec.a, 0.0), ec.b});
  return f;
}

double initial_violation(const ConvexSubproblem& p, const Vector& x, double log_arg_floor) {
  double s = -std::numeric_limits<double>::infinity();
  for (const auto& qc : p.quad) s = std::max(s, x.dot(qc.P * x) + qc.q.dot(x) + qc.r);
  for (const auto& sc : p.soc)
    s = std::max(s, (sc.A * x + sc.b).norm() - (sc.g.dot(x) + sc.f));
  for (const auto& lc : p.lin) s = std::max(s, lc.a.dot(x) - lc.b);
  for (const auto& lt : p.log_terms)
    if (lt.weight > 0.0) s = std::max(s, log_arg_floor - (lt.a.dot(x) + lt.b));
  if (!std::isfinite(s)) s = 0.0;  // unconstrained
  return s;
}

struct Phase1Result {
  bool usable = false;    // a point inside the margin-relaxed region exists
  bool strict = false;    // strictly feasible (s < 0)
  bool numerical = false;
  Vector x;
  double s_best = std::numeric_limits<double>::infinity();
  int iterations = 0;
  std::vector<std::vector<double>> merit_history;
};

Phase1Result run_phase1(const ConvexSubproblem& p, const Reduction& red,
                        const SolverOptions& opts, const std::optional<Vector>& warm) {
  Phase1Result out;
  const double floor = opts.interior_margin;

  Vector x_probe = red.identity ? Vector(Vector::Zero(p.n_vars)) : red.x0;
  if (warm && warm->size() == p.n_vars)
    x_probe = red.identity ? *warm : Vector(red.x0 + red.N * red.project(*warm));
  const double s_probe = initial_violation(p, x_probe, floor);
  if (s_probe <= -1e-3) {  // start already comfortably feasible
    out.usable = true;
    out.strict = true;
    out.x = x_probe;
    out.s_best = s_probe;
    return out;
  }

  const double box_radius =
      1e6 * (1.0 + std::max(x_probe.lpNorm<Eigen::Infinity>(), std::abs(s_probe)));
  ConvexSubproblem ext = make_phase1(p, floor, box_radius);

  Reduction red_ext;
  red_ext.full_dim = ext.n_vars;
  red_ext.identity = red.identity;
  if (!red.identity) {
    red_ext.x0 = Vector::Zero(ext.n_vars);
    red_ext.x0.head(p.n_vars) = red.x0;
    red_ext.N = Matrix::Zero(ext.n_vars, red.N.cols() + 1);
    red_ext.N.topLeftCorner(p.n_vars, red.N.cols()) = red.N;
    red_ext.N(p.n_vars, red.N.cols()) = 1.0;
  } else {
    red_ext.x0 = Vector::Zero(ext.n_vars);
  }

  const double s0 = s_probe + 1.0;
  Vector xe(ext.n_vars);
  xe.head(p.n_vars) = x_probe;
  xe[p.n_vars] = s0;
  Vector z = red_ext.project(xe);

  Evaluator ev(ext, red_ext, 0.0);
  const int s_red_index = static_cast<int>(z.size()) - 1;
  const double exit_level = -1e-3;
  auto early = [&](const Vector& zz) {
    const double s = red_ext.lift(zz)[p.n_vars];
    return s <= exit_level;
  };

  const int m_bar = ev.barrier_degree();
  const double accept_level = 0.9 * opts.interior_margin;
  const double gap_target = std::min(opts.gap_tol, 0.1 * opts.interior_margin);
  double t = 1.0;
  const double t_final = m_bar / gap_target;
  bool failed = false;
  while (true) {
    std::vector<double> merits;
    const double stage_tol = std::max(1e-12, 0.05 * gap_target * t);
    auto st = newton_stage(ev, t, z, stage_tol, opts.max_newton_iters, merits, early);
    out.iterations += st.steps;
    out.merit_history.push_back(std::move(merits));
    const Vector xl = red_ext.lift(z);
    out.s_best = xl[p.n_vars];
    out.x = xl.head(p.n_vars);
    if (st.failed) {
      failed = true;
      break;
    }
    if (st.early_exit) break;
    const double gap = m_bar / t;
    if (out.s_best - gap > accept_level) break;  // infeasibility certified
    if (t >= t_final) break;
    if (!st.converged) break;  // iteration cap; decide from s_best
    t = std::min(t * opts.barrier_growth, t_final);
  }
  (void)s_red_index;
  out.strict = out.s_best < 0.0;
  out.usable = out.s_best < accept_level;
  out.numerical = failed && !out.usable;
  return out;
}

}  // namespace

SolverSolution phase1_feasibility(const ConvexSubproblem& problem, const SolverOptions& opts,
                                  const std::optional<Vector>& warm_start) {
  problem.validate();
  SolverSolution sol;
  Reduction red;
  if (!make_reduction(problem, opts.tol_feas, red)) {
    sol.status = SolveStatus::Infeasible;
    sol.feasibility_margin = -std::numeric_limits<double>::infinity();
    return sol;
  }
  auto p1 = run_phase1(problem, red, opts, warm_start);
  sol.x = p1.x;
  sol.iterations = p1.iterations;
  sol.merit_history = std::move(p1.merit_history);
  sol.feasibility_margin = -p1.s_best;
  if (p1.numerical)
    sol.status = SolveStatus::NumericalFailure;
  else
    sol.status = p1.strict ? SolveStatus::Optimal : SolveStatus::Infeasible;
  if (sol.x.size() == problem.n_vars) sol.objective_value = problem.objective(sol.x);
  return sol;
}

SolverSolution solve(const ConvexSubproblem& problem, const SolverOptions& opts,
                     const std::optional<Vector>& warm_start) {
  problem.validate();
  SolverSolution sol;
  Reduction red;
  if (!make_reduction(problem, opts.tol_feas, red)) {
    sol.status = SolveStatus::Infeasible;
    return sol;
  }

  Evaluator ev(problem, red, opts.interior_margin);
  Vector z;
  bool have_start = false;
  if (warm_start && warm_start->size() == problem.n_vars) {
    Vector zw = red.project(*warm_start);
    double mtest;
    if (ev.eval(zw, 1.0, mtest, nullptr, nullptr)) {
      z = std::move(zw);
      have_start = true;
    }
  }
  if (!have_start) {
    auto p1 = run_phase1(problem, red, opts, warm_start);
    sol.iterations += p1.iterations;
    sol.feasibility_margin = -p1.s_best;
    for (auto& hm : p1.merit_history) sol.merit_history.push_back(std::move(hm));
    if (!p1.usable) {
      sol.x = p1.x;
      sol.status = p1.numerical ? SolveStatus::NumericalFailure : SolveStatus::Infeasible;
      return sol;
    }
    z = red.project(p1.x);
    double mtest;
    if (!ev.eval(z, 1.0, mtest, nullptr, nullptr)) {
      sol.status = SolveStatus::NumericalFailure;
      sol.x = p1.x;
      return sol;
    }
  }

  auto path = barrier_path(ev, z, opts, nullptr);
  sol.iterations += path.iterations;
  for (auto& hm : path.merit_history) sol.merit_history.push_back(std::move(hm));
  sol.x = red.lift(z);
  sol.objective_value = problem.objective(sol.x);

  double grad_norm = 0.0;
  {
    double m;
    Vector g;
    Matrix h;
    if (z.size() > 0 && ev.eval(z, path.final_t, m, &g, &h))
      grad_norm = g.norm() / path.final_t;
  }
  sol.kkt_residual = grad_norm;

  const double viol = problem.max_violation(sol.x);
  if (path.failed)
    sol.status = SolveStatus::NumericalFailure;
  else if (path.hit_cap)
    sol.status = SolveStatus::MaxIterations;
  else if (viol <= opts.tol_feas)
    sol.status = SolveStatus::Optimal;
  else
    sol.status = SolveStatus::NumericalFailure;
  return sol;
}

}  // namespace jsp::convex
