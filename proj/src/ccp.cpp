#include "jsp/ccp.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace jsp::ccp {

void PenaltySchedule::reset() {
  for (PenaltyParam* p : {&lambda1, &lambda2, &lambda3, &omega, &mu}) p->reset();
}

void PenaltySchedule::advance() {
  for (PenaltyParam* p : {&lambda1, &lambda2, &lambda3, &omega, &mu}) p->advance();
}

bool PenaltySchedule::saturated() const {
  for (const PenaltyParam* p : {&lambda1, &lambda2, &lambda3, &omega, &mu})
    if (!p->saturated()) return false;
  return true;
}

void PenaltySchedule::validate() const {
  for (const PenaltyParam* p : {&lambda1, &lambda2, &lambda3, &omega, &mu}) {
    if (p->init < 0.0) throw std::invalid_argument("penalty: negative init");
    if (p->growth < 1.0) throw std::invalid_argument("penalty: growth below 1");
    if (p->init > 0.0 && p->cap < p->init)
      throw std::invalid_argument("penalty: cap below init");
  }
}

PenaltySchedule PenaltySchedule::frozen() const {
  PenaltySchedule s = *this;
  for (PenaltyParam* p : {&s.lambda1, &s.lambda2, &s.lambda3, &s.omega, &s.mu}) {
    p->growth = 1.0;
    p->init = p->value;
    p->cap = std::max(p->cap, p->value);
  }
  return s;
}

CcpReport run_ccp(const DcAdapter& adapter, const Vector& initial_state,
                  PenaltySchedule schedule, const CcpOptions& opts) {
  if (!(opts.delta > 0.0)) throw std::invalid_argument("run_ccp: delta must be positive");
  schedule.validate();

  const auto t0 = std::chrono::steady_clock::now();
  CcpReport report;
  Vector state = initial_state;
  const double sign = adapter.maximize() ? -1.0 : 1.0;

  auto record = [&](double sub_obj) {
    CcpIterateRecord rec;
    rec.objective = adapter.objective(state);
    rec.penalized_objective = adapter.penalized_objective(state, schedule);
    rec.subproblem_objective = sub_obj;
    rec.max_dc_violation = adapter.max_dc_violation(state);
    rec.eta = adapter.eta_of(state);
    report.iterates.push_back(std::move(rec));
  };

  // Iterate 0 is the initial point; by tangency its subproblem value
  // equals the penalized objective.
  double prev_sub = adapter.penalized_objective(state, schedule);
  record(prev_sub);

  for (int k = 1; k <= opts.max_iters; ++k) {
    const convex::ConvexSubproblem sub = adapter.convexify(state, schedule);
    const auto sol = convex::solve(sub, opts.solver, state);
    report.last_solver_status = sol.status;
    if (sol.status != convex::SolveStatus::Optimal) {
      // Majorization plus a feasible start should rule this out; surface it.
      report.termination = CcpTermination::SubproblemFailure;
      break;
    }
    state = sol.x;

    const double sub_obj = sign * sol.objective_value;
    record(sub_obj);
    report.iteration_count = k;

    const bool converged = std::abs(sub_obj - prev_sub) < opts.delta && schedule.saturated();
    prev_sub = sub_obj;
    schedule.advance();
    if (converged) {
      report.termination = CcpTermination::Converged;
      break;
    }
    if (k == opts.max_iters) report.termination = CcpTermination::MaxIterations;
  }

  report.final_state = state;
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace jsp::ccp
