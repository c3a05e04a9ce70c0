#pragma once

#include "jsp/convex.hpp"
#include "jsp/types.hpp"

#include <vector>

namespace jsp::ccp {

/// One multiplicatively advanced penalty parameter. A parameter with
/// init == 0 is pinned to zero and never moves.
struct PenaltyParam {
  double init = 0.0;
  double growth = 1.0;
  double cap = 0.0;
  double value = 0.0;

  void reset() { value = init; }
  void advance() {
    if (init == 0.0) return;
    value = std::min(value * growth, cap);
  }
  bool saturated() const {
    return init == 0.0 || growth == 1.0 || value >= cap * (1.0 - 1e-12);
  }
};

struct PenaltySchedule {
  PenaltyParam lambda1{0.5, 1.1, 10.0, 0.5};   // entropy penalty, sum-rate chain
  PenaltyParam lambda2{0.0, 1.0, 0.0, 0.0};    // entropy penalty, max-min chain (off)
  PenaltyParam lambda3{0.0, 1.0, 0.0, 0.0};    // entropy penalty, power chain (off)
  PenaltyParam omega{0.01, 1.2, 20.0, 0.01};   // cardinality penalty, max-min chain
  PenaltyParam mu{0.01, 1.2, 20.0, 0.01};      // cardinality penalty, power chain

  void reset();
  /// Advances every parameter one step (multiply by growth, clamp at cap).
  void advance();
  /// True once every growing parameter has reached its cap; while the
  /// continuation is still reshaping the problem, convergence of the
  /// subproblem objective is not meaningful.
  bool saturated() const;
  /// Throws std::invalid_argument when growth < 1, cap < init, or init < 0.
  void validate() const;
  /// All-growth-one copy with values pinned at the current state.
  PenaltySchedule frozen() const;
};

/// Problem-specific hooks consumed by run_ccp. Implementations are
/// stateless given an explicit state vector.
class DcAdapter {
 public:
  virtual ~DcAdapter() = default;

  /// Convex subproblem linearized around `state` (always a minimization;
  /// see maximize() for the reporting direction). Constant terms are kept
  /// so the optimal value is tangent-exact at `state`.
  virtual convex::ConvexSubproblem convexify(const Vector& state,
                                             const PenaltySchedule& penalties) const = 0;

  /// True when the underlying design objective is maximized; subproblem
  /// objective values are negated for reporting in that case.
  virtual bool maximize() const = 0;

  /// Unpenalized design objective at `state` (natural optimizer scale).
  virtual double objective(const Vector& state) const = 0;

  /// Objective plus the active penalty terms at `state`.
  virtual double penalized_objective(const Vector& state,
                                     const PenaltySchedule& penalties) const = 0;

  /// Worst violation of the original DC and convex constraints at `state`.
  virtual double max_dc_violation(const Vector& state) const = 0;

  /// Scheduling variables embedded in `state` (may be empty).
  virtual Vector eta_of(const Vector& state) const = 0;
};

enum class CcpTermination { Converged, MaxIterations, SubproblemFailure };

struct CcpIterateRecord {
  double objective = 0.0;
  double penalized_objective = 0.0;
  double subproblem_objective = 0.0;  // reported in the adapter's direction
  double max_dc_violation = 0.0;
  Vector eta;
};

struct CcpReport {
  std::vector<CcpIterateRecord> iterates;
  CcpTermination termination = CcpTermination::MaxIterations;
  int iteration_count = 0;
  double wall_time_s = 0.0;
  Vector final_state;
  convex::SolveStatus last_solver_status = convex::SolveStatus::Optimal;
};

struct CcpOptions {
  double delta = 1e-4;  // convergence threshold on successive subproblem objectives
  int max_iters = 200;
  convex::SolverOptions solver;

  CcpOptions() {
    // Subproblem accuracy one decade below delta is all the loop guard
    // can resolve; pushing further just grinds the barrier at precision
    // limits.
    solver.gap_tol = 1e-7;
  }
};

/// Runs the convexify/solve/advance loop from a feasible initial state.
/// Stops when successive subproblem objective values differ by less than
/// delta, propagating solver failures with the last good state preserved.
CcpReport run_ccp(const DcAdapter& adapter, const Vector& initial_state,
                  PenaltySchedule schedule, const CcpOptions& opts = {});

}  // namespace jsp::ccp
