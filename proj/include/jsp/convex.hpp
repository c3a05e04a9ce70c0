#pragma once

#include "jsp/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace jsp::convex {

// Canonical convex program over real variables x:
//
//   minimize   x'Qx + c'x + c0 - sum_k d_k * log(a_k'x + b_k)
//   subject to x'P x + q'x + r <= 0          (quadratic, P PSD)
//              ||A x + b||_2 <= g'x + f      (second-order cone)
//              a'x <= b                      (linear inequality)
//              a'x == b                      (linear equality)
//
// Complex decision variables are embedded as adjacent real pairs by the
// callers (see embedding.hpp).

struct LogTerm {
  double weight = 0.0;  // d_k >= 0
  Vector a;
  double b = 0.0;
};

struct QuadConstraint {
  Matrix P;
  Vector q;
  double r = 0.0;
};

struct SocConstraint {
  Matrix A;
  Vector b;
  Vector g;
  double f = 0.0;
};

struct LinConstraint {
  Vector a;
  double b = 0.0;
};

struct EqConstraint {
  Vector a;
  double b = 0.0;
};

struct ConvexSubproblem {
  int n_vars = 0;
  Matrix Q;  // empty means no quadratic objective term
  Vector c;  // empty means no linear objective term
  double c0 = 0.0;
  std::vector<LogTerm> log_terms;
  std::vector<QuadConstraint> quad;
  std::vector<SocConstraint> soc;
  std::vector<LinConstraint> lin;
  std::vector<EqConstraint> eq;

  double objective(const Vector& x) const;
  /// Largest violation across all constraints (0 when feasible); equality
  /// rows contribute their absolute residual.
  double max_violation(const Vector& x) const;
  /// Throws std::invalid_argument on dimension mismatches or negative
  /// log-term weights.
  void validate() const;
};

enum class SolveStatus { Optimal, Infeasible, MaxIterations, NumericalFailure };

std::string to_string(SolveStatus s);

struct SolverOptions {
  double tol_feas = 1e-7;        // feasibility tolerance on the returned point
  double tol_kkt = 1e-6;         // stationarity residual tolerance
  int max_newton_iters = 200;    // per barrier stage
  double barrier_growth = 10.0;  // multiplicative growth of the barrier weight
  double gap_tol = 1e-8;         // target bound on the barrier duality gap
  // Inequalities are relaxed by this margin inside the barrier so that
  // feasible-but-boundary warm starts (CCP tangency points) remain usable;
  // must stay below tol_feas.
  double interior_margin = 5e-8;
};

struct SolverSolution {
  Vector x;
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective_value = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;  // accepted Newton steps over all stages
  // Phase-I margin: positive means a strictly feasible point exists with
  // this slack; negative is the certified infeasibility depth.
  double feasibility_margin = 0.0;
  // Merit values after each accepted Newton step, one sequence per
  // barrier stage; nonincreasing within a stage by construction.
  std::vector<std::vector<double>> merit_history;
};

/// Solves the program. A warm start must satisfy the equalities and be
/// inside the (margin-relaxed) inequality region with strictly positive
/// log-term arguments; otherwise phase I runs first.
SolverSolution solve(const ConvexSubproblem& problem, const SolverOptions& opts = {},
                     const std::optional<Vector>& warm_start = std::nullopt);

/// Finds a strictly feasible point for the constraint set, ignoring the
/// objective, or certifies infeasibility.
SolverSolution phase1_feasibility(const ConvexSubproblem& problem,
                                  const SolverOptions& opts = {},
                                  const std::optional<Vector>& warm_start = std::nullopt);

}  // namespace jsp::convex
