#pragma once

#include "jsp/convex.hpp"
#include "jsp/types.hpp"

#include <vector>

namespace jsp::socp {

/// Fixed-support minimum-power precoding: minimize total power over the
/// precoders of `users`, subject to per-user SINR targets (cone form with
/// the usual phase rotation making h_i^H w_i real nonnegative), optional
/// per-user power caps and an optional total power cap. Users outside the
/// support keep zero precoders.
struct PowerMinSpec {
  std::vector<int> users;  // support (indices into instance rows)
  Vector targets;          // linear SINR target per support user; 0 = unconstrained
  Vector power_caps;       // per support user; empty or nonpositive entries = uncapped
  double total_cap = 0.0;  // nonpositive = uncapped
};

struct PowerMinResult {
  bool feasible = false;
  CMatrix W;  // n_antennas x n_users, zero outside the support
  double power = 0.0;
  convex::SolveStatus status = convex::SolveStatus::NumericalFailure;
};

PowerMinResult fixed_support_power_min(const ProblemInstance& inst, const PowerMinSpec& spec,
                                       const convex::SolverOptions& opts = {});

}  // namespace jsp::socp
