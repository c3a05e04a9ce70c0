#pragma once

#include "jsp/ccp.hpp"
#include "jsp/report.hpp"
#include "jsp/types.hpp"

#include <optional>
#include <vector>

namespace jsp::pmin {

// Decision vector layout: [precoder embedding | eta (N)].

struct PminState {
  CMatrix W;
  Vector eta;

  Vector pack() const;
  static PminState unpack(const Vector& x, int n_users, int n_antennas);
};

/// Convex term minorized inside the SINR constraint of the power chain:
/// (I_i(W) + |h_i^H w_i|^2) / (1 + eps_i * eta_i), with gradient over
/// [precoder embedding | eta_i] (length 2NM + 1).
double threshold_ratio(const ProblemInstance& inst, const CMatrix& W, double eta_i, int i);
Vector threshold_ratio_gradient(const ProblemInstance& inst, const CMatrix& W, double eta_i,
                                int i);

convex::ConvexSubproblem build_pmin_subproblem(const ProblemInstance& inst,
                                               const PminState& state, double lambda3,
                                               double mu, double upsilon);

/// Per-user power bound when none is supplied: generously above both the
/// budget and the interference-free power needed for every threshold.
double default_upsilon(const ProblemInstance& inst);

/// Feasible initial point: fixed-support minimum-power precoding at the
/// targets eta_hat_i * eps_i, scaling eta_hat by delta on infeasibility.
std::optional<PminState> fip_pmin(const ProblemInstance& inst, Vector eta_hat, double delta,
                                  double upsilon, int max_scalings = 30);

class PminAdapter : public ccp::DcAdapter {
 public:
  PminAdapter(const ProblemInstance& inst, double upsilon) : inst_(inst), upsilon_(upsilon) {}
  convex::ConvexSubproblem convexify(const Vector& state,
                                     const ccp::PenaltySchedule& penalties) const override;
  bool maximize() const override { return false; }
  double objective(const Vector& state) const override;
  double penalized_objective(const Vector& state,
                             const ccp::PenaltySchedule& penalties) const override;
  double max_dc_violation(const Vector& state) const override;
  Vector eta_of(const Vector& state) const override;

 private:
  const ProblemInstance& inst_;
  double upsilon_;
};

RunReport jsp_pmin(const ProblemInstance& inst, const ccp::PenaltySchedule& schedule,
                   double delta = 1e-4, int max_iters = 200, double upsilon = 0.0,
                   const std::optional<Vector>& eta_hat = std::nullopt,
                   const ccp::CcpOptions* opts_override = nullptr);

struct FixedSetPminResult {
  bool feasible = false;
  CMatrix W;
  double power = 0.0;
};

/// Globally optimal fixed-subset power minimization (single cone solve).
FixedSetPminResult solve_fixed_set_pmin(const ProblemInstance& inst,
                                        const std::vector<int>& subset);

}  // namespace jsp::pmin
