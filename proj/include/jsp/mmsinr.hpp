#pragma once

#include "jsp/ccp.hpp"
#include "jsp/report.hpp"
#include "jsp/types.hpp"

#include <optional>
#include <vector>

namespace jsp::mm {

// Decision vector layout: [precoder embedding | eta (N) | t], where t is
// the inverse of the minimum weighted SINR epigraph variable.

struct MmState {
  CMatrix W;
  Vector eta;
  double t = 1.0;

  Vector pack() const;
  static MmState unpack(const Vector& x, int n_users, int n_antennas);
};

/// DC building blocks of the max-min chain for user i, with gradients
/// over [precoder embedding | eta_i | t] (length 2NM + 2):
///   interference_ratio  I_i(W) / t
///   coupled_ratio       (I_i(W) + beta_i |h_i^H w_i|^2) / (t + eta_i)
///   threshold_ratio     (I_i(W) + beta_i |h_i^H w_i|^2) / (1 + eta_i eps_i)
/// Rejects t <= 0.
struct MmDcTerms {
  double interference_ratio = 0.0;
  double coupled_ratio = 0.0;
  double threshold_ratio = 0.0;
  Vector interference_ratio_grad;
  Vector coupled_ratio_grad;
  Vector threshold_ratio_grad;
};

MmDcTerms mm_dc_terms(const ProblemInstance& inst, const CMatrix& W, double eta_i, double t,
                      int i);

/// Lower bound replacing the open constraint t > 0.
inline constexpr double kTMin = 1e-6;

convex::ConvexSubproblem build_mm_subproblem(const ProblemInstance& inst, const MmState& state,
                                             double lambda2, double omega);

/// Feasible initial point: fixed-support minimum-power precoding at the
/// SINR targets eta_hat_i * eps_i / beta_i, scaled up to the full budget,
/// with t chosen so every epigraph constraint holds. Scales eta_hat by
/// delta (same support) on infeasibility; empty after `max_scalings`.
std::optional<MmState> fip_mm(const ProblemInstance& inst, Vector eta_hat, double delta,
                              int max_scalings = 30);

class MmAdapter : public ccp::DcAdapter {
 public:
  explicit MmAdapter(const ProblemInstance& inst) : inst_(inst) {}
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
};

RunReport jsp_mmsinr(const ProblemInstance& inst, const ccp::PenaltySchedule& schedule,
                     double delta = 1e-4, int max_iters = 200,
                     const std::optional<Vector>& eta_hat = std::nullopt,
                     const ccp::CcpOptions* opts_override = nullptr);

struct FixedSetMmResult {
  bool feasible = false;
  CMatrix W;
  double msinr = 0.0;  // weighted minimum SINR, linear
  ccp::CcpReport ccp;
};

/// Max-min precoding for a frozen subset of exactly the scheduled users.
FixedSetMmResult solve_fixed_set_mm(const ProblemInstance& inst, const std::vector<int>& subset,
                                    const ccp::CcpOptions& opts);

}  // namespace jsp::mm
