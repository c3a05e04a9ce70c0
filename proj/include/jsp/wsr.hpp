#pragma once

#include "jsp/ccp.hpp"
#include "jsp/report.hpp"
#include "jsp/types.hpp"

#include <optional>
#include <vector>

namespace jsp::wsr {

// Decision vector layout: [precoder embedding | eta (N) | zeta (N)],
// 2*N*M + 2*N reals in total.

struct WsrState {
  CMatrix W;    // n_antennas x n_users
  Vector eta;   // in [0,1]
  Vector zeta;  // slack lower-bounding 1 + SINR, >= 1

  Vector pack() const;
  static WsrState unpack(const Vector& x, int n_users, int n_antennas);
};

/// Convex term minorized inside the SINR-slack constraint:
/// (sigma^2 + sum_j |h_i^H w_j|^2) / zeta_i. Rejects zeta_i <= 0.
double rx_power_over_slack(const ProblemInstance& inst, const CMatrix& W, double zeta_i, int i);

/// Gradient of the above over (precoder embedding, zeta_i); length 2NM+1.
Vector rx_power_over_slack_gradient(const ProblemInstance& inst, const CMatrix& W,
                                    double zeta_i, int i);

/// Sum-rate subproblem linearized around `state`: maximize
/// sum_i alpha_i log zeta_i plus the tangent entropy bonus, under power,
/// cardinality, slack and linearized SINR constraints (encoded as a
/// minimization).
convex::ConvexSubproblem build_wsr_subproblem(const ProblemInstance& inst, const WsrState& state,
                                              double lambda1);

/// Feasible initial point: cone feasibility at the scheduling weights
/// eta_hat, scaling eta_hat by delta on failure; falls back to the
/// all-zero state, which is always feasible.
WsrState fip_wsr(const ProblemInstance& inst, Vector eta_hat, double delta,
                 int max_scalings = 40);

class WsrAdapter : public ccp::DcAdapter {
 public:
  explicit WsrAdapter(const ProblemInstance& inst) : inst_(inst) {}
  convex::ConvexSubproblem convexify(const Vector& state,
                                     const ccp::PenaltySchedule& penalties) const override;
  bool maximize() const override { return true; }
  double objective(const Vector& state) const override;
  double penalized_objective(const Vector& state,
                             const ccp::PenaltySchedule& penalties) const override;
  double max_dc_violation(const Vector& state) const override;
  Vector eta_of(const Vector& state) const override;

 private:
  const ProblemInstance& inst_;
};

/// Joint scheduling + precoding by CCP from the cone-feasibility start.
RunReport jsp_wsr(const ProblemInstance& inst, const ccp::PenaltySchedule& schedule,
                  double delta = 1e-4, int max_iters = 200,
                  const std::optional<Vector>& eta_hat = std::nullopt,
                  const ccp::CcpOptions* opts_override = nullptr);

/// Precoding for a frozen user subset (scheduling variables pinned to
/// one, cardinality constraints dropped). Used by the decoupled
/// benchmarks and the exhaustive baseline.
struct FixedSetWsrResult {
  bool feasible = false;
  CMatrix W;  // full width, zero outside the subset
  double wsr_bits = 0.0;
  ccp::CcpReport ccp;
};

FixedSetWsrResult solve_fixed_set_wsr(const ProblemInstance& inst,
                                      const std::vector<int>& subset,
                                      const ccp::CcpOptions& opts,
                                      const std::optional<CMatrix>& w_start = std::nullopt);

}  // namespace jsp::wsr
