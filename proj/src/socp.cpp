#include "jsp/socp.hpp"

#include "jsp/embedding.hpp"

#include <cmath>
#include <stdexcept>

namespace jsp::socp {

PowerMinResult fixed_support_power_min(const ProblemInstance& inst, const PowerMinSpec& spec,
                                       const convex::SolverOptions& opts) {
  const int m = inst.n_antennas();
  const int ns = static_cast<int>(spec.users.size());
  if (ns == 0) {
    PowerMinResult r;
    r.feasible = true;
    r.W = CMatrix::Zero(m, inst.n_users());
    r.status = convex::SolveStatus::Optimal;
    return r;
  }
  if (spec.targets.size() != ns)
    throw std::invalid_argument("power_min: targets/support size mismatch");

  // Channel rows restricted to the support; local column j is support user j.
  CMatrix sub_h(ns, m);
  for (int i = 0; i < ns; ++i) sub_h.row(i) = inst.H.row(spec.users[i]);

  const int n = embed::precoder_dim(ns, m);
  convex::ConvexSubproblem prob;
  prob.n_vars = n;
  prob.Q = Matrix::Identity(n, n);  // total power of the support columns
  prob.c = Vector::Zero(n);

  const double sigma = std::sqrt(inst.sigma2);
  for (int i = 0; i < ns; ++i) {
    const double tau = spec.targets[i];
    if (tau > 0.0) {
      const int rows = 1 + 2 * (ns - 1);
      convex::SocConstraint sc;
      sc.A = Matrix::Zero(rows, n);
      sc.b = Vector::Zero(rows);
      sc.b[0] = sigma;
      int row = 1;
      for (int j = 0; j < ns; ++j) {
        if (j == i) continue;
        sc.A.row(row++) = embed::re_functional(sub_h, i, j, n).transpose();
        sc.A.row(row++) = embed::im_functional(sub_h, i, j, n).transpose();
      }
      sc.g = embed::re_functional(sub_h, i, i, n) / std::sqrt(tau);
      sc.f = 0.0;
      prob.soc.push_back(std::move(sc));
      prob.lin.push_back({-embed::re_functional(sub_h, i, i, n), 0.0});
      prob.eq.push_back({embed::im_functional(sub_h, i, i, n), 0.0});
    }
    if (spec.power_caps.size() == ns && spec.power_caps[i] > 0.0) {
      convex::QuadConstraint qc;
      qc.P = Matrix::Zero(n, n);
      embed::add_column_power(qc.P, i, m);
      qc.q = Vector::Zero(n);
      qc.r = -spec.power_caps[i];
      prob.quad.push_back(std::move(qc));
    }
  }
  if (spec.total_cap > 0.0) {
    convex::QuadConstraint qc;
    qc.P = Matrix::Identity(n, n);
    qc.q = Vector::Zero(n);
    qc.r = -spec.total_cap;
    prob.quad.push_back(std::move(qc));
  }

  PowerMinResult res;
  const auto sol = convex::solve(prob, opts);
  res.status = sol.status;
  res.W = CMatrix::Zero(m, inst.n_users());
  if (sol.status == convex::SolveStatus::Optimal) {
    res.feasible = true;
    const CMatrix ws = embed::unpack_precoder(sol.x, ns, m);
    for (int i = 0; i < ns; ++i) res.W.col(spec.users[i]) = ws.col(i);
    res.power = res.W.squaredNorm();
  }
  return res;
}

}  // namespace jsp::socp
