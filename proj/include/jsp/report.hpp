#pragma once

#include "jsp/ccp.hpp"
#include "jsp/types.hpp"

#include <string>
#include <vector>

namespace jsp {

/// Outcome of one algorithm run on one instance.
struct RunReport {
  std::string algorithm;
  ccp::CcpReport ccp;            // empty for single-shot solvers
  std::vector<int> schedule;     // selected users after rounding
  CMatrix W;                     // final precoders, unscheduled columns zeroed
  Vector eta;                    // final relaxed scheduling variables
  double metric = 0.0;           // WSR in bits | weighted min SINR, linear | total power, linear
  double total_power = 0.0;
  bool feasible = false;         // scheduling + SINR constraints met at the reported state
  double max_violation = 0.0;
  double wall_time_s = 0.0;
  bool failed = false;
  std::string failure_reason;
};

/// Users with eta above 1/2; exact ties stay unscheduled.
std::vector<int> schedule_from_eta(const Vector& eta);

}  // namespace jsp
