#include "jsp/report.hpp"

namespace jsp {

std::vector<int> schedule_from_eta(const Vector& eta) {
  std::vector<int> out;
  for (int i = 0; i < eta.size(); ++i)
    if (eta[i] > 0.5) out.push_back(i);
  return out;
}

}  // namespace jsp
