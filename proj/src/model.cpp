#include "jsp/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace jsp {

void ProblemInstance::validate() const {
  const int n = n_users();
  const int m = n_antennas();
  if (n < 1 || m < 1) throw std::invalid_argument("instance: empty channel matrix");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("instance: sigma2 must be positive");
  if (!(p_total > 0.0)) throw std::invalid_argument("instance: p_total must be positive");
  auto check_weights = [n](const Vector& v, const char* what) {
    if (v.size() != n) throw std::invalid_argument(std::string("instance: bad length for ") + what);
    if ((v.array() <= 0.0).any()) throw std::invalid_argument(std::string("instance: nonpositive ") + what);
  };
  check_weights(alpha, "alpha");
  check_weights(beta, "beta");
  if (eps.size() != n) throw std::invalid_argument("instance: bad length for eps");
  if ((eps.array() < 0.0).any()) throw std::invalid_argument("instance: negative eps");
  if (!H.allFinite()) throw std::invalid_argument("instance: non-finite channel entries");
}

namespace {

// Uniform in (0,1], bit-exact given the engine stream.
inline double unit_open(std::mt19937_64& gen) {
  return (static_cast<double>(gen() >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

CMatrix generate_channel(int n_users, int n_antennas, std::uint64_t seed) {
  if (n_users < 1 || n_antennas < 1)
    throw std::invalid_argument("generate_channel: dimensions must be >= 1");
  std::mt19937_64 gen(seed);
  CMatrix H(n_users, n_antennas);
  constexpr double two_pi = 6.283185307179586476925286766559;
  for (int i = 0; i < n_users; ++i) {
    for (int m = 0; m < n_antennas; ++m) {
      // Box-Muller pair scaled so that E|h|^2 = 1.
      const double u1 = unit_open(gen);
      const double u2 = unit_open(gen);
      const double r = std::sqrt(-std::log(u1));
      H(i, m) = Complex(r * std::cos(two_pi * u2), r * std::sin(two_pi * u2));
    }
  }
  return H;
}

double interference(const ProblemInstance& inst, const CMatrix& W, int i) {
  double acc = inst.sigma2;
  for (int j = 0; j < W.cols(); ++j) {
    if (j == i) continue;
    acc += std::norm(Complex(inst.H.row(i) * W.col(j)));
  }
  return acc;
}

double sinr(const ProblemInstance& inst, const CMatrix& W, int i) {
  const double signal = std::norm(Complex(inst.H.row(i) * W.col(i)));
  return signal / interference(inst, W, i);
}

double rate(const ProblemInstance& inst, const CMatrix& W, int i) {
  return std::log2(1.0 + sinr(inst, W, i));
}

double total_power(const CMatrix& W) { return W.squaredNorm(); }

}  // namespace jsp
