#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

namespace jsp {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// One multiuser MISO downlink instance. Row i of H is the conjugated
/// channel of user i, so H(i,:) * W.col(j) is h_i^H w_j directly.
/// Thresholds in `eps` are linear-scale SINR targets.
struct ProblemInstance {
  CMatrix H;            // n_users x n_antennas
  double sigma2 = 1.0;  // noise variance, linear
  Vector alpha;         // sum-rate weights, one per user, > 0
  Vector beta;          // max-min SINR weights, one per user, > 0
  Vector eps;           // per-user SINR thresholds, linear, >= 0
  double p_total = 1.0; // total transmit power budget, linear

  int n_users() const { return static_cast<int>(H.rows()); }
  int n_antennas() const { return static_cast<int>(H.cols()); }

  // Throws std::invalid_argument when any invariant is broken.
  void validate() const;
};

/// Column i is the precoding vector of user i (n_antennas x n_users).
struct PrecoderSet {
  CMatrix W;
};

/// Relaxed scheduling variables, each in [0, 1].
struct SchedulingVector {
  Vector eta;
};

/// Ordered set of scheduled user indices, no duplicates.
struct ActiveSet {
  std::vector<int> indices;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double v) { return 10.0 * std::log10(v); }

/// Maps a rate requirement in bits to the equivalent SINR threshold.
inline double sinr_threshold_from_rate_bits(double rate_bits) {
  return std::pow(2.0, rate_bits) - 1.0;
}

}  // namespace jsp
