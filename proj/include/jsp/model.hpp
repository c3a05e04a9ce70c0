#pragma once

#include "jsp/types.hpp"

namespace jsp {

/// i.i.d. complex Gaussian channel matrix, zero mean, unit variance per
/// entry (real and imaginary parts each have variance 1/2). Bit-identical
/// for a fixed seed.
CMatrix generate_channel(int n_users, int n_antennas, std::uint64_t seed);

/// SINR of user i under precoder set W, interference summed over every
/// other column. Zero when w_i is zero.
double sinr(const ProblemInstance& inst, const CMatrix& W, int i);

/// Achievable rate log2(1 + sinr), in bits.
double rate(const ProblemInstance& inst, const CMatrix& W, int i);

/// Noise-plus-interference power seen by user i: sigma^2 + sum_{j != i} |h_i^H w_j|^2.
double interference(const ProblemInstance& inst, const CMatrix& W, int i);

/// Sum of squared column norms of W.
double total_power(const CMatrix& W);

}  // namespace jsp
