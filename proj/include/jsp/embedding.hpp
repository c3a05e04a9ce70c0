#pragma once

#include "jsp/types.hpp"

namespace jsp::embed {

// Real embedding of the precoder matrix: column j of W occupies the
// contiguous slice [2*M*j, 2*M*(j+1)) of the real decision vector, with
// each complex entry stored as (real, imag) in adjacent slots. Adapters
// append their own extra real variables after this block.

inline int precoder_dim(int n_users, int n_antennas) { return 2 * n_users * n_antennas; }
inline int col_offset(int j, int n_antennas) { return 2 * n_antennas * j; }

Vector pack_precoder(const CMatrix& W, int n_total);
CMatrix unpack_precoder(const Vector& x, int n_users, int n_antennas);

/// Linear functional a with a.dot(x) == Re(h_i^H w_j); length n_total.
Vector re_functional(const CMatrix& H, int i, int j, int n_total);

/// Linear functional a with a.dot(x) == Im(h_i^H w_j); length n_total.
Vector im_functional(const CMatrix& H, int i, int j, int n_total);

/// Adds the PSD quadratic form of |h_i^H w_j|^2 into P (both index into
/// the precoder block of an n_total-dimensional decision vector).
void add_cross_power(Matrix& P, const CMatrix& H, int i, int j);

/// Adds the quadratic form of ||w_j||^2 (identity over column j's slice).
void add_column_power(Matrix& P, int j, int n_antennas);

}  // namespace jsp::embed
