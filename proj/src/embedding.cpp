#include "jsp/embedding.hpp"

#include <stdexcept>

namespace jsp::embed {

Vector pack_precoder(const CMatrix& W, int n_total) {
  const int m = static_cast<int>(W.rows());
  const int n = static_cast<int>(W.cols());
  if (n_total < precoder_dim(n, m)) throw std::invalid_argument("pack_precoder: vector too short");
  Vector x = Vector::Zero(n_total);
  for (int j = 0; j < n; ++j) {
    const int off = col_offset(j, m);
    for (int k = 0; k < m; ++k) {
      x[off + 2 * k] = W(k, j).real();
      x[off + 2 * k + 1] = W(k, j).imag();
    }
  }
  return x;
}

CMatrix unpack_precoder(const Vector& x, int n_users, int n_antennas) {
  if (x.size() < precoder_dim(n_users, n_antennas))
    throw std::invalid_argument("unpack_precoder: vector too short");
  CMatrix W(n_antennas, n_users);
  for (int j = 0; j < n_users; ++j) {
    const int off = col_offset(j, n_antennas);
    for (int k = 0; k < n_antennas; ++k)
      W(k, j) = Complex(x[off + 2 * k], x[off + 2 * k + 1]);
  }
  return W;
}

// h_i^H w_j = sum_m H(i,m) w_j[m]; with H(i,m) = p+iq and w = u+iv the
// real part is p*u - q*v and the imaginary part q*u + p*v.
Vector re_functional(const CMatrix& H, int i, int j, int n_total) {
  const int m = static_cast<int>(H.cols());
  Vector a = Vector::Zero(n_total);
  const int off = col_offset(j, m);
  for (int k = 0; k < m; ++k) {
    a[off + 2 * k] = H(i, k).real();
    a[off + 2 * k + 1] = -H(i, k).imag();
  }
  return a;
}

Vector im_functional(const CMatrix& H, int i, int j, int n_total) {
  const int m = static_cast<int>(H.cols());
  Vector a = Vector::Zero(n_total);
  const int off = col_offset(j, m);
  for (int k = 0; k < m; ++k) {
    a[off + 2 * k] = H(i, k).imag();
    a[off + 2 * k + 1] = H(i, k).real();
  }
  return a;
}

void add_cross_power(Matrix& P, const CMatrix& H, int i, int j) {
  const int m = static_cast<int>(H.cols());
  const int off = col_offset(j, m);
  // Rank-2 form restricted to column j's slice; assembled in place to
  // avoid building full-length functionals.
  Vector ar(2 * m), ai(2 * m);
  for (int k = 0; k < m; ++k) {
    ar[2 * k] = H(i, k).real();
    ar[2 * k + 1] = -H(i, k).imag();
    ai[2 * k] = H(i, k).imag();
    ai[2 * k + 1] = H(i, k).real();
  }
  P.block(off, off, 2 * m, 2 * m) += ar * ar.transpose() + ai * ai.transpose();
}

void add_column_power(Matrix& P, int j, int n_antennas) {
  const int off = col_offset(j, n_antennas);
  P.block(off, off, 2 * n_antennas, 2 * n_antennas) +=
      Matrix::Identity(2 * n_antennas, 2 * n_antennas);
}

}  // namespace jsp::embed
