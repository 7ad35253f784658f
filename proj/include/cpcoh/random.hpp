#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace cpcoh {

using Rng = std::mt19937_64;

/// Circular complex Gaussian with E|z|^2 = stddev^2.
inline std::complex<double> complex_gaussian(Rng& rng, double stddev = 1.0) {
  std::normal_distribution<double> normal(0.0, stddev / std::sqrt(2.0));
  const double re = normal(rng);
  const double im = normal(rng);
  return {re, im};
}

inline Eigen::VectorXcd random_complex_vector(Eigen::Index n, Rng& rng) {
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = complex_gaussian(rng);
  return v;
}

inline Eigen::VectorXcd random_unit_vector(Eigen::Index n, Rng& rng) {
  Eigen::VectorXcd v = random_complex_vector(n, rng);
  while (v.norm() == 0.0) v = random_complex_vector(n, rng);
  return v / v.norm();
}

/// Haar-distributed unitary via QR of a complex Gaussian matrix.
inline Eigen::MatrixXcd random_unitary(Eigen::Index n, Rng& rng) {
  Eigen::MatrixXcd z(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) z(i, j) = complex_gaussian(rng);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

}  // namespace cpcoh
