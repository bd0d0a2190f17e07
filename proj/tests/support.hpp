#pragma once

#include "ionlink/density.hpp"

#include <Eigen/QR>

#include <random>

namespace test_support {

using ionlink::Complex;

inline Eigen::MatrixXcd random_unitary(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
}

inline Eigen::VectorXcd random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  return v.normalized();
}

// Random mixed two-ion state: A A^dagger / Tr.
inline ionlink::DensityMatrix random_ion_state(std::mt19937_64& rng, int rank = 4) {
  Eigen::MatrixXcd a(4, rank);
  for (int k = 0; k < rank; ++k) a.col(k) = random_vector(4, rng);
  Eigen::MatrixXcd rho = a * a.adjoint();
  rho /= rho.trace().real();
  return {rho, ionlink::Subsystem::Ions};
}

inline double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace test_support
