#ifndef EDGESPEC_TEST_HELPERS_HPP
#define EDGESPEC_TEST_HELPERS_HPP

#include <random>

#include "edgespec/common.hpp"

namespace edgespec::testing {

inline Matrix random_hermitian(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) a(j, k) = Complex(g(rng), g(rng)) * scale;
  return hermitize(a);
}

inline Matrix random_unitary(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) a(j, k) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ();
  // Fix the diagonal phases of R so Q is Haar-like and reproducible.
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    Complex d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

/// Hermitian matrix with prescribed eigenvalues in a random frame.
inline Matrix hermitian_with_spectrum(std::mt19937_64& rng, const Vector& eigs) {
  Matrix u = random_unitary(rng, static_cast<int>(eigs.size()));
  return hermitize(u * eigs.asDiagonal() * u.adjoint());
}

inline Matrix random_psd(std::mt19937_64& rng, int n, double scale = 1.0) {
  Matrix a = random_hermitian(rng, n, scale);
  return hermitize(a * a.adjoint());
}

}  // namespace edgespec::testing

#endif
