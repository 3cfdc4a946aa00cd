#ifndef EDGESPEC_COMMON_HPP
#define EDGESPEC_COMMON_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace edgespec {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;

/// Error type for precondition violations and failed numerical contracts.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Relative Hermiticity defect ||A - A*|| / max(||A||, eps).
inline double hermiticity_defect(const Matrix& a) {
  double scale = a.norm();
  if (scale < 1e-300) return 0.0;
  return (a - a.adjoint()).norm() / scale;
}

inline void require_hermitian(const Matrix& a, double tol = 1e-12,
                              const std::string& who = "matrix") {
  double defect = hermiticity_defect(a);
  if (defect > tol)
    throw Error(who + ": not Hermitian, relative defect " + std::to_string(defect) +
                " exceeds tolerance " + std::to_string(tol));
}

inline Matrix hermitize(const Matrix& a) { return (a + a.adjoint()) / 2.0; }

/// Column phases fixed so the largest-magnitude entry is real non-negative
/// (ties broken by lowest index).
inline void fix_column_phases(Matrix& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index imax = 0;
    double best = std::abs(vectors(0, c));
    for (Eigen::Index r = 1; r < vectors.rows(); ++r) {
      double m = std::abs(vectors(r, c));
      if (m > best) {
        best = m;
        imax = r;
      }
    }
    if (best > 0.0) {
      Complex phase = vectors(imax, c) / best;
      vectors.col(c) *= std::conj(phase);
    }
  }
}

/// C^2 ramp: 0 for s <= lo, 1 for s >= hi, quintic smoothstep in between.
inline double smoothstep(double s, double lo, double hi) {
  if (s <= lo) return 0.0;
  if (s >= hi) return 1.0;
  double u = (s - lo) / (hi - lo);
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

/// splitmix64: derives well-separated stream seeds from a base seed.
inline std::uint64_t split_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool is_point(double tol = 0.0) const { return hi - lo <= tol; }
};

}  // namespace edgespec

#endif
