#ifndef EDGESPEC_SYMBOLS_HPP
#define EDGESPEC_SYMBOLS_HPP

#include <functional>
#include <optional>
#include <vector>

#include "edgespec/common.hpp"

namespace edgespec::symbols {

/// Eigenvalue branches of a Hermitian matrix, sorted non-increasing, with
/// orthonormal eigenvectors (columns) under the deterministic phase convention.
struct EigenBranchSet {
  Vector values;
  Matrix vectors;
};

EigenBranchSet eigen_branches(const Matrix& m, double herm_tol = 1e-12);

/// Circular contour in the complex plane used for resolvent quadrature.
struct Contour {
  Complex center;
  double radius = 1.0;
  int nodes = 64;
};

/// Spectral projector onto the eigenvalues of m strictly inside the contour,
/// via trapezoid quadrature of the resolvent. Nodes double (up to 1024) until
/// the P^2 - P residual falls below 1e-8.
Matrix riesz_projector(const Matrix& m, const Contour& c);

/// Order -1 correction of the projected symbol: the contour integral of
///   c(z) = -(a0 - z)^{-1} q(z) (a0 - z)^{-1},
///   q(z) = b + (1/2i) sum_j (d_x_j a0) (a0 - z)^{-1} (d_xi_j a0).
Matrix resolvent_correction(const Matrix& a0, const Matrix& b,
                            const std::vector<Matrix>& da0_dx,
                            const std::vector<Matrix>& da0_dxi, const Contour& c);

/// Matrix-valued polynomial in (x, xi): sum of coeff * x^a * xi^b terms.
/// Exact derivatives make quantization conversions exact on polynomial data.
class MatrixPolynomial {
public:
  struct Term {
    Eigen::ArrayXi xpow;
    Eigen::ArrayXi xipow;
    Matrix coeff;
  };

  MatrixPolynomial(int d, int fiber) : d_(d), fiber_(fiber) {}

  static MatrixPolynomial scalar_monomial(int d, Complex c,
                                          const Eigen::ArrayXi& xpow,
                                          const Eigen::ArrayXi& xipow);

  void add_term(const Eigen::ArrayXi& xpow, const Eigen::ArrayXi& xipow,
                const Matrix& coeff);
  void add(const MatrixPolynomial& other);
  void scale(Complex s);

  Matrix evaluate(const Vector& x, const Vector& xi) const;
  MatrixPolynomial derivative_x(int axis) const;
  MatrixPolynomial derivative_xi(int axis) const;

  int dimension() const { return d_; }
  int fiber() const { return fiber_; }
  bool empty() const { return terms_.empty(); }
  const std::vector<Term>& terms() const { return terms_; }

  /// Max total degree in xi (the symbol order of a polynomial component).
  int xi_degree() const;

  bool equals(const MatrixPolynomial& other, double tol) const;

private:
  void absorb(const Term& t);

  int d_;
  int fiber_;
  std::vector<Term> terms_;
};

using SymbolEvaluator = std::function<Matrix(const Vector& x, const Vector& xi)>;

/// One homogeneous (or general) component of a polyhomogeneous symbol.
class SymbolComponent {
public:
  static SymbolComponent from_function(int order, int d, int fiber,
                                       SymbolEvaluator f, bool homogeneous = false);

  /// Builds the regularized evaluator (reg^2 + |xi|^2)^(order/2) * f(x, omega)
  /// from a function on the unit sphere in xi. At xi = 0 the direction
  /// defaults to the first axis.
  static SymbolComponent homogeneous(int order, int d, int fiber,
                                     SymbolEvaluator f_on_sphere, double reg_scale);

  static SymbolComponent polynomial(const MatrixPolynomial& p);
  static SymbolComponent polynomial(const MatrixPolynomial& p, int declared_order);

  int order() const { return order_; }
  int dimension() const { return d_; }
  int fiber() const { return fiber_; }
  bool is_homogeneous() const { return homogeneous_; }
  bool has_polynomial() const { return poly_.has_value(); }
  const MatrixPolynomial& poly() const { return *poly_; }

  Matrix evaluate(const Vector& x, const Vector& xi) const { return eval_(x, xi); }

private:
  SymbolComponent() = default;
  int order_ = 0;
  int d_ = 1;
  int fiber_ = 1;
  bool homogeneous_ = false;
  SymbolEvaluator eval_;
  std::optional<MatrixPolynomial> poly_;
};

/// Matrix-valued polyhomogeneous symbol: components with strictly decreasing
/// orders (classically starting at 0; polynomial test symbols may lead with a
/// positive order).
class PolyhomSymbol {
public:
  PolyhomSymbol(int d, int fiber, std::vector<SymbolComponent> components,
                double regularization_scale = 1.0);

  int dimension() const { return d_; }
  int fiber() const { return fiber_; }
  double regularization_scale() const { return reg_scale_; }
  const std::vector<SymbolComponent>& components() const { return comps_; }
  const SymbolComponent* component(int order) const;
  int leading_order() const { return comps_.front().order(); }

  Matrix evaluate(const Vector& x, const Vector& xi) const;
  Matrix principal(const Vector& x, const Vector& xi) const;

private:
  int d_;
  int fiber_;
  double reg_scale_;
  std::vector<SymbolComponent> comps_;
};

/// Invariant subprincipal symbol a_{-1} + (1/2i) sum_j d_xi_j d_x_j a_0,
/// the mixed derivatives by Richardson-extrapolated central differences.
Matrix subprincipal_symbol(const PolyhomSymbol& s, const Vector& x, const Vector& xi);

enum class QuantizationChange { weyl_to_left, left_to_weyl };

/// Applies the quantization-change derivative series truncated at order_cutoff.
PolyhomSymbol convert_quantization(const PolyhomSymbol& s, QuantizationChange dir,
                                   int order_cutoff);

/// Per-branch min/max of the principal symbol's eigenvalues over the sample
/// sets, merged where overlapping. Degenerate intervals are points.
std::vector<Interval> essential_spectrum(const PolyhomSymbol& s,
                                         const std::vector<Vector>& x_samples,
                                         const std::vector<Vector>& omega_samples);

/// Merges a list of closed intervals, joining any that overlap or touch.
std::vector<Interval> merge_intervals(std::vector<Interval> intervals, double tol = 0.0);

}  // namespace edgespec::symbols

#endif
