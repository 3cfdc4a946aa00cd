#include "edgespec/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace edgespec::symbols {

EigenBranchSet eigen_branches(const Matrix& m, double herm_tol) {
  require_hermitian(m, herm_tol, "eigen_branches");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(m));
  if (es.info() != Eigen::Success) throw Error("eigen_branches: eigensolver failed");
  const Eigen::Index n = m.rows();
  EigenBranchSet out;
  out.values = Vector(n);
  out.vectors = Matrix(n, n);
  // Solver returns ascending order; branches are indexed largest-first.
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = es.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  fix_column_phases(out.vectors);
  return out;
}

namespace {

void check_contour_clearance(const Vector& eigenvalues, const Contour& c,
                             const char* who) {
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    double dist = std::abs(Complex(eigenvalues(i), 0) - c.center);
    if (std::abs(dist - c.radius) < 1e-8 * c.radius) {
      std::ostringstream msg;
      msg << who << ": eigenvalue " << eigenvalues(i)
          << " lies within 1e-8*radius of the contour (center " << c.center.real()
          << (c.center.imag() < 0 ? "-" : "+") << std::abs(c.center.imag())
          << "i, radius " << c.radius << ")";
      throw Error(msg.str());
    }
  }
}

/// Trapezoid rule on the circle for (2 pi i)^{-1} \oint f(z) dz with
/// integrand values supplied by `f`. Exponentially accurate for analytic f.
Matrix contour_trapezoid(const std::function<Matrix(Complex)>& f, const Contour& c,
                         int nodes) {
  const Eigen::Index n = f(c.center + c.radius).rows();
  Matrix acc = Matrix::Zero(n, n);
  for (int k = 0; k < nodes; ++k) {
    double theta = 2.0 * M_PI * k / nodes;
    Complex w = std::polar(1.0, theta);
    Complex z = c.center + c.radius * w;
    acc += f(z) * (c.radius * w);
  }
  return acc / static_cast<double>(nodes);
}

}  // namespace

Matrix riesz_projector(const Matrix& m, const Contour& c) {
  require_hermitian(m, 1e-12, "riesz_projector");
  if (c.radius <= 0) throw Error("riesz_projector: contour radius must be positive");
  if (c.nodes < 8) throw Error("riesz_projector: contour needs at least 8 nodes");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(m), Eigen::EigenvaluesOnly);
  check_contour_clearance(es.eigenvalues(), c, "riesz_projector");

  const Eigen::Index n = m.rows();
  const Matrix id = Matrix::Identity(n, n);
  auto resolvent = [&](Complex z) -> Matrix { return (m - z * id).partialPivLu().solve(id); };

  double residual = std::numeric_limits<double>::infinity();
  Matrix p;
  for (int nodes = std::max(c.nodes, 8); nodes <= 1024; nodes *= 2) {
    p = contour_trapezoid(resolvent, c, nodes);
    residual = (p * p - p).norm();
    if (residual <= 1e-8) return p;
  }
  std::ostringstream msg;
  msg << "riesz_projector: quadrature did not converge, P^2-P residual " << residual;
  throw Error(msg.str());
}

Matrix resolvent_correction(const Matrix& a0, const Matrix& b,
                            const std::vector<Matrix>& da0_dx,
                            const std::vector<Matrix>& da0_dxi, const Contour& c) {
  require_hermitian(a0, 1e-12, "resolvent_correction");
  if (da0_dx.size() != da0_dxi.size())
    throw Error("resolvent_correction: mismatched derivative lists");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(a0), Eigen::EigenvaluesOnly);
  check_contour_clearance(es.eigenvalues(), c, "resolvent_correction");

  const Eigen::Index n = a0.rows();
  const Matrix id = Matrix::Identity(n, n);
  const Complex half_over_i(0.0, -0.5);  // 1/(2i)
  auto integrand = [&](Complex z) -> Matrix {
    Matrix r = (a0 - z * id).partialPivLu().solve(id);
    Matrix q = b;
    for (std::size_t j = 0; j < da0_dx.size(); ++j)
      q += half_over_i * (da0_dx[j] * r * da0_dxi[j]);
    return -(r * q * r);
  };

  // No projector identity to test against here; stop when node doubling
  // stabilizes the integral.
  Matrix prev;
  for (int nodes = std::max(c.nodes, 8); nodes <= 1024; nodes *= 2) {
    Matrix cur = contour_trapezoid(integrand, c, nodes);
    if (prev.size() > 0 && (cur - prev).norm() <= 1e-9 * std::max(1.0, cur.norm()))
      return cur;
    prev = cur;
  }
  throw Error("resolvent_correction: contour quadrature did not stabilize");
}

// ---------------------------------------------------------------------------
// MatrixPolynomial

MatrixPolynomial MatrixPolynomial::scalar_monomial(int d, Complex c,
                                                   const Eigen::ArrayXi& xpow,
                                                   const Eigen::ArrayXi& xipow) {
  MatrixPolynomial p(d, 1);
  Matrix coeff(1, 1);
  coeff(0, 0) = c;
  p.add_term(xpow, xipow, coeff);
  return p;
}

void MatrixPolynomial::absorb(const Term& t) {
  for (auto& u : terms_) {
    if ((u.xpow == t.xpow).all() && (u.xipow == t.xipow).all()) {
      u.coeff += t.coeff;
      return;
    }
  }
  terms_.push_back(t);
}

void MatrixPolynomial::add_term(const Eigen::ArrayXi& xpow, const Eigen::ArrayXi& xipow,
                                const Matrix& coeff) {
  if (xpow.size() != d_ || xipow.size() != d_)
    throw Error("MatrixPolynomial: exponent arrays must have length d");
  if ((xpow < 0).any() || (xipow < 0).any())
    throw Error("MatrixPolynomial: negative exponent");
  if (coeff.rows() != fiber_ || coeff.cols() != fiber_)
    throw Error("MatrixPolynomial: coefficient size mismatch");
  absorb(Term{xpow, xipow, coeff});
}

void MatrixPolynomial::add(const MatrixPolynomial& other) {
  if (other.d_ != d_ || other.fiber_ != fiber_)
    throw Error("MatrixPolynomial: dimension mismatch in add");
  for (const auto& t : other.terms_) absorb(t);
}

void MatrixPolynomial::scale(Complex s) {
  for (auto& t : terms_) t.coeff *= s;
}

Matrix MatrixPolynomial::evaluate(const Vector& x, const Vector& xi) const {
  Matrix acc = Matrix::Zero(fiber_, fiber_);
  for (const auto& t : terms_) {
    Complex m(1.0, 0.0);
    for (int j = 0; j < d_; ++j) {
      for (int p = 0; p < t.xpow(j); ++p) m *= x(j);
      for (int p = 0; p < t.xipow(j); ++p) m *= xi(j);
    }
    acc += m * t.coeff;
  }
  return acc;
}

MatrixPolynomial MatrixPolynomial::derivative_x(int axis) const {
  MatrixPolynomial out(d_, fiber_);
  for (const auto& t : terms_) {
    if (t.xpow(axis) == 0) continue;
    Term u = t;
    u.coeff *= static_cast<double>(t.xpow(axis));
    u.xpow(axis) -= 1;
    out.absorb(u);
  }
  return out;
}

MatrixPolynomial MatrixPolynomial::derivative_xi(int axis) const {
  MatrixPolynomial out(d_, fiber_);
  for (const auto& t : terms_) {
    if (t.xipow(axis) == 0) continue;
    Term u = t;
    u.coeff *= static_cast<double>(t.xipow(axis));
    u.xipow(axis) -= 1;
    out.absorb(u);
  }
  return out;
}

int MatrixPolynomial::xi_degree() const {
  int deg = 0;
  for (const auto& t : terms_)
    if (t.coeff.norm() > 0) deg = std::max(deg, static_cast<int>(t.xipow.sum()));
  return deg;
}

bool MatrixPolynomial::equals(const MatrixPolynomial& other, double tol) const {
  MatrixPolynomial diff = *this;
  MatrixPolynomial negated = other;
  negated.scale(Complex(-1.0, 0.0));
  diff.add(negated);
  for (const auto& t : diff.terms_)
    if (t.coeff.norm() > tol) return false;
  return true;
}

// ---------------------------------------------------------------------------
// SymbolComponent

SymbolComponent SymbolComponent::from_function(int order, int d, int fiber,
                                               SymbolEvaluator f, bool homogeneous) {
  SymbolComponent c;
  c.order_ = order;
  c.d_ = d;
  c.fiber_ = fiber;
  c.homogeneous_ = homogeneous;
  c.eval_ = std::move(f);
  return c;
}

SymbolComponent SymbolComponent::homogeneous(int order, int d, int fiber,
                                             SymbolEvaluator f_on_sphere,
                                             double reg_scale) {
  if (reg_scale <= 0) throw Error("SymbolComponent: regularization scale must be positive");
  SymbolComponent c;
  c.order_ = order;
  c.d_ = d;
  c.fiber_ = fiber;
  c.homogeneous_ = true;
  c.eval_ = [order, d, f = std::move(f_on_sphere), reg_scale](const Vector& x,
                                                              const Vector& xi) {
    double norm = xi.norm();
    Vector omega;
    if (norm < 1e-300) {
      omega = Vector::Zero(d);
      omega(0) = 1.0;
    } else {
      omega = xi / norm;
    }
    double mag = std::pow(reg_scale * reg_scale + norm * norm, 0.5 * order);
    return Matrix(mag * f(x, omega));
  };
  return c;
}

SymbolComponent SymbolComponent::polynomial(const MatrixPolynomial& p) {
  return polynomial(p, p.xi_degree());
}

SymbolComponent SymbolComponent::polynomial(const MatrixPolynomial& p, int declared_order) {
  SymbolComponent c;
  c.order_ = declared_order;
  c.d_ = p.dimension();
  c.fiber_ = p.fiber();
  c.homogeneous_ = false;
  c.poly_ = p;
  c.eval_ = [p](const Vector& x, const Vector& xi) { return p.evaluate(x, xi); };
  return c;
}

// ---------------------------------------------------------------------------
// PolyhomSymbol

PolyhomSymbol::PolyhomSymbol(int d, int fiber, std::vector<SymbolComponent> components,
                             double regularization_scale)
    : d_(d), fiber_(fiber), reg_scale_(regularization_scale), comps_(std::move(components)) {
  if (comps_.empty()) throw Error("PolyhomSymbol: needs at least one component");
  if (reg_scale_ <= 0) throw Error("PolyhomSymbol: regularization scale must be positive");
  for (const auto& c : comps_) {
    if (c.dimension() != d_ || c.fiber() != fiber_)
      throw Error("PolyhomSymbol: component dimension mismatch");
  }
  for (std::size_t i = 1; i < comps_.size(); ++i) {
    if (comps_[i].order() >= comps_[i - 1].order())
      throw Error("PolyhomSymbol: component orders must be strictly decreasing");
  }
}

const SymbolComponent* PolyhomSymbol::component(int order) const {
  for (const auto& c : comps_)
    if (c.order() == order) return &c;
  return nullptr;
}

Matrix PolyhomSymbol::evaluate(const Vector& x, const Vector& xi) const {
  Matrix acc = Matrix::Zero(fiber_, fiber_);
  for (const auto& c : comps_) acc += c.evaluate(x, xi);
  return acc;
}

Matrix PolyhomSymbol::principal(const Vector& x, const Vector& xi) const {
  return comps_.front().evaluate(x, xi);
}

// ---------------------------------------------------------------------------
// Subprincipal symbol

namespace {

/// Central mixed derivative d_xi_j d_x_j f at (x, xi) with step h.
Matrix mixed_derivative(const SymbolEvaluator& f, const Vector& x, const Vector& xi,
                        int j, double h) {
  Vector xp = x, xm = x;
  xp(j) += h;
  xm(j) -= h;
  Vector xip = xi, xim = xi;
  xip(j) += h;
  xim(j) -= h;
  return (f(xp, xip) - f(xp, xim) - f(xm, xip) + f(xm, xim)) / (4.0 * h * h);
}

}  // namespace

Matrix subprincipal_symbol(const PolyhomSymbol& s, const Vector& x, const Vector& xi) {
  if (xi.norm() == 0.0)
    throw Error("subprincipal_symbol: xi = 0 (symbol is singular there)");
  const SymbolComponent* a0 = s.component(0);
  const SymbolComponent* am1 = s.component(-1);
  if (!a0 || !am1)
    throw Error("subprincipal_symbol: symbol needs components of orders 0 and -1");

  Matrix acc = am1->evaluate(x, xi);
  const double h = 1e-4 * std::max(1.0, xi.norm());
  SymbolEvaluator f = [a0](const Vector& xx, const Vector& xxi) {
    return a0->evaluate(xx, xxi);
  };
  const Complex half_over_i(0.0, -0.5);  // 1/(2i)
  for (int j = 0; j < s.dimension(); ++j) {
    Matrix coarse = mixed_derivative(f, x, xi, j, h);
    Matrix fine = mixed_derivative(f, x, xi, j, h / 2.0);
    Matrix richardson = (4.0 * fine - coarse) / 3.0;
    acc += half_over_i * richardson;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Quantization conversion

namespace {

std::vector<Eigen::ArrayXi> multi_indices(int d, int max_total) {
  std::vector<Eigen::ArrayXi> out;
  Eigen::ArrayXi cur = Eigen::ArrayXi::Zero(d);
  std::function<void(int, int)> rec = [&](int axis, int remaining) {
    if (axis == d) {
      if (cur.sum() >= 1) out.push_back(cur);
      return;
    }
    for (int a = 0; a <= remaining; ++a) {
      cur(axis) = a;
      rec(axis + 1, remaining - a);
    }
    cur(axis) = 0;
  };
  rec(0, max_total);
  return out;
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

/// Nested central differences for a mixed derivative given by a flat list of
/// (in_x, axis) steps. Evaluations grow exponentially in the derivative
/// order, which stays <= 4 here.
Matrix nested_difference(const SymbolEvaluator& f,
                         const std::vector<std::pair<bool, int>>& steps, std::size_t k,
                         const Vector& x, const Vector& xi, double h) {
  if (k == steps.size()) return f(x, xi);
  auto [in_x, axis] = steps[k];
  Vector xp = x, xm = x, xip = xi, xim = xi;
  if (in_x) {
    xp(axis) += h;
    xm(axis) -= h;
    return (nested_difference(f, steps, k + 1, xp, xi, h) -
            nested_difference(f, steps, k + 1, xm, xi, h)) /
           (2.0 * h);
  }
  xip(axis) += h;
  xim(axis) -= h;
  return (nested_difference(f, steps, k + 1, x, xip, h) -
          nested_difference(f, steps, k + 1, x, xim, h)) /
         (2.0 * h);
}

struct Contribution {
  Complex scale;
  const SymbolComponent* comp;
  Eigen::ArrayXi alpha;  // empty means the identity (alpha = 0) term
};

}  // namespace

PolyhomSymbol convert_quantization(const PolyhomSymbol& s, QuantizationChange dir,
                                   int order_cutoff) {
  if (order_cutoff < -2) throw Error("convert_quantization: order_cutoff must be >= -2");
  // a_W = sum (1/a!) (i/2)^|a| dxi^a dx^a a_l ; the inverse flips the sign.
  const Complex base = dir == QuantizationChange::left_to_weyl ? Complex(0.0, 0.5)
                                                               : Complex(0.0, -0.5);
  const int d = s.dimension();

  std::map<int, std::vector<Contribution>, std::greater<int>> buckets;
  for (const auto& comp : s.components()) {
    if (comp.order() >= order_cutoff)
      buckets[comp.order()].push_back({Complex(1.0, 0.0), &comp, Eigen::ArrayXi()});
    int max_len = comp.order() - order_cutoff;
    if (max_len < 1) continue;
    for (const auto& alpha : multi_indices(d, max_len)) {
      int len = alpha.sum();
      if (!comp.has_polynomial() && len > 2)
        throw Error("convert_quantization: derivative order > 2 requires a polynomial "
                    "component (finite differences are unreliable beyond that)");
      double fact = 1.0;
      for (int j = 0; j < d; ++j) fact *= factorial(alpha(j));
      Complex scale = std::pow(base, len) / fact;
      buckets[comp.order() - len].push_back({scale, &comp, alpha});
    }
  }

  std::vector<SymbolComponent> out;
  for (const auto& [order, contributions] : buckets) {
    // Pass-through components stay as they are (keeps homogeneity/polynomial data).
    if (contributions.size() == 1 && contributions[0].alpha.size() == 0) {
      out.push_back(*contributions[0].comp);
      continue;
    }
    bool all_poly = std::all_of(contributions.begin(), contributions.end(),
                                [](const Contribution& c) {
                                  return c.comp->has_polynomial();
                                });
    if (all_poly) {
      MatrixPolynomial sum(d, s.fiber());
      for (const auto& c : contributions) {
        MatrixPolynomial p = c.comp->poly();
        if (c.alpha.size() != 0) {
          for (int j = 0; j < d; ++j)
            for (int rep = 0; rep < c.alpha(j); ++rep)
              p = p.derivative_x(j).derivative_xi(j);
        }
        p.scale(c.scale);
        sum.add(p);
      }
      bool vanished = true;
      for (const auto& t : sum.terms())
        if (t.coeff.norm() > 0) vanished = false;
      if (!vanished) out.push_back(SymbolComponent::polynomial(sum, order));
      continue;
    }
    std::vector<Contribution> captured = contributions;
    int fiber = s.fiber();
    SymbolEvaluator eval = [captured, d, fiber](const Vector& x, const Vector& xi) {
      Matrix acc = Matrix::Zero(fiber, fiber);
      for (const auto& c : captured) {
        if (c.alpha.size() == 0) {
          acc += c.scale * c.comp->evaluate(x, xi);
          continue;
        }
        if (c.comp->has_polynomial()) {
          MatrixPolynomial p = c.comp->poly();
          for (int j = 0; j < d; ++j)
            for (int rep = 0; rep < c.alpha(j); ++rep)
              p = p.derivative_x(j), p = p.derivative_xi(j);
          acc += c.scale * p.evaluate(x, xi);
          continue;
        }
        std::vector<std::pair<bool, int>> steps;
        for (int j = 0; j < d; ++j)
          for (int rep = 0; rep < c.alpha(j); ++rep) {
            steps.emplace_back(true, j);
            steps.emplace_back(false, j);
          }
        double h = 1e-4 * std::max(1.0, xi.norm());
        SymbolEvaluator f = [comp = c.comp](const Vector& xx, const Vector& xxi) {
          return comp->evaluate(xx, xxi);
        };
        acc += c.scale * nested_difference(f, steps, 0, x, xi, h);
      }
      return acc;
    };
    out.push_back(SymbolComponent::from_function(order, d, s.fiber(), eval, false));
  }
  return PolyhomSymbol(d, s.fiber(), std::move(out), s.regularization_scale());
}

// ---------------------------------------------------------------------------
// Essential spectrum

std::vector<Interval> merge_intervals(std::vector<Interval> intervals, double tol) {
  if (intervals.empty()) return intervals;
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  merged.push_back(intervals.front());
  for (std::size_t i = 1; i < intervals.size(); ++i) {
    if (intervals[i].lo <= merged.back().hi + tol)
      merged.back().hi = std::max(merged.back().hi, intervals[i].hi);
    else
      merged.push_back(intervals[i]);
  }
  return merged;
}

std::vector<Interval> essential_spectrum(const PolyhomSymbol& s,
                                         const std::vector<Vector>& x_samples,
                                         const std::vector<Vector>& omega_samples) {
  if (x_samples.empty() || omega_samples.empty())
    throw Error("essential_spectrum: sample sets must be nonempty");
  const int n = s.fiber();
  Vector lo = Vector::Constant(n, std::numeric_limits<double>::infinity());
  Vector hi = Vector::Constant(n, -std::numeric_limits<double>::infinity());
  for (const auto& x : x_samples) {
    for (const auto& omega : omega_samples) {
      EigenBranchSet br = eigen_branches(hermitize(s.principal(x, omega)));
      for (int i = 0; i < n; ++i) {
        lo(i) = std::min(lo(i), br.values(i));
        hi(i) = std::max(hi(i), br.values(i));
      }
    }
  }
  std::vector<Interval> intervals;
  for (int i = 0; i < n; ++i) intervals.push_back({lo(i), hi(i)});
  return merge_intervals(std::move(intervals));
}

}  // namespace edgespec::symbols
