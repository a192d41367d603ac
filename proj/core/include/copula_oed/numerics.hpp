#pragma once

// Shared numerical kernels: finite differences, quadrature, bracketed root
// finding and small dense symmetric linear algebra.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "copula_oed/errors.hpp"

namespace copula_oed {

/// Dense symmetric matrix. Every mutation writes both (i,j) and (j,i), so the
/// stored entries are exactly symmetric at all times.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim);

  static SymMatrix identity(std::size_t dim);
  static SymMatrix diagonal(std::span<const double> diag);
  /// Symmetrizes `m` as (m + mᵀ)/2. Throws DomainError for non-square input.
  static SymMatrix from_dense(const Eigen::MatrixXd& m);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(data_.rows()); }
  double operator()(std::size_t i, std::size_t j) const { return data_(i, j); }
  void set(std::size_t i, std::size_t j, double value);

  /// this += scale * g gᵀ
  void add_outer(std::span<const double> g, double scale = 1.0);
  /// this += scale * other
  void add_scaled(const SymMatrix& other, double scale);

  /// Principal sub-block [start, start + size)².
  SymMatrix block(std::size_t start, std::size_t size) const;
  /// Rows/columns reordered so that new index k is old index order[k].
  SymMatrix permuted(std::span<const std::size_t> order) const;

  const Eigen::MatrixXd& dense() const noexcept { return data_; }
  double frobenius_norm() const { return data_.norm(); }

  SymMatrix& operator*=(double c);
  friend SymMatrix operator*(double c, SymMatrix m) { return m *= c; }
  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) {
    a.add_scaled(b, 1.0);
    return a;
  }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) {
    a.add_scaled(b, -1.0);
    return a;
  }

 private:
  Eigen::MatrixXd data_;
};

/// Cholesky factorization M = L Lᵀ with an explicit positive-definiteness
/// check: a pivot below kPivotTolerance * max(diag M) is rejected.
class Cholesky {
 public:
  static constexpr double kPivotTolerance = 1e-12;

  /// Throws SingularMatrixError carrying the failing pivot index.
  explicit Cholesky(const SymMatrix& m);

  double log_determinant() const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
  SymMatrix inverse() const;
  const Eigen::MatrixXd& lower() const noexcept { return lower_; }

 private:
  Eigen::MatrixXd lower_;
};

double logdet_psd(const SymMatrix& m);
SymMatrix inverse_spd(const SymMatrix& m);

/// M11 − M12 M22⁻¹ M12ᵀ for the leading s×s block. Requires 1 ≤ s < dim.
SymMatrix schur_complement(const SymMatrix& m, std::size_t s);

// ---------------------------------------------------------------------------
// Differentiation

using ScalarFunction = std::function<double(std::span<const double>)>;
using VectorFunction = std::function<std::vector<double>(std::span<const double>)>;

/// Default step floor; coordinate i uses max(h, h·|pᵢ|).
inline constexpr double kDefaultFdStep = 1e-5;

/// Central-difference gradient refined by one Richardson extrapolation step
/// (steps h and h/2). Error is O(h⁴) for smooth f.
std::vector<double> grad_fd(const ScalarFunction& f, std::span<const double> p,
                            double h = kDefaultFdStep);

/// Jacobian of a vector function, rows = outputs, columns = coordinates of p.
/// Same stencil as grad_fd.
Eigen::MatrixXd jacobian_fd(const VectorFunction& f, std::span<const double> p,
                            double h = kDefaultFdStep);

// ---------------------------------------------------------------------------
// Quadrature

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double width() const noexcept { return hi - lo; }
};

struct Rectangle {
  Interval u{};
  Interval v{};
};

/// One-dimensional rule ∫ f ≈ Σ wᵢ f(xᵢ).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  Interval domain{};

  std::size_t size() const noexcept { return nodes.size(); }

  /// Gauss–Legendre rule with `order` nodes on `domain`.
  static QuadratureRule gauss_legendre(std::size_t order, Interval domain = {});
  /// `panels` equal sub-intervals, each with an `order`-point Gauss–Legendre rule.
  static QuadratureRule composite_gauss_legendre(std::size_t order, std::size_t panels,
                                                 Interval domain = {});
  /// Gauss–Hermite rule for the standard normal weight (weights sum to 1).
  static QuadratureRule gauss_hermite(std::size_t order);
};

/// Adaptive Gauss–Kronrod integration on a finite interval.
double integrate_1d(const std::function<double(double)>& f, Interval domain,
                    double tolerance = 1e-13);

using BivariateFunction = std::function<double(double, double)>;

/// Tensor Gauss–Legendre approximation on panels graded toward the edges of
/// `region`, `order` nodes per panel. Suited to densities with corner poles.
double integrate_2d(const BivariateFunction& f, const Rectangle& region, std::size_t order);

/// Tensor product of two arbitrary rules.
double integrate_2d(const BivariateFunction& f, const QuadratureRule& rule_u,
                    const QuadratureRule& rule_v);

// ---------------------------------------------------------------------------
// Root finding

/// Bracketed root search (TOMS 748, a Brent-family method). Returns x with
/// |f(x)| ≤ tol or a final bracket narrower than tol. Throws BracketError
/// when f(lo) and f(hi) share a sign.
double find_root(const std::function<double(double)>& f, Interval bracket, double tol);

// ---------------------------------------------------------------------------
// Standard normal helpers

double normal_pdf(double z);
double normal_log_pdf(double z);
double normal_cdf(double z);
/// log Φ(z), accurate in the far lower tail.
double normal_log_cdf(double z);
/// Φ⁻¹(p) for p in (0,1).
double normal_quantile(double p);
/// Φ⁻¹(1 − q), accurate for small q.
double normal_upper_quantile(double q);

}  // namespace copula_oed
