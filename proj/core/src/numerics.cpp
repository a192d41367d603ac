#include "copula_oed/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace copula_oed {

// ---------------------------------------------------------------------------
// SymMatrix

SymMatrix::SymMatrix(std::size_t dim) : data_(Eigen::MatrixXd::Zero(dim, dim)) {}

SymMatrix SymMatrix::identity(std::size_t dim) {
  SymMatrix m(dim);
  m.data_.setIdentity();
  return m;
}

SymMatrix SymMatrix::diagonal(std::span<const double> diag) {
  SymMatrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m.data_(i, i) = diag[i];
  return m;
}

SymMatrix SymMatrix::from_dense(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DomainError("SymMatrix requires a square matrix");
  SymMatrix out;
  out.data_ = 0.5 * (m + m.transpose());
  return out;
}

void SymMatrix::set(std::size_t i, std::size_t j, double value) {
  data_(i, j) = value;
  data_(j, i) = value;
}

void SymMatrix::add_outer(std::span<const double> g, double scale) {
  const auto n = dim();
  if (g.size() != n) throw DomainError("add_outer: dimension mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    const double gi = scale * g[i];
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = data_(i, j) + gi * g[j];
      data_(i, j) = v;
      data_(j, i) = v;
    }
  }
}

void SymMatrix::add_scaled(const SymMatrix& other, double scale) {
  if (other.dim() != dim()) throw DomainError("add_scaled: dimension mismatch");
  data_ += scale * other.data_;
}

SymMatrix SymMatrix::block(std::size_t start, std::size_t size) const {
  if (start + size > dim()) throw DomainError("block: range exceeds matrix dimension");
  SymMatrix out;
  out.data_ = data_.block(start, start, size, size);
  return out;
}

SymMatrix SymMatrix::permuted(std::span<const std::size_t> order) const {
  const auto n = dim();
  if (order.size() != n) throw DomainError("permuted: order has wrong length");
  SymMatrix out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.data_(i, j) = data_(order[i], order[j]);
  return out;
}

SymMatrix& SymMatrix::operator*=(double c) {
  data_ *= c;
  return *this;
}

// ---------------------------------------------------------------------------
// Cholesky

Cholesky::Cholesky(const SymMatrix& m) {
  const auto n = m.dim();
  if (n == 0) throw DomainError("Cholesky: empty matrix");
  const Eigen::MatrixXd& a = m.dense();
  const double max_diag = a.diagonal().cwiseAbs().maxCoeff();
  const double threshold = kPivotTolerance * max_diag;

  lower_ = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    double pivot = a(k, k);
    for (std::size_t j = 0; j < k; ++j) pivot -= lower_(k, j) * lower_(k, j);
    if (!std::isfinite(pivot) || pivot <= threshold || max_diag <= 0.0) {
      throw SingularMatrixError(
          "matrix is not positive definite (pivot " + std::to_string(k) + " = " +
              std::to_string(pivot) + ")",
          k);
    }
    const double root = std::sqrt(pivot);
    lower_(k, k) = root;
    for (std::size_t i = k + 1; i < n; ++i) {
      double s = a(i, k);
      for (std::size_t j = 0; j < k; ++j) s -= lower_(i, j) * lower_(k, j);
      lower_(i, k) = s / root;
    }
  }
}

double Cholesky::log_determinant() const {
  return 2.0 * lower_.diagonal().array().log().sum();
}

Eigen::MatrixXd Cholesky::solve(const Eigen::MatrixXd& rhs) const {
  const auto l = lower_.triangularView<Eigen::Lower>();
  Eigen::MatrixXd y = l.solve(rhs);
  return l.transpose().solve(y);
}

SymMatrix Cholesky::inverse() const {
  const auto n = lower_.rows();
  return SymMatrix::from_dense(solve(Eigen::MatrixXd::Identity(n, n)));
}

double logdet_psd(const SymMatrix& m) { return Cholesky(m).log_determinant(); }

SymMatrix inverse_spd(const SymMatrix& m) { return Cholesky(m).inverse(); }

SymMatrix schur_complement(const SymMatrix& m, std::size_t s) {
  const auto n = m.dim();
  if (s < 1 || s >= n)
    throw DomainError("schur_complement: leading block size must satisfy 1 <= s < dim");
  const Eigen::MatrixXd& a = m.dense();
  const Eigen::MatrixXd m12 = a.topRightCorner(s, n - s);
  const Cholesky trailing(m.block(s, n - s));
  const Eigen::MatrixXd correction = m12 * trailing.solve(m12.transpose());
  return SymMatrix::from_dense(a.topLeftCorner(s, s) - correction);
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

double checked(double value, std::size_t coordinate) {
  if (!std::isfinite(value))
    throw NumericalError("non-finite function value while differentiating coordinate " +
                             std::to_string(coordinate),
                         coordinate);
  return value;
}

double step_for(double h, double p) { return std::max(h, h * std::abs(p)); }

}  // namespace

std::vector<double> grad_fd(const ScalarFunction& f, std::span<const double> p, double h) {
  if (!(h > 0.0)) throw DomainError("grad_fd: step must be positive");
  std::vector<double> x(p.begin(), p.end());
  std::vector<double> grad(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double hi = step_for(h, p[i]);
    auto central = [&](double step) {
      x[i] = p[i] + step;
      const double fp = checked(f(x), i);
      x[i] = p[i] - step;
      const double fm = checked(f(x), i);
      x[i] = p[i];
      return (fp - fm) / (2.0 * step);
    };
    const double coarse = central(hi);
    const double fine = central(0.5 * hi);
    grad[i] = (4.0 * fine - coarse) / 3.0;
  }
  return grad;
}

Eigen::MatrixXd jacobian_fd(const VectorFunction& f, std::span<const double> p, double h) {
  if (!(h > 0.0)) throw DomainError("jacobian_fd: step must be positive");
  std::vector<double> x(p.begin(), p.end());
  Eigen::MatrixXd jac;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double hi = step_for(h, p[i]);
    auto central = [&](double step) {
      x[i] = p[i] + step;
      const std::vector<double> fp = f(x);
      x[i] = p[i] - step;
      const std::vector<double> fm = f(x);
      x[i] = p[i];
      if (fp.size() != fm.size()) throw NumericalError("jacobian_fd: output size changed", i);
      Eigen::VectorXd d(fp.size());
      for (std::size_t r = 0; r < fp.size(); ++r)
        d(r) = (checked(fp[r], i) - checked(fm[r], i)) / (2.0 * step);
      return d;
    };
    const Eigen::VectorXd coarse = central(hi);
    const Eigen::VectorXd fine = central(0.5 * hi);
    if (i == 0) jac.resize(coarse.size(), static_cast<Eigen::Index>(p.size()));
    jac.col(i) = (4.0 * fine - coarse) / 3.0;
  }
  return jac;
}

// ---------------------------------------------------------------------------
// Quadrature

QuadratureRule QuadratureRule::gauss_legendre(std::size_t order, Interval domain) {
  if (order < 1) throw DomainError("gauss_legendre: order must be at least 1");
  QuadratureRule rule;
  rule.domain = domain;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const auto n = static_cast<double>(order);
  const double half = 0.5 * domain.width();
  const double mid = 0.5 * (domain.lo + domain.hi);
  // Newton iteration on P_n from Chebyshev-like initial guesses; nodes are
  // symmetric so only half are computed.
  const std::size_t m = (order + 1) / 2;
  for (std::size_t i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (std::size_t j = 1; j <= order; ++j) {
        const double p3 = p2;
        p2 = p1;
        const auto jj = static_cast<double>(j);
        p1 = ((2.0 * jj - 1.0) * z * p2 - (jj - 1.0) * p3) / jj;
      }
      dp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = mid - half * z;
    rule.nodes[order - 1 - i] = mid + half * z;
    rule.weights[i] = half * w;
    rule.weights[order - 1 - i] = half * w;
  }
  return rule;
}

QuadratureRule QuadratureRule::composite_gauss_legendre(std::size_t order, std::size_t panels,
                                                        Interval domain) {
  if (panels < 1) throw DomainError("composite_gauss_legendre: need at least one panel");
  QuadratureRule rule;
  rule.domain = domain;
  const double width = domain.width() / static_cast<double>(panels);
  for (std::size_t k = 0; k < panels; ++k) {
    const double lo = domain.lo + width * static_cast<double>(k);
    const auto panel = gauss_legendre(order, {lo, lo + width});
    rule.nodes.insert(rule.nodes.end(), panel.nodes.begin(), panel.nodes.end());
    rule.weights.insert(rule.weights.end(), panel.weights.begin(), panel.weights.end());
  }
  return rule;
}

QuadratureRule QuadratureRule::gauss_hermite(std::size_t order) {
  if (order < 1) throw DomainError("gauss_hermite: order must be at least 1");
  // Golub–Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (std::size_t k = 1; k < order; ++k) {
    const double b = std::sqrt(static_cast<double>(k));
    jacobi(k - 1, k) = b;
    jacobi(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  QuadratureRule rule;
  rule.domain = {-std::numeric_limits<double>::infinity(),
                 std::numeric_limits<double>::infinity()};
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (std::size_t i = 0; i < order; ++i) {
    rule.nodes[i] = eig.eigenvalues()(i);
    const double v0 = eig.eigenvectors()(0, i);
    rule.weights[i] = v0 * v0;
  }
  // Symmetrize to remove eigen-solver asymmetry in the tails.
  for (std::size_t i = 0; i < order / 2; ++i) {
    const std::size_t j = order - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = w;
    rule.weights[j] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

double integrate_1d(const std::function<double(double)>& f, Interval domain, double tolerance) {
  auto guarded = [&](double x) {
    const double v = f(x);
    if (!std::isfinite(v))
      throw NumericalError("non-finite integrand at x = " + std::to_string(x));
    return v;
  };
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      guarded, domain.lo, domain.hi, 25, tolerance, &error);
  if (!std::isfinite(value)) throw NumericalError("integrate_1d: non-finite result");
  return value;
}

double integrate_2d(const BivariateFunction& f, const QuadratureRule& rule_u,
                    const QuadratureRule& rule_v) {
  double total = 0.0;
  for (std::size_t i = 0; i < rule_u.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < rule_v.size(); ++j) {
      const double v = f(rule_u.nodes[i], rule_v.nodes[j]);
      if (!std::isfinite(v))
        throw NumericalError("non-finite integrand at (" + std::to_string(rule_u.nodes[i]) +
                             ", " + std::to_string(rule_v.nodes[j]) + ")");
      row += rule_v.weights[j] * v;
    }
    total += rule_u.weights[i] * row;
  }
  return total;
}

namespace {

// Panels shrink geometrically (ratio 4) toward both ends so that integrable
// corner singularities of copula densities are resolved.
QuadratureRule graded_gauss_legendre(std::size_t order, Interval domain) {
  constexpr int kLevels = 10;
  std::vector<double> cuts{0.0};
  for (int k = kLevels; k >= 1; --k) cuts.push_back(0.5 * std::pow(4.0, -k));
  const std::size_t half = cuts.size();
  cuts.push_back(0.5);
  for (std::size_t i = half; i-- > 0;) cuts.push_back(1.0 - cuts[i]);
  const double width = domain.width();
  QuadratureRule rule;
  rule.domain = domain;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const auto panel = QuadratureRule::gauss_legendre(
        order, {domain.lo + width * cuts[i], domain.lo + width * cuts[i + 1]});
    rule.nodes.insert(rule.nodes.end(), panel.nodes.begin(), panel.nodes.end());
    rule.weights.insert(rule.weights.end(), panel.weights.begin(), panel.weights.end());
  }
  return rule;
}

}  // namespace

double integrate_2d(const BivariateFunction& f, const Rectangle& region, std::size_t order) {
  if (order < 2) throw DomainError("integrate_2d: order must be at least 2");
  return integrate_2d(f, graded_gauss_legendre(order, region.u),
                      graded_gauss_legendre(order, region.v));
}

// ---------------------------------------------------------------------------
// Root finding

double find_root(const std::function<double(double)>& f, Interval bracket, double tol) {
  const double flo = f(bracket.lo);
  const double fhi = f(bracket.hi);
  if (!std::isfinite(flo) || !std::isfinite(fhi))
    throw NumericalError("find_root: non-finite function value at bracket end");
  if (flo == 0.0) return bracket.lo;
  if (fhi == 0.0) return bracket.hi;
  if ((flo < 0.0) == (fhi < 0.0))
    throw BracketError("find_root: no sign change on [" + std::to_string(bracket.lo) + ", " +
                       std::to_string(bracket.hi) + "]");

  constexpr double eps = std::numeric_limits<double>::epsilon();
  auto done = [tol](double a, double b) {
    return std::abs(b - a) <= std::max(tol, 4.0 * eps * std::min(std::abs(a), std::abs(b)));
  };
  auto guarded = [&](double x) {
    const double v = f(x);
    if (!std::isfinite(v)) throw NumericalError("find_root: non-finite function value");
    return v;
  };
  std::uintmax_t max_iter = 500;
  const auto [a, b] = boost::math::tools::toms748_solve(guarded, bracket.lo, bracket.hi, flo,
                                                        fhi, done, max_iter);
  const double fa = std::abs(guarded(a));
  const double fb = std::abs(guarded(b));
  return fa <= fb ? a : b;
}

// ---------------------------------------------------------------------------
// Normal distribution

double normal_pdf(double z) { return std::exp(normal_log_pdf(z)); }

double normal_log_pdf(double z) {
  constexpr double log_sqrt_2pi = 0.91893853320467274178;
  return -0.5 * z * z - log_sqrt_2pi;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_log_cdf(double z) {
  if (z > 0.0) return std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
  if (z > -30.0) return std::log(normal_cdf(z));
  // Asymptotic Mills-ratio expansion of the lower tail.
  const double r = 1.0 / (z * z);
  const double series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
  return normal_log_pdf(z) - std::log(-z) + std::log(series);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0,1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double normal_upper_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("normal_upper_quantile: q must lie in (0,1)");
  return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q);
}

}  // namespace copula_oed
