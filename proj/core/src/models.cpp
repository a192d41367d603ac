#include "copula_oed/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace copula_oed {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

char family_letter(Family f) { return family_name(f).front(); }

// dθ/dτ for the τ-inverse map of a family.
double inverse_tau_slope(Family family, double theta, double tau) {
  switch (family) {
    case Family::Clayton: return 2.0 / ((1.0 - tau) * (1.0 - tau));
    case Family::Gumbel: return 1.0 / ((1.0 - tau) * (1.0 - tau));
    case Family::Product: return 0.0;
    default: break;
  }
  const std::vector<double> p{theta};
  const auto g = grad_fd(
      [family](std::span<const double> q) {
        return kendall_tau(BaseCopula::unchecked(family, q[0]));
      },
      p);
  return 1.0 / g[0];
}

double cdf_parameter_slope(Family family, double theta, double u, double v) {
  const std::vector<double> p{theta};
  return grad_fd(
      [=](std::span<const double> q) { return BaseCopula::unchecked(family, q[0]).cdf(u, v); },
      p)[0];
}

}  // namespace

// ---------------------------------------------------------------------------
// ParamVector

ParamVector::ParamVector(std::vector<std::string> names, std::vector<double> values)
    : names_(std::move(names)), values_(std::move(values)) {
  if (names_.size() != values_.size())
    throw DomainError("parameter names and values differ in length");
}

std::size_t ParamVector::index(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw DomainError("unknown parameter '" + name + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

double ParamVector::value(const std::string& name) const { return values_[index(name)]; }

ParamVector ParamVector::with(const std::string& name, double value) const {
  ParamVector out = *this;
  out.values_[index(name)] = value;
  return out;
}

// ---------------------------------------------------------------------------
// OutcomeModel / DiscreteModel

void OutcomeModel::check_point(double x) const {
  const Interval d = design_space();
  const double slack = 1e-12 * std::max(1.0, d.width());
  if (!(x >= d.lo - slack && x <= d.hi + slack)) {
    std::ostringstream os;
    os << "design point " << x << " is outside [" << d.lo << ", " << d.hi << "]";
    throw DomainError(os.str());
  }
}

void OutcomeModel::check_gamma(std::span<const double> gamma) const {
  if (gamma.size() != dimension())
    throw DomainError(name() + ": expected " + std::to_string(dimension()) + " parameters, got " +
                      std::to_string(gamma.size()));
  for (double g : gamma)
    if (!std::isfinite(g)) throw DomainError(name() + ": non-finite parameter value");
}

SymMatrix fim_single(const OutcomeModel& model, double x, const ParamVector& gamma) {
  return model.fim(x, gamma.values());
}

CellProbs DiscreteModel::cell_probs(double x, std::span<const double> gamma) const {
  check_point(x);
  check_gamma(gamma);
  CellProbs c = raw_cells(x, gamma);
  const double tol = negative_tolerance();
  for (double* p : {&c.p00, &c.p01, &c.p10, &c.p11}) {
    if (!std::isfinite(*p)) throw ModelError(name() + ": non-finite cell probability");
    if (*p < -tol) {
      std::ostringstream os;
      os << name() << ": negative cell probability " << *p << " at x = " << x;
      throw ModelError(os.str());
    }
    if (*p < 0.0) *p = 0.0;
  }
  if (std::abs(c.sum() - 1.0) > 1e-8) throw ModelError(name() + ": cell probabilities do not sum to 1");
  return c;
}

Eigen::MatrixXd DiscreteModel::cell_jacobian(double x, std::span<const double> gamma) const {
  return jacobian_fd(
      [&](std::span<const double> g) {
        const auto a = raw_cells(x, g).array();
        return std::vector<double>(a.begin(), a.end());
      },
      gamma);
}

SymMatrix DiscreteModel::fim(double x, std::span<const double> gamma) const {
  const CellProbs cells = cell_probs(x, gamma);
  const Eigen::MatrixXd jac = cell_jacobian(x, gamma);
  const auto p = cells.array();
  SymMatrix m(gamma.size());
  std::vector<double> row(gamma.size());
  for (std::size_t c = 0; c < 4; ++c) {
    if (!(p[c] > 0.0)) {
      std::ostringstream os;
      os << name() << ": zero probability in cell " << c << " at x = " << x;
      throw ModelError(os.str());
    }
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = jac(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k));
    m.add_outer(row, 1.0 / p[c]);
  }
  return m;
}

// ---------------------------------------------------------------------------
// BinaryLogitModel

BinaryLogitModel BinaryLogitModel::mixture(Family first, Family second, TauLink link,
                                           double alpha2) {
  if (first == Family::Product || second == Family::Product)
    throw DomainError("mixture components need a dependence parameter");
  if (!(alpha2 >= 0.0 && alpha2 <= 1.0)) throw DomainError("alpha2 must lie in [0,1]");
  BinaryLogitModel m;
  m.mixture_ = true;
  m.first_ = first;
  m.second_ = second;
  m.epsilon_ = link.epsilon();
  m.x_max_ = link.x_max();
  m.alpha1_ = link.alpha1();
  m.alpha2_ = alpha2;
  return m;
}

BinaryLogitModel BinaryLogitModel::fixed(CopulaSpec copula, double x_max) {
  if (!(x_max > 0.0)) throw DomainError("x_max must be positive");
  BinaryLogitModel m;
  m.x_max_ = x_max;
  m.fixed_ = std::move(copula);
  return m;
}

std::string BinaryLogitModel::name() const {
  if (mixture_) return std::string("binary[") + family_letter(first_) + "-" + family_letter(second_) + "]";
  return "binary[" + describe(fixed_) + "]";
}

std::vector<std::string> BinaryLogitModel::parameter_names() const {
  if (mixture_) return {"alpha2", "beta11", "beta12", "beta21", "beta22", "alpha1"};
  return {"beta11", "beta12", "beta21", "beta22"};
}

ParamVector BinaryLogitModel::nominal() const {
  if (mixture_) return {parameter_names(), {alpha2_, -1.0, 1.0, -2.0, 0.5, alpha1_}};
  return {parameter_names(), {-1.0, 1.0, -2.0, 0.5}};
}

CopulaSpec BinaryLogitModel::copula_at(double x, std::span<const double> gamma) const {
  check_point(x);
  check_gamma(gamma);
  if (!mixture_) return fixed_;
  const TauLink link = TauLink::with_slope(epsilon_, gamma[5], x_max_);
  return tau_matched_mixture(first_, second_, link, gamma[0], x);
}

CellProbs BinaryLogitModel::raw_cells(double x, std::span<const double> gamma) const {
  const std::size_t off = mixture_ ? 1 : 0;
  const double pi1 = logistic(gamma[off] + gamma[off + 1] * x);
  const double pi2 = logistic(gamma[off + 2] + gamma[off + 3] * x);
  double p11 = 0.0;
  if (mixture_) {
    const TauLink link = TauLink::with_slope(epsilon_, gamma[5], x_max_);
    const double tau = tau_at_x(link, std::clamp(x, 0.0, x_max_));
    const double a2 = gamma[0];
    const BaseCopula c1(first_, tau_inverse(first_, tau));
    const BaseCopula c2(second_, tau_inverse(second_, tau));
    p11 = a2 * c1.cdf(pi1, pi2) + (1.0 - a2) * c2.cdf(pi1, pi2);
  } else {
    p11 = cdf(fixed_, pi1, pi2);
  }
  return {1.0 - pi1 - pi2 + p11, pi2 - p11, pi1 - p11, p11};
}

Eigen::MatrixXd BinaryLogitModel::cell_jacobian(double x, std::span<const double> gamma) const {
  const std::size_t off = mixture_ ? 1 : 0;
  const double pi1 = logistic(gamma[off] + gamma[off + 1] * x);
  const double pi2 = logistic(gamma[off + 2] + gamma[off + 3] * x);
  const auto k = static_cast<Eigen::Index>(gamma.size());

  // d(π₁, π₂, p₁₁)/dγ, then the cells follow linearly.
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, k);
  const auto i1 = static_cast<Eigen::Index>(off);
  d(0, i1) = pi1 * (1.0 - pi1);
  d(0, i1 + 1) = x * pi1 * (1.0 - pi1);
  d(1, i1 + 2) = pi2 * (1.0 - pi2);
  d(1, i1 + 3) = x * pi2 * (1.0 - pi2);

  double c_u = 0.0;
  double c_v = 0.0;
  if (mixture_) {
    const TauLink link = TauLink::with_slope(epsilon_, gamma[5], x_max_);
    const double tau = tau_at_x(link, std::clamp(x, 0.0, x_max_));
    const double a2 = gamma[0];
    const double h1 = tau_inverse(first_, tau);
    const double h2 = tau_inverse(second_, tau);
    const BaseCopula c1(first_, h1);
    const BaseCopula c2(second_, h2);
    c_u = a2 * c1.partial_u(pi1, pi2) + (1.0 - a2) * c2.partial_u(pi1, pi2);
    c_v = a2 * c1.partial_v(pi1, pi2) + (1.0 - a2) * c2.partial_v(pi1, pi2);
    d(2, 0) = c1.cdf(pi1, pi2) - c2.cdf(pi1, pi2);
    const double dtau = x * tau * (1.0 - tau);
    d(2, 5) = dtau * (a2 * cdf_parameter_slope(first_, h1, pi1, pi2) *
                          inverse_tau_slope(first_, h1, tau) +
                      (1.0 - a2) * cdf_parameter_slope(second_, h2, pi1, pi2) *
                          inverse_tau_slope(second_, h2, tau));
  } else {
    c_u = partial_u(fixed_, pi1, pi2);
    c_v = partial_v(fixed_, pi1, pi2);
  }
  d.row(2) += c_u * d.row(0) + c_v * d.row(1);

  Eigen::MatrixXd jac(4, k);
  jac.row(0) = d.row(2) - d.row(0) - d.row(1);
  jac.row(1) = d.row(1) - d.row(2);
  jac.row(2) = d.row(0) - d.row(2);
  jac.row(3) = d.row(2);
  return jac;
}

// ---------------------------------------------------------------------------
// FedorovModel

namespace {

// Scores of (η₁, η₂, α) for one point of the standard-normal pair (z₁, z₂),
// where z₂ drives V through the conditional distribution given U = Φ(z₁).
void fedorov_scores(const BaseCopula& copula, double z1, double z2, double out[3]) {
  const double lu = normal_log_cdf(z1);
  const double lt = normal_log_cdf(z2);
  const double lv = copula.log_conditional_inverse(lu, lt);
  const double e1 = z1;
  const double e2 = lv < std::log(0.5) ? normal_quantile(std::exp(lv))
                                       : normal_upper_quantile(-std::expm1(lv));
  double g[3];
  if (!copula.log_pdf_log_gradient(lu, lv, g)) {
    // Central differences in log u, log v and α for families without an analytic form.
    const double u = std::exp(lu);
    const double v = std::exp(lv);
    const double hu = 1e-6 * std::min(u, -std::expm1(lu));
    const double hv = 1e-6 * std::min(v, -std::expm1(lv));
    g[0] = u * (copula.log_pdf(u + hu, v) - copula.log_pdf(u - hu, v)) / (2.0 * hu);
    g[1] = v * (copula.log_pdf(u, v + hv) - copula.log_pdf(u, v - hv)) / (2.0 * hv);
    const double a = copula.alpha1();
    const double ha = 1e-5 * std::max(1.0, std::abs(a));
    g[2] = (BaseCopula::unchecked(copula.family(), a + ha).log_pdf(u, v) -
            BaseCopula::unchecked(copula.family(), a - ha).log_pdf(u, v)) /
           (2.0 * ha);
  }
  // ∂/∂η of log f = e − φ(e)·∂ log c/∂u, with φ(e)/u formed in logs.
  out[0] = e1 - std::exp(normal_log_pdf(e1) - lu) * g[0];
  out[1] = e2 - std::exp(normal_log_pdf(e2) - lv) * g[1];
  out[2] = g[2];
}

}  // namespace

FedorovModel::FedorovModel(BaseCopula copula, std::size_t quadrature_order)
    : copula_(copula), order_(quadrature_order) {
  if (order_ < 2) throw DomainError("quadrature order must be at least 2");
  kernel_ = kernel_for(copula_.alpha1());
}

Eigen::MatrixXd FedorovModel::kernel_for(double alpha1) const {
  if (copula_.family() == Family::Product) return Eigen::MatrixXd::Identity(2, 2);
  const BaseCopula c(copula_.family(), alpha1);
  const auto rule = QuadratureRule::gauss_hermite(order_);
  Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < rule.size(); ++i) {
    for (std::size_t j = 0; j < rule.size(); ++j) {
      double s[3];
      fedorov_scores(c, rule.nodes[i], rule.nodes[j], s);
      const Eigen::Vector3d sv(s[0], s[1], s[2]);
      if (!sv.allFinite()) throw NumericalError("non-finite score in Fedorov information integral");
      acc.noalias() += rule.weights[i] * rule.weights[j] * sv * sv.transpose();
    }
  }
  return 0.5 * (acc + acc.transpose());
}

std::string FedorovModel::name() const { return "fedorov[" + describe(copula_) + "]"; }

std::vector<std::string> FedorovModel::parameter_names() const {
  std::vector<std::string> names{"beta1", "beta2", "beta3", "beta4", "beta5", "beta6"};
  if (copula_.family() != Family::Product) names.emplace_back("alpha1");
  return names;
}

ParamVector FedorovModel::nominal() const {
  std::vector<double> v(6, 0.0);
  if (copula_.family() != Family::Product) v.push_back(copula_.alpha1());
  return {parameter_names(), std::move(v)};
}

SymMatrix FedorovModel::fim(double x, std::span<const double> gamma) const {
  check_point(x);
  check_gamma(gamma);
  const bool dependent = copula_.family() != Family::Product;
  const Eigen::MatrixXd k = (!dependent || gamma[6] == copula_.alpha1()) ? kernel_
                                                                          : kernel_for(gamma[6]);
  const auto p = static_cast<Eigen::Index>(gamma.size());
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(k.rows(), p);
  jac(0, 0) = 1.0;
  jac(0, 1) = x;
  jac(0, 2) = x * x;
  jac(1, 3) = x;
  jac(1, 4) = x * x * x;
  jac(1, 5) = x * x * x * x;
  if (dependent) jac(2, 6) = 1.0;
  return SymMatrix::from_dense(jac.transpose() * k * jac);
}

// ---------------------------------------------------------------------------
// WeibullModel

WeibullModel WeibullModel::marshall_olkin(std::size_t quadrature_order) {
  WeibullModel m;
  m.dependence_ = WeibullDependence::MarshallOlkin;
  m.rule_ = QuadratureRule::gauss_legendre(quadrature_order);
  return m;
}

WeibullModel WeibullModel::khoudraji_clayton(double alpha1, double alpha2, double alpha3) {
  // Validates the triple.
  const KhoudrajiCopula check(BaseCopula(Family::Clayton, alpha1), alpha2, alpha3);
  WeibullModel m;
  m.dependence_ = WeibullDependence::KhoudrajiClayton;
  m.alphas_ = {check.base().alpha1(), check.alpha2(), check.alpha3()};
  return m;
}

std::string WeibullModel::name() const {
  if (dependence_ == WeibullDependence::MarshallOlkin) return "weibull[MO]";
  std::ostringstream os;
  os << "weibull[KC(" << alphas_[0] << "," << alphas_[1] << "," << alphas_[2] << ")]";
  return os.str();
}

std::vector<std::string> WeibullModel::parameter_names() const {
  if (dependence_ == WeibullDependence::MarshallOlkin)
    return {"nu1", "nu2", "theta0", "theta2", "theta3", "beta2", "kappa"};
  return {"nu1",    "nu2",    "alpha2", "alpha3", "theta0",
          "theta2", "theta3", "beta2",  "kappa",  "alpha1"};
}

ParamVector WeibullModel::nominal() const {
  if (dependence_ == WeibullDependence::MarshallOlkin)
    return {parameter_names(), {-1.0, 0.1, -2.0, 5.0, 2.0, 0.2, 2.0}};
  return {parameter_names(),
          {-1.0, 0.1, alphas_[1], alphas_[2], -2.0, 5.0, 2.0, 0.2, 2.0, alphas_[0]}};
}

WeibullModel::Rates WeibullModel::rates(double x, std::span<const double> gamma) const {
  const bool mo = dependence_ == WeibullDependence::MarshallOlkin;
  const std::size_t o = mo ? 2 : 4;
  const double nu1 = gamma[0];
  const double nu2 = gamma[1];
  const double theta0 = gamma[o];
  const double theta2 = gamma[o + 1];
  const double theta3 = gamma[o + 2];
  const double beta2 = gamma[o + 3];
  Rates r{};
  r.s1 = std::exp(-(theta0 + (theta2 + nu1) * x));
  r.s2 = std::exp(-(theta0 + theta2 * x));
  r.s3 = std::exp(-(theta0 + theta3 * x));
  r.beta2 = beta2;
  r.beta1 = beta2 + nu2;
  r.beta3 = r.s3 - r.beta1 - r.beta2;
  r.beta4 = r.s2 - r.beta3;
  r.beta5 = r.s1 - r.beta3;
  return r;
}

namespace {

// w e^{−b t} + (1 − w) e^{−a t} with w = c/(a − b), written so that a = b is regular.
double weighted_survival(double c, double a, double b, double t) {
  const double d = a - b;
  const double phi = d * t == 0.0 ? t : -std::expm1(-d * t) / d;
  return std::exp(-a * t) + c * std::exp(-b * t) * phi;
}

}  // namespace

double WeibullModel::survival_y(double y, double kappa, const Rates& r) const {
  return weighted_survival(r.beta2, r.s3, r.s2, std::pow(y, kappa));
}

double WeibullModel::survival_z(double z, double kappa, const Rates& r) const {
  return weighted_survival(r.beta1, r.s3, r.s1, std::pow(z, kappa));
}

CellProbs WeibullModel::raw_cells(double x, std::span<const double> gamma) const {
  const Rates r = rates(x, gamma);
  if (!(r.beta1 > 0.0 && r.beta2 > 0.0 && r.beta3 > 0.0)) {
    std::ostringstream os;
    os << name() << ": rates beta1..beta3 must be positive, got (" << r.beta1 << ", " << r.beta2
       << ", " << r.beta3 << ") at x = " << x;
    throw ModelError(os.str());
  }
  const double kappa = gamma[dependence_ == WeibullDependence::MarshallOlkin ? 6 : 8];
  const double fy = 1.0 - survival_y(zeta1_, kappa, r);
  const double fz = 1.0 - survival_z(zeta2_, kappa, r);

  double p00 = 0.0;
  if (dependence_ == WeibullDependence::MarshallOlkin) {
    // Integrate in s = y^κ, t = z^κ where the density is a sum of exponentials:
    // β₁s₁e^{−s₁t−(s₃−s₁)s} below the diagonal s < t, its mirror above, and
    // mass β₃e^{−s₃s} on s = t.
    const double a = std::pow(zeta1_, kappa);
    const double b = std::pow(zeta2_, kappa);
    const double m = std::min(a, b);
    double lower = 0.0;
    double upper = 0.0;
    double diag = 0.0;
    for (std::size_t i = 0; i < rule_.size(); ++i) {
      const double s = m * rule_.nodes[i];
      const double ws = m * rule_.weights[i];
      diag += ws * r.beta3 * std::exp(-r.s3 * s);
      for (std::size_t j = 0; j < rule_.size(); ++j) {
        const double tb = s + (b - s) * rule_.nodes[j];
        const double ta = s + (a - s) * rule_.nodes[j];
        lower += ws * (b - s) * rule_.weights[j] * r.beta1 * r.s1 *
                 std::exp(-r.s1 * tb - (r.s3 - r.s1) * s);
        upper += ws * (a - s) * rule_.weights[j] * r.beta2 * r.s2 *
                 std::exp(-r.s2 * ta - (r.s3 - r.s2) * s);
      }
    }
    p00 = lower + upper + diag;
  } else {
    const auto k = KhoudrajiCopula::unchecked(BaseCopula::unchecked(Family::Clayton, gamma[9]),
                                              gamma[2], gamma[3]);
    p00 = khoudraji_cdf(k, std::clamp(fy, 0.0, 1.0), std::clamp(fz, 0.0, 1.0));
  }
  return {p00, fy - p00, fz - p00, 1.0 - fy - fz + p00};
}

// ---------------------------------------------------------------------------
// CachedModel

SymMatrix CachedModel::fim(double x, std::span<const double> gamma) const {
  std::vector<double> key;
  key.reserve(gamma.size() + 1);
  key.push_back(x);
  key.insert(key.end(), gamma.begin(), gamma.end());
  {
    const std::lock_guard lock(mutex_);
    if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  SymMatrix m = base_.fim(x, gamma);
  const std::lock_guard lock(mutex_);
  return cache_.emplace(std::move(key), std::move(m)).first->second;
}

std::size_t CachedModel::cached() const {
  const std::lock_guard lock(mutex_);
  return cache_.size();
}

}  // namespace copula_oed
