#include "copula_oed/copulas.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "copula_oed/numerics.hpp"

namespace copula_oed {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_unit(double u, double v) {
  if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0))
    throw DomainError("copula arguments must lie in [0,1]");
}

void require_open_unit(double u, double v) {
  if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0))
    throw DomainError("copula density is only defined on the open unit square");
}

double softplus(double x) { return x > 35.0 ? x : std::log1p(std::exp(x)); }

// log(u^-α + v^-α - 1) for α > 0, stable for tiny u or v.
double clayton_log_s(double alpha, double lu, double lv) {
  const double x1 = -alpha * lu;
  const double x2 = -alpha * lv;
  const double hi = std::max(x1, x2);
  const double lo = std::min(x1, x2);
  // e^{-hi}(e^{lo} - 1) without overflow for large lo.
  const double rest = lo < 1.0 ? std::exp(-hi) * std::expm1(lo) : std::exp(lo - hi) - std::exp(-hi);
  return hi + std::log1p(rest);
}

// Gumbel A = (x^α + y^α)^(1/α) with x = −log u, y = −log v.
double gumbel_a(double alpha, double x, double y) {
  const double hi = std::max(x, y);
  const double lo = std::min(x, y);
  if (hi == 0.0) return 0.0;
  return hi * std::exp(std::log1p(std::pow(lo / hi, alpha)) / alpha);
}

// D = (1 − e^−α) − (1 − e^−αu)(1 − e^−αv), written as a sum of same-signed terms.
double frank_d(double alpha, double u, double v) {
  return -std::exp(-alpha * u) * std::expm1(-alpha * v) -
         std::exp(-alpha * v) * std::expm1(-alpha * (1.0 - v));
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log t for Joe, t = ū^α + v̄^α − ū^α v̄^α with la = log ū, lb = log v̄. Near the
// lower corner t ≈ 1 and 1 − pa·pb is accurate; elsewhere the sum of
// nonnegative terms ū^α + v̄^α·pa avoids cancellation.
double joe_log_t(double alpha, double la, double lb) {
  const double pa = -std::expm1(alpha * la);
  const double pb = -std::expm1(alpha * lb);
  if (pa * pb < 0.5) return std::log1p(-pa * pb);
  return std::log(std::exp(alpha * la) + std::exp(alpha * lb) * pa);
}

}  // namespace

// ---------------------------------------------------------------------------
// Family names

std::string_view family_name(Family family) {
  switch (family) {
    case Family::Product: return "Product";
    case Family::Clayton: return "Clayton";
    case Family::Gumbel: return "Gumbel";
    case Family::Frank: return "Frank";
    case Family::Joe: return "Joe";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "product" || lower == "p" || lower == "independence") return Family::Product;
  if (lower == "clayton" || lower == "c") return Family::Clayton;
  if (lower == "gumbel" || lower == "g") return Family::Gumbel;
  if (lower == "frank" || lower == "f") return Family::Frank;
  if (lower == "joe" || lower == "j") return Family::Joe;
  throw DomainError("unknown copula family '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// BaseCopula

BaseCopula::BaseCopula(Family family, double alpha1) : family_(family), alpha1_(alpha1) {
  const std::string name(family_name(family));
  switch (family) {
    case Family::Product:
      alpha1_ = 0.0;
      break;
    case Family::Clayton:
      if (!(alpha1 > 0.0 && std::isfinite(alpha1)))
        throw DomainError("Clayton parameter alpha1 must be > 0");
      break;
    case Family::Gumbel:
    case Family::Joe:
      if (!(alpha1 >= 1.0 && std::isfinite(alpha1)))
        throw DomainError(name + " parameter alpha1 must be >= 1");
      break;
    case Family::Frank:
      if (!(alpha1 != 0.0 && std::isfinite(alpha1)))
        throw DomainError("Frank parameter alpha1 must be non-zero");
      break;
  }
}

BaseCopula BaseCopula::unchecked(Family family, double alpha1) {
  return BaseCopula(family, alpha1, Unchecked{});
}

double BaseCopula::cdf(double u, double v) const {
  require_unit(u, v);
  if (u == 0.0 || v == 0.0) return 0.0;
  if (u == 1.0) return v;
  if (v == 1.0) return u;
  const double a = alpha1_;
  double c = 0.0;
  switch (family_) {
    case Family::Product:
      c = u * v;
      break;
    case Family::Clayton:
      c = std::exp(-clayton_log_s(a, std::log(u), std::log(v)) / a);
      break;
    case Family::Gumbel:
      c = std::exp(-gumbel_a(a, -std::log(u), -std::log(v)));
      break;
    case Family::Frank:
    {
      const double t = std::expm1(-a * u) * std::expm1(-a * v) / std::expm1(-a);
      // Near the upper corner 1 + t cancels; the factored numerator does not.
      c = t > -0.5 ? -std::log1p(t) / a : -std::log(frank_d(a, u, v) / -std::expm1(-a)) / a;
      break;
    }
    case Family::Joe: {
      c = -std::expm1(joe_log_t(a, std::log1p(-u), std::log1p(-v)) / a);
      break;
    }
  }
  return std::clamp(c, std::max(u + v - 1.0, 0.0), std::min(u, v));
}

double BaseCopula::log_pdf(double u, double v) const {
  require_open_unit(u, v);
  const double a = alpha1_;
  switch (family_) {
    case Family::Product:
      return 0.0;
    case Family::Clayton: {
      const double lu = std::log(u);
      const double lv = std::log(v);
      return std::log1p(a) - (a + 1.0) * (lu + lv) - (2.0 + 1.0 / a) * clayton_log_s(a, lu, lv);
    }
    case Family::Gumbel: {
      const double x = -std::log(u);
      const double y = -std::log(v);
      const double big_a = gumbel_a(a, x, y);
      return -big_a + (a - 1.0) * (std::log(x) + std::log(y)) + x + y +
             (1.0 - 2.0 * a) * std::log(big_a) + std::log(big_a + a - 1.0);
    }
    case Family::Frank: {
      const double d = frank_d(a, u, v);
      return std::log(-a * std::expm1(-a)) - a * (u + v) - 2.0 * std::log(std::abs(d));
    }
    case Family::Joe: {
      const double la = std::log1p(-u);
      const double lb = std::log1p(-v);
      const double lt = joe_log_t(a, la, lb);
      return (1.0 / a - 2.0) * lt + (a - 1.0) * (la + lb) + std::log(a - 1.0 + std::exp(lt));
    }
  }
  return 0.0;
}

double BaseCopula::pdf(double u, double v) const { return std::exp(log_pdf(u, v)); }

double BaseCopula::partial_u(double u, double v) const {
  require_unit(u, v);
  if (v == 0.0) return 0.0;
  if (v == 1.0) return 1.0;
  const double a = alpha1_;
  switch (family_) {
    case Family::Product:
      return v;
    case Family::Clayton: {
      if (u == 0.0) return 1.0;
      const double lu = std::log(u);
      return std::exp(-(a + 1.0) * lu - (1.0 / a + 1.0) * clayton_log_s(a, lu, std::log(v)));
    }
    case Family::Gumbel: {
      if (u == 0.0) return 1.0;
      if (u == 1.0) return a > 1.0 ? 0.0 : v;
      const double x = -std::log(u);
      const double big_a = gumbel_a(a, x, -std::log(v));
      return std::exp(-big_a + (1.0 - a) * std::log(big_a) + (a - 1.0) * std::log(x) + x);
    }
    case Family::Frank:
      return -std::exp(-a * u) * std::expm1(-a * v) / frank_d(a, u, v);
    case Family::Joe: {
      if (u == 1.0) return a > 1.0 ? 0.0 : v;
      const double la = std::log1p(-u);
      const double lb = std::log1p(-v);
      const double pb = -std::expm1(a * lb);
      return std::exp((1.0 / a - 1.0) * joe_log_t(a, la, lb) + (a - 1.0) * la) * pb;
    }
  }
  return 0.0;
}

double BaseCopula::conditional_inverse(double u, double t) const {
  if (!(u > 0.0 && u < 1.0 && t >= 0.0 && t <= 1.0))
    throw DomainError("conditional_inverse: need u in (0,1) and t in [0,1]");
  if (t == 0.0) return 0.0;
  if (t == 1.0) return 1.0;
  const double a = alpha1_;
  switch (family_) {
    case Family::Product:
      return t;
    case Family::Clayton:
      return std::exp(log_conditional_inverse(std::log(u), std::log(t)));
    case Family::Frank: {
      const double ratio = t * std::expm1(-a) / (t + (1.0 - t) * std::exp(-a * u));
      return std::clamp(-std::log1p(ratio) / a, 0.0, 1.0);
    }
    case Family::Gumbel:
    case Family::Joe:
      break;
  }
  return find_root([&](double v) { return partial_u(u, v) - t; }, {0.0, 1.0}, 1e-15);
}

bool BaseCopula::log_pdf_gradient(double u, double v, double out[3]) const {
  require_open_unit(u, v);
  if (!log_pdf_log_gradient(std::log(u), std::log(v), out)) return false;
  out[0] /= u;
  out[1] /= v;
  return true;
}

bool BaseCopula::log_pdf_log_gradient(double log_u, double log_v, double out[3]) const {
  if (!(log_u < 0.0 && log_v < 0.0))
    throw DomainError("copula density is only defined on the open unit square");
  const double a = alpha1_;
  switch (family_) {
    case Family::Product:
      out[0] = out[1] = out[2] = 0.0;
      return true;
    case Family::Clayton: {
      const double ls = clayton_log_s(a, log_u, log_v);
      const double eu = std::exp(-a * log_u - ls);
      const double ev = std::exp(-a * log_v - ls);
      out[0] = -(a + 1.0) + (1.0 + 2.0 * a) * eu;
      out[1] = -(a + 1.0) + (1.0 + 2.0 * a) * ev;
      out[2] = 1.0 / (1.0 + a) - (log_u + log_v) + ls / (a * a) +
               (2.0 + 1.0 / a) * (log_u * eu + log_v * ev);
      return true;
    }
    default:
      return false;
  }
}

double BaseCopula::log_conditional_inverse(double log_u, double log_t) const {
  if (!(log_u < 0.0 && log_t <= 0.0))
    throw DomainError("log_conditional_inverse: need u in (0,1) and t in (0,1]");
  if (log_t == 0.0) return 0.0;
  if (family_ == Family::Clayton) {
    const double a = alpha1_;
    const double big_a = std::expm1(-(a / (1.0 + a)) * log_t);
    return -softplus(std::log(big_a) - a * log_u) / a;
  }
  const double u = std::min(std::exp(log_u), std::nextafter(1.0, 0.0));
  return std::log(conditional_inverse(u, std::exp(log_t)));
}

// ---------------------------------------------------------------------------
// Mixture and Khoudraji

MixtureCopula::MixtureCopula(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw DomainError("mixture needs at least one component");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight >= 0.0 && c.weight <= 1.0))
      throw DomainError("mixture weights must lie in [0,1]");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("mixture weights must sum to 1");
}

KhoudrajiCopula::KhoudrajiCopula(BaseCopula base, double alpha2, double alpha3)
    : base_(base), alpha2_(alpha2), alpha3_(alpha3) {
  if (!(alpha2 >= 0.0 && alpha2 <= 1.0 && alpha3 >= 0.0 && alpha3 <= 1.0))
    throw DomainError("Khoudraji parameters alpha2, alpha3 must lie in [0,1]");
}

KhoudrajiCopula KhoudrajiCopula::unchecked(BaseCopula base, double alpha2, double alpha3) {
  return KhoudrajiCopula(base, alpha2, alpha3, Unchecked{});
}

double khoudraji_cdf(const KhoudrajiCopula& k, double u, double v) {
  require_unit(u, v);
  const double a2 = k.alpha2();
  const double a3 = k.alpha3();
  const double c = std::pow(u, a2) * std::pow(v, a3) *
                   k.base().cdf(std::pow(u, 1.0 - a2), std::pow(v, 1.0 - a3));
  return std::clamp(c, std::max(u + v - 1.0, 0.0), std::min(u, v));
}

namespace {

double khoudraji_partial_u(const KhoudrajiCopula& k, double u, double v) {
  require_unit(u, v);
  if (u == 0.0 || v == 0.0) return k.base().partial_u(0.0, v);
  const double a2 = k.alpha2();
  const double a3 = k.alpha3();
  const double p = std::pow(u, 1.0 - a2);
  const double q = std::pow(v, 1.0 - a3);
  return std::pow(v, a3) *
         (a2 * std::pow(u, a2 - 1.0) * k.base().cdf(p, q) + (1.0 - a2) * k.base().partial_u(p, q));
}

double khoudraji_partial_v(const KhoudrajiCopula& k, double u, double v) {
  require_unit(u, v);
  if (u == 0.0 || v == 0.0) return k.base().partial_v(u, 0.0);
  const double a2 = k.alpha2();
  const double a3 = k.alpha3();
  const double p = std::pow(u, 1.0 - a2);
  const double q = std::pow(v, 1.0 - a3);
  return std::pow(u, a2) *
         (a3 * std::pow(v, a3 - 1.0) * k.base().cdf(p, q) + (1.0 - a3) * k.base().partial_v(p, q));
}

}  // namespace

double khoudraji_pdf(const KhoudrajiCopula& k, double u, double v) {
  require_open_unit(u, v);
  const double a2 = k.alpha2();
  const double a3 = k.alpha3();
  const double p = std::pow(u, 1.0 - a2);
  const double q = std::pow(v, 1.0 - a3);
  const BaseCopula& b = k.base();
  const double ua = std::pow(u, a2 - 1.0);
  const double va = std::pow(v, a3 - 1.0);
  return a2 * a3 * ua * va * b.cdf(p, q) + (1.0 - a2) * a3 * va * b.partial_u(p, q) +
         a2 * (1.0 - a3) * ua * b.partial_v(p, q) + (1.0 - a2) * (1.0 - a3) * b.pdf(p, q);
}

// ---------------------------------------------------------------------------
// Dispatch over CopulaSpec

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

double cdf(const CopulaSpec& copula, double u, double v) {
  return std::visit(
      Overloaded{[&](const BaseCopula& b) { return b.cdf(u, v); },
                 [&](const MixtureCopula& m) {
                   require_unit(u, v);
                   double c = 0.0;
                   for (const auto& comp : m.components()) c += comp.weight * comp.copula.cdf(u, v);
                   return std::clamp(c, std::max(u + v - 1.0, 0.0), std::min(u, v));
                 },
                 [&](const KhoudrajiCopula& k) { return khoudraji_cdf(k, u, v); }},
      copula);
}

double pdf(const CopulaSpec& copula, double u, double v) {
  return std::visit(Overloaded{[&](const BaseCopula& b) { return b.pdf(u, v); },
                               [&](const MixtureCopula& m) {
                                 require_open_unit(u, v);
                                 double c = 0.0;
                                 for (const auto& comp : m.components())
                                   if (comp.weight > 0.0) c += comp.weight * comp.copula.pdf(u, v);
                                 return c;
                               },
                               [&](const KhoudrajiCopula& k) { return khoudraji_pdf(k, u, v); }},
                    copula);
}

double partial_u(const CopulaSpec& copula, double u, double v) {
  return std::visit(
      Overloaded{[&](const BaseCopula& b) { return b.partial_u(u, v); },
                 [&](const MixtureCopula& m) {
                   double c = 0.0;
                   for (const auto& comp : m.components())
                     c += comp.weight * comp.copula.partial_u(u, v);
                   return c;
                 },
                 [&](const KhoudrajiCopula& k) { return khoudraji_partial_u(k, u, v); }},
      copula);
}

double partial_v(const CopulaSpec& copula, double u, double v) {
  return std::visit(
      Overloaded{[&](const BaseCopula& b) { return b.partial_v(u, v); },
                 [&](const MixtureCopula& m) {
                   double c = 0.0;
                   for (const auto& comp : m.components())
                     c += comp.weight * comp.copula.partial_v(u, v);
                   return c;
                 },
                 [&](const KhoudrajiCopula& k) { return khoudraji_partial_v(k, u, v); }},
      copula);
}

std::vector<double> parameters(const CopulaSpec& copula) {
  return std::visit(Overloaded{[](const BaseCopula& b) {
                                 return b.family() == Family::Product ? std::vector<double>{}
                                                                      : std::vector{b.alpha1()};
                               },
                               [](const MixtureCopula& m) {
                                 std::vector<double> out;
                                 for (const auto& c : m.components()) {
                                   if (c.copula.family() != Family::Product)
                                     out.push_back(c.copula.alpha1());
                                   out.push_back(c.weight);
                                 }
                                 return out;
                               },
                               [](const KhoudrajiCopula& k) {
                                 return std::vector{k.base().alpha1(), k.alpha2(), k.alpha3()};
                               }},
                    copula);
}

namespace {

std::string describe_base(const BaseCopula& b) {
  std::ostringstream os;
  os << family_name(b.family());
  if (b.family() != Family::Product) os << '(' << b.alpha1() << ')';
  return os.str();
}

}  // namespace

std::string describe(const CopulaSpec& copula) {
  return std::visit(Overloaded{[](const BaseCopula& b) { return describe_base(b); },
                               [](const MixtureCopula& m) {
                                 std::ostringstream os;
                                 os << "Mixture[";
                                 bool first = true;
                                 for (const auto& c : m.components()) {
                                   if (!first) os << " + ";
                                   os << c.weight << '*' << describe_base(c.copula);
                                   first = false;
                                 }
                                 os << ']';
                                 return os.str();
                               },
                               [](const KhoudrajiCopula& k) {
                                 std::ostringstream os;
                                 os << "Khoudraji[" << describe_base(k.base()) << "; " << k.alpha2()
                                    << ", " << k.alpha3() << ']';
                                 return os.str();
                               }},
                    copula);
}

// ---------------------------------------------------------------------------
// Kendall's tau

namespace {

double frank_tau(double a) {
  if (std::abs(a) < 1e-4) return a / 9.0 - a * a * a / 900.0;
  const double debye = integrate_1d(
                           [](double t) { return t == 0.0 ? 1.0 : t / std::expm1(t); },
                           {std::min(0.0, a), std::max(0.0, a)}) /
                       std::abs(a);
  return 1.0 - 4.0 / a * (1.0 - debye);
}

// τ = 1 + 2/(2−θ)·(ψ(2) − ψ(1 + 2/θ)), written as a divided difference of ψ
// so that θ = 2 is regular.
double joe_tau(double theta) {
  if (theta == 1.0) return 0.0;
  const double a = 1.0 + 2.0 / theta;
  const double d = 2.0 - a;
  const double slope = std::abs(d) < 1e-4
                           ? boost::math::trigamma(0.5 * (a + 2.0))
                           : (boost::math::digamma(2.0) - boost::math::digamma(a)) / d;
  return 1.0 - 2.0 / theta * slope;
}

double base_tau(const BaseCopula& b) {
  const double a = b.alpha1();
  switch (b.family()) {
    case Family::Product: return 0.0;
    case Family::Clayton: return a / (a + 2.0);
    case Family::Gumbel: return 1.0 - 1.0 / a;
    case Family::Frank: return frank_tau(a);
    case Family::Joe: return joe_tau(a);
  }
  return 0.0;
}

}  // namespace

double kendall_tau_numeric(const CopulaSpec& copula, std::size_t order, std::size_t panels) {
  const auto rule = QuadratureRule::composite_gauss_legendre(order, panels);
  const double integral = integrate_2d(
      [&](double u, double v) { return partial_u(copula, u, v) * partial_v(copula, u, v); }, rule,
      rule);
  return 1.0 - 4.0 * integral;
}

double kendall_tau(const CopulaSpec& copula) {
  if (const auto* b = std::get_if<BaseCopula>(&copula)) return base_tau(*b);
  if (const auto* k = std::get_if<KhoudrajiCopula>(&copula)) {
    if (k->alpha2() == 0.0 && k->alpha3() == 0.0) return base_tau(k->base());
  }
  return std::clamp(kendall_tau_numeric(copula), -1.0, 1.0);
}

double tau_inverse(Family family, double tau) {
  const std::string name(family_name(family));
  if (family == Family::Product)
    throw DomainError("the product copula has no parameter to invert");
  if (!(tau > 0.0 && tau < 1.0))
    throw DomainError("Kendall's tau " + std::to_string(tau) + " is outside the attainable range (0,1) of " +
                      name);
  switch (family) {
    case Family::Clayton: return 2.0 * tau / (1.0 - tau);
    case Family::Gumbel: return 1.0 / (1.0 - tau);
    default: break;
  }
  const Interval bracket = family == Family::Frank ? Interval{1e-6, 5e2} : Interval{1.0 + 1e-6, 1e3};
  try {
    return find_root(
        [&](double a) { return base_tau(BaseCopula::unchecked(family, a)) - tau; }, bracket,
        1e-15);
  } catch (const BracketError&) {
    throw DomainError("Kendall's tau " + std::to_string(tau) + " is not attainable by " + name +
                      " within its parameter bracket");
  }
}

// ---------------------------------------------------------------------------
// TauLink

TauLink::TauLink(double epsilon, double tau_max, double x_max, double offset, double alpha1)
    : epsilon_(epsilon), tau_max_(tau_max), x_max_(x_max), offset_(offset), alpha1_(alpha1) {
  if (!(epsilon > 0.0 && epsilon < tau_max && tau_max < 1.0))
    throw DomainError("tau link requires 0 < epsilon < tau_max < 1");
  if (!(x_max > 0.0)) throw DomainError("tau link requires x_max > 0");
  if (!(alpha1 > 0.0)) throw DomainError("tau link slope alpha1 must be positive");
}

TauLink TauLink::calibrated(double epsilon, double tau_max, double x_max) {
  if (!(epsilon > 0.0 && epsilon < tau_max && tau_max < 1.0))
    throw DomainError("tau link requires 0 < epsilon < tau_max < 1");
  if (!(x_max > 0.0)) throw DomainError("tau link requires x_max > 0");
  const double offset = std::log((1.0 - epsilon) / epsilon);
  const double alpha1 = (offset + std::log(tau_max / (1.0 - tau_max))) / x_max;
  return TauLink(epsilon, tau_max, x_max, offset, alpha1);
}

TauLink TauLink::with_slope(double epsilon, double alpha1, double x_max) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("tau link requires 0 < epsilon < 1");
  const double offset = std::log((1.0 - epsilon) / epsilon);
  return TauLink(epsilon, logistic(alpha1 * x_max - offset), x_max, offset, alpha1);
}

double tau_at_x(const TauLink& link, double x) {
  if (!(x >= 0.0 && x <= link.x_max()))
    throw DomainError("x = " + std::to_string(x) + " is outside the design space [0, " +
                      std::to_string(link.x_max()) + "]");
  const double tau = logistic(link.alpha1() * x - link.offset());
  return std::clamp(tau, link.epsilon(), link.tau_max());
}

CopulaSpec tau_matched_mixture(Family first, Family second, const TauLink& link, double alpha2,
                               double x) {
  if (!(alpha2 >= 0.0 && alpha2 <= 1.0)) throw DomainError("mixture weight alpha2 must lie in [0,1]");
  const double tau = tau_at_x(link, x);
  return MixtureCopula({{BaseCopula(first, tau_inverse(first, tau)), alpha2},
                        {BaseCopula(second, tau_inverse(second, tau)), 1.0 - alpha2}});
}

}  // namespace copula_oed
