#pragma once

// Parametric bivariate copulas: the four one-parameter Archimedean families
// plus independence, finite convex mixtures, and Khoudraji's asymmetrization.

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "copula_oed/errors.hpp"

namespace copula_oed {

enum class Family { Product, Clayton, Gumbel, Frank, Joe };

std::string_view family_name(Family family);
/// Case-insensitive; accepts full names and the one-letter codes C, G, F, J, P.
Family parse_family(std::string_view name);

/// One-parameter copula. Parameter domains: Clayton α > 0, Gumbel α ≥ 1,
/// Joe α ≥ 1, Frank α ≠ 0; Product carries no parameter.
class BaseCopula {
 public:
  /// Throws DomainError when alpha1 is outside the family's domain.
  BaseCopula(Family family, double alpha1);
  static BaseCopula product() { return BaseCopula(Family::Product, 0.0); }

  /// Skips the parameter-domain check. Used where a formula is evaluated by
  /// analytic continuation, e.g. finite differences at a domain edge.
  static BaseCopula unchecked(Family family, double alpha1);

  Family family() const noexcept { return family_; }
  double alpha1() const noexcept { return alpha1_; }

  double cdf(double u, double v) const;
  double pdf(double u, double v) const;
  double log_pdf(double u, double v) const;
  /// ∂C/∂u, the conditional distribution of V given U = u.
  double partial_u(double u, double v) const;
  /// ∂C/∂v; the families are exchangeable so this is partial_u(v, u).
  double partial_v(double u, double v) const { return partial_u(v, u); }
  /// v such that partial_u(u, v) = t.
  double conditional_inverse(double u, double t) const;

  /// Analytic ∂ log c / ∂(u, v, α) at (u, v); only Clayton and Product.
  /// Returns false when no analytic form is coded for the family.
  bool log_pdf_gradient(double u, double v, double out[3]) const;
  /// Same derivatives taken in log coordinates, (u ∂/∂u, v ∂/∂v, ∂/∂α) of
  /// log c, evaluated from log u and log v. Stays accurate when u or v is
  /// within rounding of 0 or 1.
  bool log_pdf_log_gradient(double log_u, double log_v, double out[3]) const;
  /// log of conditional_inverse(e^log_u, e^log_t).
  double log_conditional_inverse(double log_u, double log_t) const;

  friend bool operator==(const BaseCopula&, const BaseCopula&) = default;

 private:
  struct Unchecked {};
  BaseCopula(Family family, double alpha1, Unchecked) : family_(family), alpha1_(alpha1) {}

  Family family_ = Family::Product;
  double alpha1_ = 0.0;
};

struct MixtureComponent {
  BaseCopula copula;
  double weight = 0.0;
  friend bool operator==(const MixtureComponent&, const MixtureComponent&) = default;
};

/// Σ λᵢ Cᵢ with λᵢ ≥ 0 and Σ λᵢ = 1 (within 1e-12).
class MixtureCopula {
 public:
  explicit MixtureCopula(std::vector<MixtureComponent> components);
  const std::vector<MixtureComponent>& components() const noexcept { return components_; }
  friend bool operator==(const MixtureCopula&, const MixtureCopula&) = default;

 private:
  std::vector<MixtureComponent> components_;
};

/// C(u,v) = u^α₂ v^α₃ C_base(u^(1−α₂), v^(1−α₃)) with α₂, α₃ ∈ [0,1].
class KhoudrajiCopula {
 public:
  KhoudrajiCopula(BaseCopula base, double alpha2, double alpha3);
  static KhoudrajiCopula unchecked(BaseCopula base, double alpha2, double alpha3);

  const BaseCopula& base() const noexcept { return base_; }
  double alpha2() const noexcept { return alpha2_; }
  double alpha3() const noexcept { return alpha3_; }
  friend bool operator==(const KhoudrajiCopula&, const KhoudrajiCopula&) = default;

 private:
  struct Unchecked {};
  KhoudrajiCopula(BaseCopula base, double alpha2, double alpha3, Unchecked)
      : base_(base), alpha2_(alpha2), alpha3_(alpha3) {}

  BaseCopula base_;
  double alpha2_;
  double alpha3_;
};

using CopulaSpec = std::variant<BaseCopula, MixtureCopula, KhoudrajiCopula>;

/// C(u,v) for u, v ∈ [0,1]; DomainError otherwise. The result is clipped to
/// the Fréchet–Hoeffding bounds to absorb roundoff.
double cdf(const CopulaSpec& copula, double u, double v);
/// Density on the open square; DomainError on the boundary.
double pdf(const CopulaSpec& copula, double u, double v);
double partial_u(const CopulaSpec& copula, double u, double v);
double partial_v(const CopulaSpec& copula, double u, double v);

double khoudraji_cdf(const KhoudrajiCopula& k, double u, double v);
double khoudraji_pdf(const KhoudrajiCopula& k, double u, double v);

/// Flattened parameter vector: (α₁) for a base family, (α₁ᵢ, λᵢ)ᵢ for a
/// mixture, (α₁, α₂, α₃) for a Khoudraji transform.
std::vector<double> parameters(const CopulaSpec& copula);
std::string describe(const CopulaSpec& copula);

// ---------------------------------------------------------------------------
// Kendall's tau

/// Closed forms for Clayton and Gumbel, Debye-function form for Frank, the
/// Archimedean generator integral for Joe; mixtures and Khoudraji transforms
/// through τ = 1 − 4 ∫∫ ∂C/∂u ∂C/∂v du dv.
double kendall_tau(const CopulaSpec& copula);

/// τ by direct numerical evaluation of 1 − 4 ∫∫ ∂C/∂u ∂C/∂v for any copula.
/// `order` Gauss–Legendre nodes per panel, `panels` panels per axis.
double kendall_tau_numeric(const CopulaSpec& copula, std::size_t order = 16,
                           std::size_t panels = 24);

/// Parameter α of `family` with Kendall's τ equal to `tau`, for positive
/// association only. Throws DomainError for τ outside (0,1) or the Product family.
double tau_inverse(Family family, double tau);

// ---------------------------------------------------------------------------
// Logistic link for τ as a function of the regressor

/// τ(x) = exp(α₁x − c) / (1 + exp(α₁x − c)) on [0, x_max] with c fixed by
/// τ(0) = ε.
class TauLink {
 public:
  /// α₁ chosen so that τ(x_max) = tau_max.
  static TauLink calibrated(double epsilon, double tau_max, double x_max);
  /// Explicit slope; tau_max follows from the logistic at x_max.
  static TauLink with_slope(double epsilon, double alpha1, double x_max);

  double epsilon() const noexcept { return epsilon_; }
  double tau_max() const noexcept { return tau_max_; }
  double x_max() const noexcept { return x_max_; }
  double offset() const noexcept { return offset_; }
  double alpha1() const noexcept { return alpha1_; }

 private:
  TauLink(double epsilon, double tau_max, double x_max, double offset, double alpha1);

  double epsilon_;
  double tau_max_;
  double x_max_;
  double offset_;
  double alpha1_;
};

/// Logistic τ at x, clamped to [ε, tau_max]. DomainError for x ∉ [0, x_max].
double tau_at_x(const TauLink& link, double x);

/// α₂·C₁(h₁) + (1−α₂)·C₂(h₂) where hᵢ = tau_inverse(familyᵢ, tau_at_x(link, x)).
CopulaSpec tau_matched_mixture(Family first, Family second, const TauLink& link, double alpha2,
                               double x);

}  // namespace copula_oed
