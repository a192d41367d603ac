#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "copula_oed/copulas.hpp"
#include "copula_oed/numerics.hpp"

using namespace copula_oed;

namespace {

std::vector<std::pair<std::string, CopulaSpec>> zoo() {
  return {
      {"product", BaseCopula::product()},
      {"clayton", BaseCopula(Family::Clayton, 2.0)},
      {"clayton-strong", BaseCopula(Family::Clayton, 18.0)},
      {"gumbel", BaseCopula(Family::Gumbel, 2.5)},
      {"frank", BaseCopula(Family::Frank, 5.0)},
      {"frank-negative", BaseCopula(Family::Frank, -3.0)},
      {"joe", BaseCopula(Family::Joe, 2.0)},
      {"mixture", MixtureCopula({{BaseCopula(Family::Clayton, 2.0), 0.3}, {BaseCopula(Family::Gumbel, 2.0), 0.7}})},
      {"khoudraji", KhoudrajiCopula(BaseCopula(Family::Clayton, 1.5), 0.4, 0.0)},
      {"khoudraji-joe", KhoudrajiCopula(BaseCopula(Family::Joe, 3.0), 0.2, 0.6)},
  };
}

// τ = 1 − 4 ∫∫ ∂C/∂u ∂C/∂v, partials by central differences of the cdf and
// a composite Gauss–Legendre rule. Uses only cdf().
double tau_oracle(const CopulaSpec& c) {
  const auto rule = QuadratureRule::composite_gauss_legendre(12, 100);
  const double h = 1e-6;
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double u = rule.nodes[i];
    for (std::size_t j = 0; j < rule.size(); ++j) {
      const double v = rule.nodes[j];
      const double hu = std::min(h, std::min(u, 1.0 - u) / 2);
      const double hv = std::min(h, std::min(v, 1.0 - v) / 2);
      const double cu = (cdf(c, u + hu, v) - cdf(c, u - hu, v)) / (2 * hu);
      const double cv = (cdf(c, u, v + hv) - cdf(c, u, v - hv)) / (2 * hv);
      acc += rule.weights[i] * rule.weights[j] * cu * cv;
    }
  }
  return 1.0 - 4.0 * acc;
}

}  // namespace

TEST_SUITE("copulas") {
  TEST_CASE("parameter domains") {
    CHECK_THROWS_AS(BaseCopula(Family::Clayton, -1.0), DomainError);
    CHECK_THROWS_AS(BaseCopula(Family::Clayton, 0.0), DomainError);
    CHECK_THROWS_AS(BaseCopula(Family::Gumbel, 0.5), DomainError);
    CHECK_THROWS_AS(BaseCopula(Family::Joe, 0.99), DomainError);
    CHECK_THROWS_AS(BaseCopula(Family::Frank, 0.0), DomainError);
    CHECK_NOTHROW(BaseCopula(Family::Gumbel, 1.0));
    CHECK_THROWS_AS(MixtureCopula({}), DomainError);
    CHECK_THROWS_AS(MixtureCopula({{BaseCopula::product(), 0.6}, {BaseCopula::product(), 0.6}}), DomainError);
    CHECK_THROWS_AS(KhoudrajiCopula(BaseCopula::product(), 1.2, 0.0), DomainError);
    CHECK_THROWS_AS(KhoudrajiCopula(BaseCopula::product(), 0.2, -0.1), DomainError);
    CHECK(parse_family("Clayton") == Family::Clayton);
    CHECK(parse_family("joe") == Family::Joe);
    CHECK_THROWS_AS(parse_family("gaussian"), DomainError);
  }

  TEST_CASE("cdf boundary conditions and the product copula") {
    for (const auto& [name, c] : zoo()) {
      CAPTURE(name);
      for (double t : {0.0, 0.13, 0.5, 0.87, 1.0}) {
        CHECK(cdf(c, t, 0.0) == 0.0);
        CHECK(cdf(c, 0.0, t) == 0.0);
        CHECK(cdf(c, 1.0, t) == doctest::Approx(t).epsilon(1e-15));
        CHECK(cdf(c, t, 1.0) == doctest::Approx(t).epsilon(1e-15));
      }
    }
    CHECK(cdf(BaseCopula::product(), 0.3, 0.5) == doctest::Approx(0.15).epsilon(1e-15));
    CHECK_THROWS_AS(cdf(BaseCopula::product(), 1.1, 0.5), DomainError);
    CHECK_THROWS_AS(cdf(BaseCopula::product(), 0.5, -0.01), DomainError);
  }

  TEST_CASE("pdf examples") {
    const BaseCopula product = BaseCopula::product();
    CHECK(pdf(product, 0.2, 0.9) == 1.0);
    const BaseCopula clayton(Family::Clayton, 2.0);
    CHECK(clayton.pdf(0.5, 0.5) >= 0.0);
    CHECK_THROWS_AS(clayton.pdf(0.0, 0.5), DomainError);
    CHECK_THROWS_AS(clayton.pdf(0.5, 1.0), DomainError);

    const BaseCopula gumbel(Family::Gumbel, 3.0);
    const CopulaSpec degenerate = MixtureCopula({{clayton, 1.0}, {gumbel, 0.0}});
    for (double u : {0.1, 0.4, 0.8})
      for (double v : {0.2, 0.6, 0.95}) CHECK(pdf(degenerate, u, v) == clayton.pdf(u, v));
  }

  TEST_CASE("densities integrate to one") {
    for (const auto& [name, c] : zoo()) {
      CAPTURE(name);
      if (name == "clayton-strong") continue;  // mass concentrated on the diagonal
      const double total = integrate_2d([&](double u, double v) { return pdf(c, u, v); }, {}, 64);
      CHECK(std::abs(total - 1.0) < 1e-5);
    }
  }

  TEST_CASE("Frechet bounds on a 101x101 grid") {
    for (const auto& [name, c] : zoo()) {
      CAPTURE(name);
      std::size_t violations = 0;
      for (int i = 0; i <= 100; ++i)
        for (int j = 0; j <= 100; ++j) {
          const double u = i / 100.0;
          const double v = j / 100.0;
          const double value = cdf(c, u, v);
          if (value < std::max(u + v - 1.0, 0.0) - 1e-12 || value > std::min(u, v) + 1e-12) ++violations;
        }
      CHECK(violations == 0);
    }
  }

  TEST_CASE("2-increasing on a 21x21 grid") {
    for (const auto& [name, c] : zoo()) {
      CAPTURE(name);
      std::size_t violations = 0;
      for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
          const double u1 = i / 20.0;
          const double u2 = (i + 1) / 20.0;
          const double v1 = j / 20.0;
          const double v2 = (j + 1) / 20.0;
          const double vol = cdf(c, u2, v2) - cdf(c, u2, v1) - cdf(c, u1, v2) + cdf(c, u1, v1);
          if (vol < -1e-12) ++violations;
        }
      CHECK(violations == 0);
    }
  }

  TEST_CASE("mixtures with random weights stay copulas") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
      const double w1 = unit(rng);
      const double w2 = (1.0 - w1) * unit(rng);
      const CopulaSpec mix = MixtureCopula({{BaseCopula(Family::Joe, 1.0 + 4.0 * unit(rng)), w1},
                                            {BaseCopula(Family::Frank, 10.0 * unit(rng) + 0.1), w2},
                                            {BaseCopula(Family::Clayton, 5.0 * unit(rng) + 0.1), 1.0 - w1 - w2}});
      std::size_t violations = 0;
      for (int i = 0; i <= 20; ++i) {
        const double t = i / 20.0;
        if (cdf(mix, t, 0.0) != 0.0 || std::abs(cdf(mix, 1.0, t) - t) > 1e-12) ++violations;
      }
      for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
          const double u1 = i / 20.0;
          const double u2 = (i + 1) / 20.0;
          const double v1 = j / 20.0;
          const double v2 = (j + 1) / 20.0;
          if (cdf(mix, u2, v2) - cdf(mix, u2, v1) - cdf(mix, u1, v2) + cdf(mix, u1, v1) < -1e-12) ++violations;
        }
      CHECK(violations == 0);
    }
  }

  TEST_CASE("pdf agrees with the mixed second difference of the cdf") {
    for (const auto& [name, c] : zoo()) {
      CAPTURE(name);
      if (name == "clayton-strong") continue;
      const double h = 1e-4;
      for (int i = 1; i <= 9; ++i)
        for (int j = 1; j <= 9; ++j) {
          const double u = i / 10.0;
          const double v = j / 10.0;
          const double fd = (cdf(c, u + h, v + h) - cdf(c, u + h, v - h) - cdf(c, u - h, v + h) +
                             cdf(c, u - h, v - h)) /
                            (4 * h * h);
          const double exact = pdf(c, u, v);
          CAPTURE(u);
          CAPTURE(v);
          CHECK(std::abs(fd - exact) <= 1e-4 * std::max(1.0, exact));
        }
    }
  }

  TEST_CASE("partial derivatives agree with finite differences") {
    for (const auto& [name, c] : zoo()) {
      CAPTURE(name);
      for (double u : {0.15, 0.5, 0.85})
        for (double v : {0.25, 0.6, 0.9}) {
          const std::vector<double> p{u, v};
          const auto g = grad_fd([&](std::span<const double> q) { return cdf(c, q[0], q[1]); }, p);
          CHECK(partial_u(c, u, v) == doctest::Approx(g[0]).epsilon(1e-5));
          CHECK(partial_v(c, u, v) == doctest::Approx(g[1]).epsilon(1e-5));
        }
    }
  }

  TEST_CASE("analytic log-density gradients agree with finite differences") {
    for (const auto& base : {BaseCopula(Family::Clayton, 2.0), BaseCopula(Family::Clayton, 18.0),
                             BaseCopula(Family::Clayton, 0.3)}) {
      for (double u : {0.05, 0.4, 0.9})
        for (double v : {0.1, 0.55, 0.97}) {
          double g[3];
          REQUIRE(base.log_pdf_gradient(u, v, g));
          const std::vector<double> p{u, v, base.alpha1()};
          const auto fd = grad_fd(
              [&](std::span<const double> q) {
                return BaseCopula::unchecked(base.family(), q[2]).log_pdf(q[0], q[1]);
              },
              p);
          for (int k = 0; k < 3; ++k) CHECK(g[k] == doctest::Approx(fd[static_cast<std::size_t>(k)]).epsilon(1e-5));
        }
    }
  }

  TEST_CASE("conditional inverse inverts the conditional distribution") {
    for (const auto& base : {BaseCopula(Family::Clayton, 3.0), BaseCopula(Family::Gumbel, 2.0),
                             BaseCopula(Family::Frank, 7.0), BaseCopula(Family::Joe, 2.5)}) {
      for (double u : {0.1, 0.5, 0.9})
        for (double t : {0.05, 0.5, 0.95}) {
          const double v = base.conditional_inverse(u, t);
          CHECK(base.partial_u(u, v) == doctest::Approx(t).epsilon(1e-9));
        }
    }
  }

  TEST_CASE("Khoudraji transform") {
    const BaseCopula gumbel(Family::Gumbel, 2.0);
    for (double u : {0.2, 0.7})
      for (double v : {0.3, 0.9}) {
        CHECK(khoudraji_cdf(KhoudrajiCopula(gumbel, 0.0, 0.0), u, v) == gumbel.cdf(u, v));
        CHECK(khoudraji_cdf(KhoudrajiCopula(gumbel, 1.0, 1.0), u, v) == doctest::Approx(u * v).epsilon(1e-15));
      }

    const KhoudrajiCopula skewed(BaseCopula(Family::Clayton, 1.5), 0.4, 0.0);
    double asym = 0.0;
    for (int i = 0; i <= 100; ++i)
      for (int j = 0; j <= 100; ++j) {
        const double u = i / 100.0;
        const double v = j / 100.0;
        asym = std::max(asym, std::abs(khoudraji_cdf(skewed, u, v) - khoudraji_cdf(skewed, v, u)));
      }
    CHECK(asym > 0.0);
    MESSAGE("max |C(u,v) - C(v,u)| = " << asym);

    for (const auto& base : {BaseCopula(Family::Clayton, 1.5), BaseCopula(Family::Joe, 2.0), BaseCopula(Family::Frank, 4.0)}) {
      const KhoudrajiCopula sym(base, 0.35, 0.35);
      double worst = 0.0;
      for (int i = 0; i <= 100; ++i)
        for (int j = 0; j <= 100; ++j) {
          const double u = i / 100.0;
          const double v = j / 100.0;
          worst = std::max(worst, std::abs(khoudraji_cdf(sym, u, v) - khoudraji_cdf(sym, v, u)));
        }
      CHECK(worst <= 1e-12);
    }
  }

  TEST_CASE("Kendall tau closed forms and numerical oracle") {
    CHECK(kendall_tau(BaseCopula::product()) == 0.0);
    CHECK(kendall_tau(BaseCopula(Family::Clayton, 18.0)) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(std::abs(tau_oracle(BaseCopula(Family::Gumbel, 2.0)) - 0.5) < 1e-6);
    CHECK(kendall_tau(BaseCopula(Family::Gumbel, 2.0)) == doctest::Approx(0.5).epsilon(1e-14));
    // 1 + 2/(2 - t)(digamma(2) - digamma(1 + 2/t)) at t = 6, evaluated to 30 digits
    CHECK(kendall_tau(BaseCopula(Family::Joe, 6.0)) == doctest::Approx(0.7225909424403633).epsilon(1e-13));

    for (const CopulaSpec& c : {CopulaSpec(BaseCopula(Family::Frank, 5.0)), CopulaSpec(BaseCopula(Family::Frank, -3.0)),
                                CopulaSpec(BaseCopula(Family::Joe, 2.0)), CopulaSpec(BaseCopula(Family::Joe, 6.0)),
                                CopulaSpec(KhoudrajiCopula(BaseCopula(Family::Clayton, 1.5), 0.4, 0.0))}) {
      CAPTURE(describe(c));
      CHECK(std::abs(kendall_tau(c) - tau_oracle(c)) < 1e-6);
    }
  }

  TEST_CASE("tau_inverse examples and round trip") {
    CHECK(std::abs(tau_inverse(Family::Clayton, 0.9) - 18.0) < 1e-6);
    CHECK(std::abs(tau_inverse(Family::Clayton, 0.5) - 2.0) < 1e-6);
    CHECK_THROWS_AS(tau_inverse(Family::Gumbel, 0.0), DomainError);
    CHECK_THROWS_AS(tau_inverse(Family::Frank, -0.2), DomainError);
    CHECK_THROWS_AS(tau_inverse(Family::Joe, 1.0), DomainError);
    CHECK_THROWS_AS(tau_inverse(Family::Product, 0.3), DomainError);

    for (Family f : {Family::Clayton, Family::Gumbel, Family::Frank, Family::Joe}) {
      for (int k = 1; k <= 9; ++k) {
        const double tau = k / 10.0;
        const double alpha = tau_inverse(f, tau);
        const double back = kendall_tau(BaseCopula(f, alpha));
        CAPTURE(family_name(f));
        CAPTURE(tau);
        CHECK(std::abs(back - tau) <= 1e-8);
        CHECK(std::abs(tau_inverse(f, back) - alpha) <= 1e-6);
      }
    }
  }

  TEST_CASE("logistic tau link") {
    const TauLink i1 = TauLink::calibrated(0.05, 0.3, 10.0);
    CHECK(i1.offset() == doctest::Approx(2.944438979166440).epsilon(1e-14));
    CHECK(tau_at_x(i1, 0.0) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(tau_at_x(i1, 10.0) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(i1.alpha1() == doctest::Approx(0.20971).epsilon(1e-4));
    CHECK_THROWS_AS(tau_at_x(i1, 10.5), DomainError);
    CHECK_THROWS_AS(tau_at_x(i1, -0.1), DomainError);
    CHECK_THROWS_AS(TauLink::calibrated(0.05, 0.04, 10.0), DomainError);
    CHECK_THROWS_AS(TauLink::calibrated(0.0, 0.3, 10.0), DomainError);

    const TauLink i3 = TauLink::calibrated(0.05, 0.95, 10.0);
    CHECK(tau_at_x(i3, 10.0) == doctest::Approx(0.95).epsilon(1e-12));
    CHECK(tau_at_x(i3, i3.offset() / i3.alpha1()) == doctest::Approx(0.5).epsilon(1e-12));
    const TauLink same = TauLink::with_slope(0.05, i3.alpha1(), 10.0);
    CHECK(same.tau_max() == doctest::Approx(0.95).epsilon(1e-12));
  }

  TEST_CASE("tau-matched mixtures") {
    const TauLink link = TauLink::calibrated(0.05, 0.9, 10.0);
    const double mid = link.offset() / link.alpha1();
    const CopulaSpec pure = tau_matched_mixture(Family::Joe, Family::Frank, link, 1.0, 3.0);
    const auto& comps = std::get<MixtureCopula>(pure).components();
    REQUIRE(comps.size() == 2);
    CHECK(comps[0].weight == 1.0);
    CHECK(kendall_tau(comps[0].copula) == doctest::Approx(tau_at_x(link, 3.0)).epsilon(1e-9));
    for (double u : {0.2, 0.7}) CHECK(cdf(pure, u, 0.4) == doctest::Approx(comps[0].copula.cdf(u, 0.4)).epsilon(1e-15));

    const CopulaSpec cg = tau_matched_mixture(Family::Clayton, Family::Gumbel, link, 0.5, mid);
    const auto& parts = std::get<MixtureCopula>(cg).components();
    CHECK(parts[0].copula.family() == Family::Clayton);
    CHECK(parts[0].copula.alpha1() == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(parts[1].copula.family() == Family::Gumbel);
    CHECK(parts[1].copula.alpha1() == doctest::Approx(2.0).epsilon(1e-9));

    const double tau = kendall_tau(cg);
    CHECK(tau > 0.0);
    CHECK(tau < 1.0);
    CHECK(std::abs(tau - tau_oracle(cg)) < 1e-6);
    MESSAGE("tau of the 50/50 Clayton-Gumbel mixture at component tau 0.5: " << tau);
  }
}
