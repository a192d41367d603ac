#include <doctest.h>

#include <cmath>
#include <vector>

#include "copula_oed/design.hpp"

using namespace copula_oed;

// Published design for the polynomial regression model with a Clayton copula
// (α₁ = 18), Ds-optimal for the six mean parameters.
TEST_CASE("sensitivity of the published Clayton Ds-optimal design") {
  const FedorovModel model(BaseCopula(Family::Clayton, 18.0));
  const ParamVector gamma = model.nominal();
  const auto spec = CriterionSpec::ds(6);
  // The printed weights are rounded to four places and sum to 1.0001.
  std::vector<double> w{0.1502, 0.0854, 0.3419, 0.4226};
  const double total = w[0] + w[1] + w[2] + w[3];
  for (double& x : w) x /= total;
  const Design published({0.0, 0.3414, 0.7901, 1.0}, w);

  for (double x : published.points()) {
    CAPTURE(x);
    CHECK(std::abs(sensitivity(model, x, published, gamma, spec) - 6.0) <= 5e-2);
  }
  double worst = 0.0;
  for (double x : uniform_grid({0.0, 1.0}, 1001)) worst = std::max(worst, sensitivity(model, x, published, gamma, spec));
  MESSAGE("max sensitivity of the published design: " << worst);
  CHECK(worst <= 6.0 + 5e-2);
}

TEST_CASE("Kendall tau of the Clayton copula in the regression example") {
  CHECK(std::abs(kendall_tau(BaseCopula(Family::Clayton, 18.0)) - 0.9) <= 1e-6);
  CHECK(std::abs(tau_inverse(Family::Clayton, 0.9) - 18.0) <= 1e-6);
}
