#include "oracles.hpp"

#include <cmath>
#include <random>

namespace copula_oed::testing {

SymMatrix multinomial_fim_oracle(const DiscreteModel& model, double x, const ParamVector& gamma,
                                 double rel_step) {
  const std::size_t k = gamma.size();
  std::vector<double> base(gamma.values().begin(), gamma.values().end());
  std::vector<double> h(k);
  for (std::size_t i = 0; i < k; ++i) h[i] = rel_step * std::max(1.0, std::abs(base[i]));

  auto log_cells = [&](double di, std::size_t i, double dj, std::size_t j) {
    std::vector<double> g = base;
    g[i] += di;
    g[j] += dj;
    const auto p = model.raw_cells(x, g).array();
    std::array<double, 4> out{};
    for (std::size_t c = 0; c < 4; ++c) out[c] = std::log(p[c]);
    return out;
  };

  const auto p = model.raw_cells(x, base).array();
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      const auto pp = log_cells(h[i], i, h[j], j);
      const auto pm = log_cells(h[i], i, -h[j], j);
      const auto mp = log_cells(-h[i], i, h[j], j);
      const auto mm = log_cells(-h[i], i, -h[j], j);
      double v = 0.0;
      for (std::size_t c = 0; c < 4; ++c) {
        const double hess = (pp[c] - pm[c] - mp[c] + mm[c]) / (4.0 * h[i] * h[j]);
        v -= p[c] * hess;
      }
      info(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      info(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return SymMatrix::from_dense(info);
}

MonteCarloCells marshall_olkin_monte_carlo(const WeibullModel::Rates& r, double kappa, double zeta1,
                                           double zeta2, std::size_t draws, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> first(r.s3);
  std::exponential_distribution<double> after_y(r.s1);
  std::exponential_distribution<double> after_z(r.s2);
  const double a = std::pow(zeta1, kappa);
  const double b = std::pow(zeta2, kappa);

  std::array<std::size_t, 4> counts{};
  for (std::size_t n = 0; n < draws; ++n) {
    const double w = first(rng);
    const double pick = unit(rng) * r.s3;
    double ys = w;
    double zs = w;
    if (pick < r.beta1) {
      zs = w + after_y(rng);
    } else if (pick < r.beta1 + r.beta2) {
      ys = w + after_z(rng);
    }
    const int yi = ys > a ? 1 : 0;
    const int zi = zs > b ? 1 : 0;
    ++counts[static_cast<std::size_t>(2 * yi + zi)];
  }
  MonteCarloCells out;
  const double nd = static_cast<double>(draws);
  std::array<double, 4> f{};
  for (std::size_t c = 0; c < 4; ++c) {
    f[c] = static_cast<double>(counts[c]) / nd;
    out.se[c] = std::sqrt(f[c] * (1.0 - f[c]) / nd);
  }
  out.p = {f[0], f[1], f[2], f[3]};
  return out;
}

SymMatrix LinearGaussianModel::fim(double x, std::span<const double> gamma) const {
  check_point(x);
  check_gamma(gamma);
  SymMatrix m(2);
  const std::array<double, 2> f{1.0, x};
  m.add_outer(f);
  return m;
}

}  // namespace copula_oed::testing
