#include "copula_oed/design.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <tuple>

namespace copula_oed {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMergeTolerance = 1e-9;

}  // namespace

// ---------------------------------------------------------------------------
// Design

Design::Design(std::vector<double> points, std::vector<double> weights) {
  if (points.empty()) throw DomainError("a design needs at least one point");
  if (points.size() != weights.size())
    throw DomainError("design points and weights differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i])) throw DomainError("design point is not finite");
    if (!(weights[i] >= 0.0 && std::isfinite(weights[i])))
      throw DomainError("design weights must be nonnegative");
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw DomainError("design weights must sum to 1");

  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  for (std::size_t i : order) {
    if (!points_.empty() && points[i] - points_.back() <= kMergeTolerance) {
      weights_.back() += weights[i] / total;
    } else {
      points_.push_back(points[i]);
      weights_.push_back(weights[i] / total);
    }
  }
}

Design Design::uniform(std::span<const double> points) {
  return Design(std::vector<double>(points.begin(), points.end()),
                std::vector<double>(points.size(), 1.0 / static_cast<double>(points.size())));
}

// ---------------------------------------------------------------------------
// Criteria

CriterionSpec CriterionSpec::da(Eigen::MatrixXd a) {
  if (a.cols() < 1 || a.rows() <= a.cols())
    throw DomainError("D_A contrast matrix must be (k+l)×s with 1 ≤ s < k+l");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (lu.rank() != a.cols()) throw DomainError("D_A contrast matrix must have full column rank");
  const auto s = static_cast<std::size_t>(a.cols());
  return CriterionSpec(CriterionKind::DA, s, std::move(a));
}

CriterionSpec CriterionSpec::ds(std::size_t s) {
  if (s < 1) throw DomainError("D_s subset size must be at least 1");
  return CriterionSpec(CriterionKind::Ds, s, {});
}

double CriterionSpec::bound(std::size_t dim) const {
  return static_cast<double>(kind_ == CriterionKind::D ? dim : s_);
}

void CriterionSpec::validate(std::size_t dim) const {
  switch (kind_) {
    case CriterionKind::D:
      return;
    case CriterionKind::Ds:
      if (s_ >= dim)
        throw DomainError("D_s subset must be a strict subset: s = " + std::to_string(s_) +
                          " but the model has " + std::to_string(dim) + " parameters");
      return;
    case CriterionKind::DA:
      if (static_cast<std::size_t>(a_.rows()) != dim)
        throw DomainError("D_A contrast matrix has " + std::to_string(a_.rows()) +
                          " rows but the model has " + std::to_string(dim) + " parameters");
      return;
  }
}

std::string CriterionSpec::describe() const {
  switch (kind_) {
    case CriterionKind::D: return "D";
    case CriterionKind::Ds: return "Ds(s=" + std::to_string(s_) + ")";
    case CriterionKind::DA: return "DA(s=" + std::to_string(s_) + ")";
  }
  return "?";
}

SymMatrix info_matrix(const OutcomeModel& model, const Design& design, const ParamVector& gamma) {
  SymMatrix m(gamma.size());
  for (std::size_t i = 0; i < design.size(); ++i) {
    if (design.weights()[i] == 0.0) continue;
    m.add_scaled(model.fim(design.points()[i], gamma.values()), design.weights()[i]);
  }
  return m;
}

namespace {

[[noreturn]] void rethrow_with_context(const SingularMatrixError& e, const CriterionSpec& spec) {
  throw SingularMatrixError(spec.describe() + " criterion: " + e.what(), e.pivot_index());
}

}  // namespace

double criterion_value(const SymMatrix& m, const CriterionSpec& spec) {
  spec.validate(m.dim());
  try {
    switch (spec.kind()) {
      case CriterionKind::D:
        return logdet_psd(m);
      case CriterionKind::Ds:
        return logdet_psd(schur_complement(m, spec.subset()));
      case CriterionKind::DA: {
        const Cholesky chol(m);
        const Eigen::MatrixXd x = chol.solve(spec.contrasts());
        return -logdet_psd(SymMatrix::from_dense(spec.contrasts().transpose() * x));
      }
    }
  } catch (const SingularMatrixError& e) {
    rethrow_with_context(e, spec);
  }
  return 0.0;
}

SymMatrix sensitivity_kernel(const SymMatrix& m, const CriterionSpec& spec) {
  spec.validate(m.dim());
  try {
    switch (spec.kind()) {
      case CriterionKind::D:
        return inverse_spd(m);
      case CriterionKind::Ds: {
        const std::size_t s = spec.subset();
        const std::size_t r = m.dim() - s;
        Eigen::MatrixXd q = inverse_spd(m).dense();
        q.bottomRightCorner(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r)) -=
            inverse_spd(m.block(s, r)).dense();
        return SymMatrix::from_dense(q);
      }
      case CriterionKind::DA: {
        const Cholesky chol(m);
        const Eigen::MatrixXd x = chol.solve(spec.contrasts());
        const Cholesky inner(SymMatrix::from_dense(spec.contrasts().transpose() * x));
        return SymMatrix::from_dense(x * inner.solve(x.transpose()));
      }
    }
  } catch (const SingularMatrixError& e) {
    rethrow_with_context(e, spec);
  }
  return {};
}

double trace_product(const SymMatrix& q, const SymMatrix& m) {
  return q.dense().cwiseProduct(m.dense()).sum();
}

double sensitivity(const OutcomeModel& model, double x, const Design& design,
                   const ParamVector& gamma, const CriterionSpec& spec) {
  const SymMatrix q = sensitivity_kernel(info_matrix(model, design, gamma), spec);
  return trace_product(q, model.fim(x, gamma.values()));
}

double efficiency(const SymMatrix& m, const SymMatrix& m_star, const CriterionSpec& spec) {
  const double b = spec.bound(m.dim());
  return std::exp((criterion_value(m, spec) - criterion_value(m_star, spec)) / b);
}

double efficiency(const OutcomeModel& model, const Design& xi, const Design& xi_star,
                  const ParamVector& gamma, const CriterionSpec& spec) {
  return efficiency(info_matrix(model, xi, gamma), info_matrix(model, xi_star, gamma), spec);
}

std::vector<double> uniform_grid(Interval domain, std::size_t n) {
  if (n == 0) throw DomainError("grid needs at least one point");
  if (n == 1) return {domain.lo};
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i)
    xs[i] = domain.lo + domain.width() * static_cast<double>(i) / static_cast<double>(n - 1);
  xs.back() = domain.hi;
  return xs;
}

std::vector<SymMatrix> candidate_fims(const OutcomeModel& model, std::span<const double> xs,
                                      const ParamVector& gamma) {
  std::vector<SymMatrix> out(xs.size());
  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), xs.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = model.fim(xs[i], gamma.values());
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < xs.size(); i = next++) {
          try {
            out[i] = model.fim(xs[i], gamma.values());
          } catch (...) {
            const std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

// ---------------------------------------------------------------------------
// Weight optimization

namespace {

class Objective {
 public:
  Objective(std::span<const SymMatrix> fims, const CriterionSpec& spec)
      : fims_(fims), spec_(spec), dim_(fims.front().dim()), bound_(spec.bound(dim_)) {}

  double bound() const { return bound_; }
  std::size_t size() const { return fims_.size(); }
  const SymMatrix& fim(std::size_t i) const { return fims_[i]; }

  SymMatrix assemble(std::span<const double> w) const {
    SymMatrix m(dim_);
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i] > 0.0) m.add_scaled(fims_[i], w[i]);
    return m;
  }

  /// −∞ for a singular matrix.
  double value(const SymMatrix& m) const {
    try {
      return criterion_value(m, spec_);
    } catch (const SingularMatrixError&) {
      return kNegInf;
    }
  }

  std::vector<double> sensitivities(const SymMatrix& m) const {
    const SymMatrix q = sensitivity_kernel(m, spec_);
    std::vector<double> d(fims_.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = trace_product(q, fims_[i]);
    return d;
  }

  /// Directional derivative of the criterion at m along delta; −∞ if singular.
  double slope(const SymMatrix& m, const SymMatrix& delta) const {
    try {
      return trace_product(sensitivity_kernel(m, spec_), delta);
    } catch (const SingularMatrixError&) {
      return kNegInf;
    }
  }

 private:
  std::span<const SymMatrix> fims_;
  const CriterionSpec& spec_;
  std::size_t dim_;
  double bound_;
};

struct State {
  std::vector<double> w;
  SymMatrix m;
  double value = kNegInf;
};

// Moves up to `limit` weight from candidate `from` to candidate `to` by an
// exact line search on the concave criterion. Returns true if the state improved.
bool exchange(const Objective& obj, State& st, std::size_t from, std::size_t to, double limit) {
  if (limit <= 0.0 || from == to) return false;
  const SymMatrix delta = obj.fim(to) - obj.fim(from);
  auto at = [&](double t) {
    SymMatrix m = st.m;
    m.add_scaled(delta, t);
    return m;
  };
  if (!(obj.slope(st.m, delta) > 0.0)) return false;
  double t = limit;
  if (!(obj.slope(at(limit), delta) >= 0.0)) {
    double lo = 0.0;
    double hi = limit;
    for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      (obj.slope(at(mid), delta) > 0.0 ? lo : hi) = mid;
    }
    t = lo;
  }
  if (t <= 0.0) return false;
  SymMatrix m = at(t);
  const double v = obj.value(m);
  if (!(v >= st.value)) return false;
  st.w[to] += t;
  st.w[from] = std::max(0.0, st.w[from] - t);
  if (st.w[from] < 1e-15) st.w[from] = 0.0;
  st.m = std::move(m);
  st.value = v;
  return true;
}

void renormalize(std::vector<double>& w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
}

bool try_weights(const Objective& obj, State& st, std::vector<double> w) {
  renormalize(w);
  SymMatrix m = obj.assemble(w);
  const double v = obj.value(m);
  if (!(v >= st.value)) return false;
  st.w = std::move(w);
  st.m = std::move(m);
  st.value = v;
  return true;
}

std::size_t first_argmax(std::span<const double> d) {
  std::size_t j = 0;
  for (std::size_t i = 1; i < d.size(); ++i)
    if (d[i] > d[j]) j = i;
  return j;
}

}  // namespace

WeightResult optimize_weights(std::span<const SymMatrix> fims, const CriterionSpec& spec,
                              const OptimizerConfig& cfg, std::span<const double> initial) {
  if (fims.empty()) throw DomainError("optimizer needs at least one candidate");
  spec.validate(fims.front().dim());
  const Objective obj(fims, spec);
  const double b = obj.bound();
  const std::size_t n = fims.size();

  State st;
  if (initial.empty()) {
    st.w.assign(n, 1.0 / static_cast<double>(n));
  } else {
    if (initial.size() != n) throw DomainError("initial weights do not match the candidate set");
    st.w.assign(initial.begin(), initial.end());
    renormalize(st.w);
  }
  st.m = obj.assemble(st.w);
  st.value = obj.value(st.m);
  if (st.value == kNegInf) {
    // Surfaces the singular-matrix error with its pivot.
    (void)criterion_value(st.m, spec);
  }

  WeightResult res;
  std::vector<double> d = obj.sensitivities(st.m);
  for (res.iterations = 0; res.iterations < cfg.max_iterations; ++res.iterations) {
    const std::size_t j = first_argmax(d);
    if (d[j] <= b * (1.0 + cfg.delta)) {
      res.converged = true;
      break;
    }

    // Vertex exchange from the weakest support point to the strongest candidate.
    std::size_t k = n;
    for (std::size_t i = 0; i < n; ++i)
      if (st.w[i] > 0.0 && i != j && (k == n || d[i] < d[k])) k = i;
    if (k < n) exchange(obj, st, k, j, st.w[k]);

    // Exchanges between consecutive support points.
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < n; ++i)
      if (st.w[i] > 0.0) support.push_back(i);
    for (std::size_t s = 0; s + 1 < support.size(); ++s) {
      const std::size_t a = support[s];
      const std::size_t c = support[s + 1];
      if (!exchange(obj, st, c, a, st.w[c])) exchange(obj, st, a, c, st.w[a]);
    }

    // Multiplicative update with step halving.
    d = obj.sensitivities(st.m);
    std::vector<double> proposal(n);
    for (std::size_t i = 0; i < n; ++i)
      proposal[i] = st.w[i] * std::pow(std::max(d[i], 0.0) / b, cfg.damping);
    for (int halving = 0; halving < 30; ++halving) {
      if (try_weights(obj, st, proposal)) break;
      for (std::size_t i = 0; i < n; ++i) proposal[i] = 0.5 * (proposal[i] + st.w[i]);
    }

    // Drop negligible weights where the sensitivity is below the bound.
    d = obj.sensitivities(st.m);
    std::vector<double> purged = st.w;
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (purged[i] > 0.0 && purged[i] < cfg.weight_floor && d[i] < b) {
        purged[i] = 0.0;
        any = true;
      }
    }
    if (any && try_weights(obj, st, std::move(purged))) d = obj.sensitivities(st.m);

    res.history.push_back(st.value);
  }
  res.weights = st.w;
  res.sensitivities = std::move(d);
  res.criterion_value = st.value;
  return res;
}

// ---------------------------------------------------------------------------
// Design optimization

namespace {

double golden_max(const std::function<double(double)>& f, double lo, double hi) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo;
  double b = hi;
  double c = b - r * (b - a);
  double e = a + r * (b - a);
  double fc = f(c);
  double fe = f(e);
  while (b - a > 1e-10 * std::max(1.0, std::abs(hi - lo))) {
    if (fc >= fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + r * (b - a);
      fe = f(e);
    }
  }
  double best = 0.5 * (a + b);
  double fbest = f(best);
  for (double x : {lo, hi}) {
    const double fx = f(x);
    if (fx > fbest) {
      best = x;
      fbest = fx;
    }
  }
  return best;
}

Design support_design(std::span<const double> xs, std::span<const double> w) {
  std::vector<double> pts;
  std::vector<double> wts;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (w[i] > 0.0) {
      pts.push_back(xs[i]);
      wts.push_back(w[i]);
    }
  }
  const double total = std::accumulate(wts.begin(), wts.end(), 0.0);
  for (double& x : wts) x /= total;
  return Design(std::move(pts), std::move(wts));
}

}  // namespace

DesignResult optimize_design(const OutcomeModel& model, const ParamVector& gamma,
                             const CriterionSpec& spec, std::span<const double> grid,
                             const OptimizerConfig& cfg) {
  spec.validate(model.dimension());
  if (gamma.size() != model.dimension())
    throw DomainError("parameter vector does not match the model dimension");
  if (grid.empty()) throw DomainError("candidate grid is empty");

  std::vector<double> xs(grid.begin(), grid.end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(),
                       [](double a, double b) { return b - a <= kMergeTolerance; }),
           xs.end());
  const Interval space = model.design_space();
  std::vector<SymMatrix> fims = candidate_fims(model, xs, gamma);

  DesignResult out;
  out.spec = spec;
  out.bound = spec.bound(model.dimension());

  WeightResult wr = optimize_weights(fims, spec, cfg);
  out.history = wr.history;
  out.iterations = wr.iterations;

  double spacing = space.width();
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) spacing = std::min(spacing, xs[i + 1] - xs[i]);

  if (cfg.polish && xs.size() > 1) {
    for (std::size_t round = 0; round < cfg.polish_rounds; ++round) {
      const Objective obj(fims, spec);
      const SymMatrix q = sensitivity_kernel(obj.assemble(wr.weights), spec);
      auto sens = [&](double x) { return trace_product(q, model.fim(x, gamma.values())); };

      // Clusters of support points no more than ~one grid cell apart.
      std::vector<std::pair<double, double>> clusters;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (wr.weights[i] <= 0.0) continue;
        if (!clusters.empty() && xs[i] - clusters.back().second <= 1.5 * spacing)
          clusters.back().second = xs[i];
        else
          clusters.emplace_back(xs[i], xs[i]);
      }
      std::vector<double> fresh;
      for (const auto& [lo, hi] : clusters) {
        const double a = std::max(space.lo, lo - spacing);
        const double b = std::min(space.hi, hi + spacing);
        const double x = golden_max(sens, a, b);
        const bool known = std::any_of(xs.begin(), xs.end(), [&](double y) {
          return std::abs(y - x) <= kMergeTolerance;
        });
        if (!known) fresh.push_back(x);
      }
      if (fresh.empty()) break;

      // Merge the polished points into the candidate set, keeping x order.
      std::vector<double> new_xs = xs;
      new_xs.insert(new_xs.end(), fresh.begin(), fresh.end());
      std::vector<std::size_t> order(new_xs.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return new_xs[a] < new_xs[b]; });
      const std::vector<SymMatrix> fresh_fims = candidate_fims(model, fresh, gamma);
      std::vector<double> sorted_xs(order.size());
      std::vector<SymMatrix> sorted_fims(order.size());
      std::vector<double> warm(order.size(), 0.0);
      for (std::size_t r = 0; r < order.size(); ++r) {
        const std::size_t o = order[r];
        sorted_xs[r] = new_xs[o];
        if (o < xs.size()) {
          sorted_fims[r] = fims[o];
          warm[r] = wr.weights[o];
        } else {
          sorted_fims[r] = fresh_fims[o - xs.size()];
        }
      }
      xs = std::move(sorted_xs);
      fims = std::move(sorted_fims);

      // Prefer a start that puts each cluster's mass on its polished point,
      // but only when that does not lower the criterion.
      std::vector<double> collapsed = warm;
      for (const double x : fresh) {
        const auto target = static_cast<std::size_t>(
            std::find(xs.begin(), xs.end(), x) - xs.begin());
        for (std::size_t i = 0; i < xs.size(); ++i) {
          if (i != target && collapsed[i] > 0.0 && std::abs(xs[i] - x) <= 2.5 * spacing) {
            collapsed[target] += collapsed[i];
            collapsed[i] = 0.0;
          }
        }
      }
      const Objective grown(fims, spec);
      const double warm_value = grown.value(grown.assemble(warm));
      const double collapsed_value = grown.value(grown.assemble(collapsed));
      const auto& start = collapsed_value >= warm_value ? collapsed : warm;

      wr = optimize_weights(fims, spec, cfg, start);
      out.history.insert(out.history.end(), wr.history.begin(), wr.history.end());
      out.iterations += wr.iterations;
    }
  }

  // Collapse each cluster of neighbouring support points onto a single
  // point, then alternate weight optimization on the support alone with
  // re-polishing of the points. Kept only if nothing is lost.
  if (cfg.polish && xs.size() > 1) {
    std::vector<std::pair<double, double>> pts;  // (x, weight)
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (wr.weights[i] <= 0.0) continue;
      if (!pts.empty() && xs[i] - pts.back().first <= 2.5 * spacing) {
        auto& [x, w] = pts.back();
        if (wr.weights[i] > w) x = xs[i];
        w += wr.weights[i];
      } else {
        pts.emplace_back(xs[i], wr.weights[i]);
      }
    }
    std::vector<double> px(pts.size());
    std::vector<double> pw(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) std::tie(px[i], pw[i]) = pts[i];
    OptimizerConfig tight = cfg;
    tight.delta = std::min(cfg.delta, 1e-7);
    tight.max_iterations = std::min<std::size_t>(cfg.max_iterations, 2000);
    bool ok = px.size() < xs.size();
    for (std::size_t round = 0; ok && round < 50; ++round) {
      std::vector<SymMatrix> pf = candidate_fims(model, px, gamma);
      const WeightResult sr = optimize_weights(pf, spec, tight, pw);
      pw = sr.weights;
      const Objective small(pf, spec);
      SymMatrix m = small.assemble(pw);
      double value = small.value(m);
      const double start_value = value;
      // Coordinate ascent on the criterion over each location in turn.
      for (std::size_t i = 0; i < px.size(); ++i) {
        if (pw[i] <= 0.0) continue;
        SymMatrix rest = m;
        rest.add_scaled(pf[i], -pw[i]);
        auto crit = [&](double x) {
          SymMatrix trial = rest;
          trial.add_scaled(model.fim(x, gamma.values()), pw[i]);
          return small.value(trial);
        };
        const double x = golden_max(crit, std::max(space.lo, px[i] - spacing), std::min(space.hi, px[i] + spacing));
        const double v = crit(x);
        if (v > value) {
          px[i] = x;
          pf[i] = model.fim(x, gamma.values());
          m = rest;
          m.add_scaled(pf[i], pw[i]);
          value = v;
        }
      }
      if (value - start_value <= 1e-13 * std::max(1.0, std::abs(value))) break;
    }
    if (ok) {
      const std::vector<SymMatrix> pf = candidate_fims(model, px, gamma);
      pw = optimize_weights(pf, spec, tight, pw).weights;
      // Fold the consolidated support into the candidate set.
      std::vector<double> all_x = xs;
      std::vector<SymMatrix> all_f = fims;
      for (std::size_t i = 0; i < px.size(); ++i) {
        const bool known = std::any_of(xs.begin(), xs.end(), [&](double y) { return std::abs(y - px[i]) <= kMergeTolerance; });
        if (!known) {
          all_x.push_back(px[i]);
          all_f.push_back(pf[i]);
        }
      }
      std::vector<std::size_t> order(all_x.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return all_x[a] < all_x[b]; });
      std::vector<double> sx(order.size());
      std::vector<SymMatrix> sf(order.size());
      std::vector<double> sw(order.size(), 0.0);
      for (std::size_t r = 0; r < order.size(); ++r) {
        sx[r] = all_x[order[r]];
        sf[r] = std::move(all_f[order[r]]);
      }
      for (std::size_t i = 0; i < px.size(); ++i) {
        const auto it = std::find_if(sx.begin(), sx.end(), [&](double y) { return std::abs(y - px[i]) <= kMergeTolerance; });
        sw[static_cast<std::size_t>(it - sx.begin())] += pw[i];
      }
      const Objective grown(sf, spec);
      const SymMatrix m = grown.assemble(sw);
      const double v = grown.value(m);
      if (std::isfinite(v) && v >= wr.criterion_value - 1e-10) {
        const std::vector<double> d = grown.sensitivities(m);
        if (*std::max_element(d.begin(), d.end()) <= out.bound * (1.0 + cfg.delta)) {
          xs = std::move(sx);
          fims = std::move(sf);
          wr.weights = std::move(sw);
          wr.sensitivities = d;
          wr.criterion_value = v;
          wr.converged = true;
          out.history.push_back(v);
        }
      }
    }
  }

  // Remove sub-floor weights left on near-support candidates when this
  // costs nothing measurable.
  {
    const Objective obj(fims, spec);
    std::vector<double> w = wr.weights;
    for (double& x : w)
      if (x < cfg.weight_floor) x = 0.0;
    renormalize(w);
    const double v = obj.value(obj.assemble(w));
    if (v >= wr.criterion_value - 1e-9 * std::max(1.0, std::abs(wr.criterion_value))) {
      wr.weights = w;
      wr.criterion_value = v;
      wr.sensitivities = obj.sensitivities(obj.assemble(w));
    }
  }

  out.design = support_design(xs, wr.weights);
  out.criterion_value = wr.criterion_value;
  out.converged = wr.converged;
  out.max_sensitivity = *std::max_element(wr.sensitivities.begin(), wr.sensitivities.end());
  out.sensitivity_samples.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out.sensitivity_samples.push_back({xs[i], wr.sensitivities[i]});
  out.converged = out.converged && out.max_sensitivity <= out.bound * (1.0 + cfg.delta);
  out.certificate =
      check_certificate(model, gamma, spec, out.design, grid.size(), cfg.refine_factor, cfg.delta);
  return out;
}

Certificate check_certificate(const OutcomeModel& model, const ParamVector& gamma,
                              const CriterionSpec& spec, const Design& design,
                              std::size_t grid_points, std::size_t refine_factor, double delta) {
  const SymMatrix q = sensitivity_kernel(info_matrix(model, design, gamma), spec);
  const double b = spec.bound(model.dimension());
  const std::size_t n = grid_points <= 1 ? 1 : (grid_points - 1) * std::max<std::size_t>(refine_factor, 1) + 1;
  std::vector<double> xs = uniform_grid(model.design_space(), n);
  xs.insert(xs.end(), design.points().begin(), design.points().end());
  const std::vector<SymMatrix> fims = candidate_fims(model, xs, gamma);

  Certificate c;
  c.grid_size = xs.size();
  c.max_sensitivity = kNegInf;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = trace_product(q, fims[i]);
    if (d > c.max_sensitivity) {
      c.max_sensitivity = d;
      c.argmax = xs[i];
    }
  }
  for (std::size_t i = 0; i < design.size(); ++i)
    c.weighted_sum += design.weights()[i] * trace_product(q, fims[n + i]);
  c.passed = c.max_sensitivity <= b * (1.0 + 2.0 * delta) && std::abs(c.weighted_sum - b) <= 1e-8 * std::max(1.0, b);
  return c;
}

std::string design_csv(const Design& design) {
  std::ostringstream os;
  os << std::setprecision(10) << "x,weight\n";
  for (std::size_t i = 0; i < design.size(); ++i)
    os << design.points()[i] << ',' << design.weights()[i] << '\n';
  return os.str();
}

std::string sensitivity_csv(const DesignResult& result) {
  std::ostringstream os;
  os << std::setprecision(10) << "x,sensitivity,bound\n";
  for (const auto& s : result.sensitivity_samples) os << s.x << ',' << s.value << ',' << result.bound << '\n';
  return os.str();
}

}  // namespace copula_oed
