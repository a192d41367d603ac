#include "copula_oed/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <system_error>

namespace copula_oed {

namespace {

class Manifest {
 public:
  explicit Manifest(std::string scenario) { add("scenario", std::move(scenario)); }

  void add(const std::string& key, const std::string& value) { os_ << key << " = " << value << '\n'; }
  void add(const std::string& key, double value) {
    std::ostringstream v;
    v << std::setprecision(12) << value;
    add(key, v.str());
  }
  void section(const std::string& title) { os_ << "\n[" << title << "]\n"; }

  void options(const ScenarioOptions& o) {
    section("optimizer");
    add("grid_points", static_cast<double>(o.grid));
    add("delta", o.optimizer.delta);
    add("weight_floor", o.optimizer.weight_floor);
    add("damping", o.optimizer.damping);
    add("max_iterations", static_cast<double>(o.optimizer.max_iterations));
    add("polish", o.optimizer.polish ? "true" : "false");
    add("certificate_refine_factor", static_cast<double>(o.optimizer.refine_factor));
  }

  void parameters(const std::string& prefix, const ParamVector& p) {
    for (std::size_t i = 0; i < p.size(); ++i) add(prefix + p.names()[i], p[i]);
  }

  void result(const std::string& prefix, const DesignResult& r) {
    add(prefix + "criterion", r.spec.describe());
    add(prefix + "criterion_value", r.criterion_value);
    add(prefix + "support_points", static_cast<double>(r.design.size()));
    std::ostringstream pts;
    pts << std::setprecision(6);
    for (std::size_t i = 0; i < r.design.size(); ++i)
      pts << (i ? " " : "") << r.design.points()[i] << ':' << r.design.weights()[i];
    add(prefix + "design", pts.str());
    add(prefix + "iterations", static_cast<double>(r.iterations));
    add(prefix + "converged", r.converged ? "true" : "false");
    add(prefix + "max_sensitivity", r.max_sensitivity);
    add(prefix + "bound", r.bound);
    add(prefix + "certificate_grid", static_cast<double>(r.certificate.grid_size));
    add(prefix + "certificate_max_sensitivity", r.certificate.max_sensitivity);
    add(prefix + "certificate_weighted_sum", r.certificate.weighted_sum);
    add(prefix + "certificate_passed", r.certificate.passed ? "true" : "false");
  }

  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

std::string fixed2(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

void write_result(const std::filesystem::path& dir, const std::string& stem, const DesignResult& r) {
  write_file_atomic(dir / (stem + "_design.csv"), design_csv(r.design));
  write_file_atomic(dir / (stem + "_sensitivity.csv"), sensitivity_csv(r));
}

std::string a2_label(double a2) {
  std::ostringstream os;
  os << a2;
  return os.str();
}

double loss_percent(double efficiency) { return 100.0 * (1.0 - efficiency); }

}  // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error("failed writing '" + tmp.string() + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Polynomial regression example

FedorovReport run_fedorov(const ScenarioOptions& options, double alpha1) {
  const FedorovModel product(BaseCopula::product());
  const FedorovModel clayton(BaseCopula(Family::Clayton, alpha1));
  const CachedModel product_cache(product);
  const CachedModel clayton_cache(clayton);
  const auto grid = uniform_grid(product.design_space(), options.grid);
  const ParamVector gp = product.nominal();
  const ParamVector gc = clayton.nominal();
  const auto ds = CriterionSpec::ds(6);

  FedorovReport rep;
  rep.product_d = optimize_design(product_cache, gp, CriterionSpec::d(), grid, options.optimizer);
  rep.clayton_ds = optimize_design(clayton_cache, gc, ds, grid, options.optimizer);
  rep.efficiency = efficiency(clayton_cache, rep.product_d.design, rep.clayton_ds.design, gc, ds);
  rep.loss_percent = loss_percent(rep.efficiency);

  if (!options.output_dir.empty()) {
    const auto& dir = options.output_dir;
    write_result(dir, "fedorov_product_d", rep.product_d);
    write_result(dir, "fedorov_clayton_ds", rep.clayton_ds);
    std::ostringstream summary;
    summary << std::setprecision(10) << "quantity,value\n"
            << "ds_efficiency," << rep.efficiency << '\n'
            << "ds_loss_percent," << rep.loss_percent << '\n';
    write_file_atomic(dir / "fedorov_summary.csv", summary.str());

    Manifest m("fedorov");
    m.options(options);
    m.section("model");
    m.add("margins", "unit-variance Gaussian");
    m.add("copula", describe(BaseCopula(Family::Clayton, alpha1)));
    m.add("kendall_tau", kendall_tau(BaseCopula(Family::Clayton, alpha1)));
    m.add("quadrature", "Gauss-Hermite 64x64 in normal scores");
    m.parameters("gamma.", gc);
    m.section("product_d");
    m.result("", rep.product_d);
    m.section("clayton_ds");
    m.result("", rep.clayton_ds);
    m.section("comparison");
    m.add("ds_efficiency", rep.efficiency);
    m.add("ds_loss_percent", rep.loss_percent);
    write_file_atomic(dir / "fedorov_manifest.txt", m.str());
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Binary mixture tables

const std::array<TauInterval, 3>& tau_intervals() {
  static const std::array<TauInterval, 3> v{{{"I1", 0.3}, {"I2", 0.9}, {"I3", 0.95}}};
  return v;
}

const std::array<std::pair<Family, Family>, 4>& binary_pairs() {
  static const std::array<std::pair<Family, Family>, 4> v{{{Family::Clayton, Family::Gumbel},
                                                           {Family::Frank, Family::Gumbel},
                                                           {Family::Joe, Family::Clayton},
                                                           {Family::Joe, Family::Frank}}};
  return v;
}

std::string pair_label(std::pair<Family, Family> pair) {
  return std::string(1, family_name(pair.first).front()) + "-" + family_name(pair.second).front();
}

double cross_loss_percent(const OutcomeModel& truth, const ParamVector& gamma,
                          const CriterionSpec& spec, const Design& assumed,
                          const Design& truth_optimal) {
  if (assumed == truth_optimal) return 0.0;
  try {
    return loss_percent(efficiency(truth, assumed, truth_optimal, gamma, spec));
  } catch (const SingularMatrixError&) {
    return 100.0;
  }
}

BinaryTables run_binary_tables(const ScenarioOptions& options, const BinaryTablesOptions& subset) {
  constexpr double kEpsilon = 0.05;
  constexpr double kXMax = 10.0;
  const std::array<double, 3> alpha2s{0.1, 0.5, 0.9};
  const auto ds = CriterionSpec::ds(1);

  auto wanted_pair = [&](std::pair<Family, Family> p) {
    return subset.pairs.empty() || std::find(subset.pairs.begin(), subset.pairs.end(), p) != subset.pairs.end();
  };
  auto wanted_interval = [&](const std::string& i) {
    return subset.intervals.empty() ||
           std::find(subset.intervals.begin(), subset.intervals.end(), i) != subset.intervals.end();
  };
  auto wanted_alpha2 = [&](double a) {
    return subset.alpha2s.empty() ||
           std::find(subset.alpha2s.begin(), subset.alpha2s.end(), a) != subset.alpha2s.end();
  };

  BinaryTables out;
  Manifest m("binary_tables");
  m.options(options);
  m.section("model");
  m.add("margins", "logistic, beta1 = (-1, 1), beta2 = (-2, 0.5)");
  m.add("design_space", "[0, 10]");
  m.add("tau_link", "logistic tau(x) = 1/(1 + exp(c - alpha1 x)), c = ln((1 - eps)/eps)");
  m.add("epsilon", kEpsilon);
  m.add("tau_matching", "components matched at equal tau, mixture not recalibrated");
  m.add("table2_cell", "true t, assumed a: Ds-optimal design of t scored in model a against the optimum of a");
  m.add("criterion_ds", "s = 1 on alpha2 (parameter order alpha2, beta11, beta12, beta21, beta22, alpha1)");
  for (const auto& iv : tau_intervals()) {
    const TauLink link = TauLink::calibrated(kEpsilon, iv.tau_max, kXMax);
    m.add("alpha1." + iv.label, link.alpha1());
    m.add("tau_max." + iv.label, iv.tau_max);
  }

  const std::filesystem::path design_dir = options.output_dir.empty() ? std::filesystem::path{}
                                                                      : options.output_dir / "binary_designs";
  const auto grid = uniform_grid({0.0, kXMax}, options.grid);

  for (const auto& pair : binary_pairs()) {
    if (!wanted_pair(pair)) continue;
    for (const double a2 : alpha2s) {
      if (!wanted_alpha2(a2)) continue;
      for (const auto& iv : tau_intervals()) {
        if (!wanted_interval(iv.label)) continue;
        const TauLink link = TauLink::calibrated(kEpsilon, iv.tau_max, kXMax);
        const auto model = BinaryLogitModel::mixture(pair.first, pair.second, link, a2);
        const CachedModel cached(model);
        const ParamVector gamma = model.nominal();
        BinaryCell cell;
        cell.pair = pair;
        cell.interval = iv.label;
        cell.alpha2 = a2;
        cell.d_optimal = optimize_design(cached, gamma, CriterionSpec::d(), grid, options.optimizer);
        cell.ds_optimal = optimize_design(cached, gamma, ds, grid, options.optimizer);
        cell.loss_percent = cross_loss_percent(cached, gamma, ds, cell.d_optimal.design, cell.ds_optimal.design);
        const std::string stem = pair_label(pair) + "_" + iv.label + "_a2_" + a2_label(a2);
        m.section(stem);
        m.result("d.", cell.d_optimal);
        m.result("ds.", cell.ds_optimal);
        m.add("ds_loss_percent", cell.loss_percent);
        if (!design_dir.empty()) {
          write_result(design_dir, stem + "_d", cell.d_optimal);
          write_result(design_dir, stem + "_ds", cell.ds_optimal);
        }
        out.table1.push_back(std::move(cell));
      }
    }
  }

  if (subset.table2) {
    // Ds-optimal designs at τ ∈ I₂, α̃₂ = 0.5 for every pair.
    const TauLink link = TauLink::calibrated(kEpsilon, tau_intervals()[1].tau_max, kXMax);
    std::vector<BinaryLogitModel> models;
    std::vector<Design> designs;
    for (const auto& pair : binary_pairs()) {
      models.push_back(BinaryLogitModel::mixture(pair.first, pair.second, link, 0.5));
      const auto hit = std::find_if(out.table1.begin(), out.table1.end(), [&](const BinaryCell& c) {
        return c.pair == pair && c.interval == "I2" && c.alpha2 == 0.5;
      });
      if (hit != out.table1.end()) {
        designs.push_back(hit->ds_optimal.design);
      } else {
        const CachedModel cached(models.back());
        const DesignResult r = optimize_design(cached, models.back().nominal(), ds, grid, options.optimizer);
        m.section(pair_label(pair) + "_I2_a2_0.5_table2");
        m.result("ds.", r);
        designs.push_back(r.design);
      }
    }
    // Cell (true t, assumed a): the Ds-optimal design of the true model scored
    // in the assumed model against that model's own optimum.
    for (std::size_t a = 0; a < models.size(); ++a) {
      const ParamVector gamma = models[a].nominal();
      for (std::size_t t = 0; t < models.size(); ++t)
        out.table2[t][a] = t == a ? 0.0 : cross_loss_percent(models[a], gamma, ds, designs[t], designs[a]);
    }
  }

  if (!options.output_dir.empty()) {
    std::ostringstream t1;
    t1 << "pair,alpha2,I1,I2,I3\n";
    for (const auto& pair : binary_pairs()) {
      for (const double a2 : alpha2s) {
        std::array<std::string, 3> row{"", "", ""};
        bool any = false;
        for (const auto& c : out.table1) {
          if (c.pair != pair || c.alpha2 != a2) continue;
          for (std::size_t i = 0; i < 3; ++i)
            if (tau_intervals()[i].label == c.interval) row[i] = fixed2(c.loss_percent);
          any = true;
        }
        if (any) t1 << pair_label(pair) << ',' << a2_label(a2) << ',' << row[0] << ',' << row[1] << ',' << row[2] << '\n';
      }
    }
    write_file_atomic(options.output_dir / "binary_table1.csv", t1.str());
    if (subset.table2) {
      std::ostringstream t2;
      t2 << "true\\assumed";
      for (const auto& p : binary_pairs()) t2 << ',' << pair_label(p);
      t2 << '\n';
      for (std::size_t t = 0; t < 4; ++t) {
        t2 << pair_label(binary_pairs()[t]);
        for (std::size_t a = 0; a < 4; ++a) t2 << ',' << fixed2(out.table2[t][a]);
        t2 << '\n';
      }
      write_file_atomic(options.output_dir / "binary_table2.csv", t2.str());
    }
    write_file_atomic(options.output_dir / "binary_manifest.txt", m.str());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Weibull damage example

const std::array<std::array<double, 3>, 3>& weibull_settings() {
  static const std::array<std::array<double, 3>, 3> v{{{1.5, 0.4, 0.0}, {2.0, 0.4, 0.2}, {3.6, 0.6, 0.0}}};
  return v;
}

WeibullReport run_weibull(const ScenarioOptions& options) {
  const auto mo = WeibullModel::marshall_olkin();
  const CachedModel mo_cache(mo);
  const ParamVector g_mo = mo.nominal();
  const auto grid = uniform_grid(mo.design_space(), options.grid);
  const auto ds = CriterionSpec::ds(4);
  const auto d = CriterionSpec::d();

  WeibullReport rep;
  rep.marshall_olkin_d = optimize_design(mo_cache, g_mo, d, grid, options.optimizer);

  std::vector<WeibullModel> models;
  for (const auto& a : weibull_settings()) models.push_back(WeibullModel::khoudraji_clayton(a[0], a[1], a[2]));
  std::vector<std::unique_ptr<CachedModel>> caches;
  for (const auto& model : models) caches.push_back(std::make_unique<CachedModel>(model));

  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& a = weibull_settings()[i];
    const ParamVector g = models[i].nominal();
    WeibullSetting s;
    s.alphas = a;
    s.kendall_tau = kendall_tau(KhoudrajiCopula(BaseCopula(Family::Clayton, a[0]), a[1], a[2]));
    s.d_optimal = optimize_design(*caches[i], g, d, grid, options.optimizer);
    s.ds_optimal = optimize_design(*caches[i], g, ds, grid, options.optimizer);
    s.ds_loss_percent = cross_loss_percent(*caches[i], g, ds, s.d_optimal.design, s.ds_optimal.design);
    s.loss_weibull_assumed =
        cross_loss_percent(*caches[i], g, d, rep.marshall_olkin_d.design, s.d_optimal.design);
    s.loss_ours_assumed = cross_loss_percent(mo_cache, g_mo, d, s.d_optimal.design, rep.marshall_olkin_d.design);
    rep.settings.push_back(std::move(s));
  }

  // Crossed D-losses among the asymmetric Clayton settings: [true][assumed].
  std::array<std::array<double, 3>, 3> ours{};
  for (std::size_t t = 0; t < models.size(); ++t)
    for (std::size_t a = 0; a < models.size(); ++a)
      ours[t][a] = t == a ? 0.0
                          : cross_loss_percent(*caches[t], models[t].nominal(), d,
                                               rep.settings[a].d_optimal.design,
                                               rep.settings[t].d_optimal.design);

  auto minmax = [&](auto member) {
    double lo = 1e300;
    double hi = -1e300;
    for (const auto& s : rep.settings) {
      lo = std::min(lo, s.*member);
      hi = std::max(hi, s.*member);
    }
    return std::pair{lo, hi};
  };
  std::tie(rep.min_weibull_assumed, rep.max_weibull_assumed) = minmax(&WeibullSetting::loss_weibull_assumed);
  std::tie(rep.min_ours_assumed, rep.max_ours_assumed) = minmax(&WeibullSetting::loss_ours_assumed);
  double ours_lo = 1e300;
  double ours_hi = -1e300;
  for (const auto& row : ours)
    for (double v : row) {
      ours_lo = std::min(ours_lo, v);
      ours_hi = std::max(ours_hi, v);
    }

  if (!options.output_dir.empty()) {
    const auto& dir = options.output_dir;
    std::ostringstream t4;
    t4 << "assumed,weibull_true_min,weibull_true_max,ours_true_min,ours_true_max\n"
       << "Weibull,0.00,0.00," << fixed2(rep.min_weibull_assumed) << ',' << fixed2(rep.max_weibull_assumed) << '\n'
       << "Our Models," << fixed2(rep.min_ours_assumed) << ',' << fixed2(rep.max_ours_assumed) << ','
       << fixed2(ours_lo) << ',' << fixed2(ours_hi) << '\n';
    write_file_atomic(dir / "weibull_table4.csv", t4.str());

    std::ostringstream full;
    full << "assumed\\true,MO";
    auto label = [](const std::array<double, 3>& a) {
      std::ostringstream os;
      os << "KC(" << a[0] << ";" << a[1] << ";" << a[2] << ")";
      return os.str();
    };
    for (const auto& s : rep.settings) full << ',' << label(s.alphas);
    full << '\n' << "MO,0.00";
    for (const auto& s : rep.settings) full << ',' << fixed2(s.loss_weibull_assumed);
    full << '\n';
    for (std::size_t a = 0; a < rep.settings.size(); ++a) {
      full << label(rep.settings[a].alphas) << ',' << fixed2(rep.settings[a].loss_ours_assumed);
      for (std::size_t t = 0; t < rep.settings.size(); ++t) full << ',' << fixed2(ours[t][a]);
      full << '\n';
    }
    write_file_atomic(dir / "weibull_cross_full.csv", full.str());

    std::ostringstream dsl;
    dsl << "alpha1,alpha2,alpha3,kendall_tau,d_vs_ds_loss_percent\n";
    for (const auto& s : rep.settings)
      dsl << s.alphas[0] << ',' << s.alphas[1] << ',' << s.alphas[2] << ',' << std::setprecision(6)
          << s.kendall_tau << ',' << fixed2(s.ds_loss_percent) << '\n';
    write_file_atomic(dir / "weibull_ds_losses.csv", dsl.str());

    write_result(dir, "weibull_mo_d", rep.marshall_olkin_d);
    Manifest m("weibull");
    m.options(options);
    m.section("model");
    m.add("cutoffs", "zeta1 = 0.8, zeta2 = 0.7");
    m.add("mo_cells", "p00 by Gauss-Legendre over the two triangles in (y^kappa, z^kappa) plus the diagonal mass");
    m.add("kc_cells", "p00 = Khoudraji-Clayton(F_Y(zeta1), F_Z(zeta2))");
    m.add("table4_weibull_design", "D-optimal design of the Marshall-Olkin model computed here");
    m.parameters("gamma_mo.", g_mo);
    m.section("marshall_olkin_d");
    m.result("", rep.marshall_olkin_d);
    for (std::size_t i = 0; i < rep.settings.size(); ++i) {
      const auto& s = rep.settings[i];
      const std::string stem = "weibull_kc_" + std::to_string(i + 1);
      write_result(dir, stem + "_d", s.d_optimal);
      write_result(dir, stem + "_ds", s.ds_optimal);
      m.section(stem);
      m.add("alphas", label(s.alphas));
      m.add("kendall_tau", s.kendall_tau);
      m.result("d.", s.d_optimal);
      m.result("ds.", s.ds_optimal);
      m.add("d_vs_ds_loss_percent", s.ds_loss_percent);
      m.add("loss_weibull_assumed_percent", s.loss_weibull_assumed);
      m.add("loss_ours_assumed_percent", s.loss_ours_assumed);
    }
    write_file_atomic(dir / "weibull_manifest.txt", m.str());
  }
  return rep;
}

}  // namespace copula_oed
