#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "copula_oed/config.hpp"
#include "copula_oed/errors.hpp"
#include "copula_oed/experiments.hpp"

namespace fs = std::filesystem;
using namespace copula_oed;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kNotCertified = 2;

struct Options {
  std::string config;
  std::string name;
  std::string out;
  std::optional<std::size_t> grid;
};

bool certified(const DesignResult& r) { return r.converged && r.certificate.passed; }

std::string manifest_for(const RunConfig& cfg, const OutcomeModel& model, const ParamVector& gamma,
                         const DesignResult& r) {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "# copula-oed run\n" << render(cfg) << "\n[result]\n";
  os << "model_name = " << model.name() << '\n';
  for (std::size_t i = 0; i < gamma.size(); ++i) os << "gamma." << gamma.names()[i] << " = " << gamma[i] << '\n';
  os << "criterion = " << r.spec.describe() << '\n'
     << "criterion_value = " << r.criterion_value << '\n'
     << "bound = " << r.bound << '\n'
     << "max_sensitivity = " << r.max_sensitivity << '\n'
     << "iterations = " << r.iterations << '\n'
     << "converged = " << (r.converged ? "true" : "false") << '\n'
     << "certificate_grid = " << r.certificate.grid_size << '\n'
     << "certificate_max_sensitivity = " << r.certificate.max_sensitivity << '\n'
     << "certificate_weighted_sum = " << r.certificate.weighted_sum << '\n'
     << "certificate_passed = " << (r.certificate.passed ? "true" : "false") << '\n';
  return os.str();
}

RunConfig load(const Options& o, Command expected) {
  if (o.config.empty()) throw ConfigError("--config is required for this command", 0, 0, "config");
  RunConfig cfg = load_config(o.config);
  if (cfg.command != expected)
    throw ConfigError("config 'command' does not match the requested subcommand", 0, 0, "command");
  if (o.grid) cfg.optimizer.grid = *o.grid;
  if (!o.out.empty()) cfg.output_dir = o.out;
  return cfg;
}

int run_optimize(const Options& o) {
  const RunConfig cfg = load(o, Command::Optimize);
  const auto model = build_model(cfg);
  const CachedModel cached(*model);
  const ParamVector gamma = build_parameters(cfg, *model);
  const CriterionSpec spec = build_criterion(cfg.criterion);
  const auto grid = uniform_grid(model->design_space(), cfg.optimizer.grid);
  const DesignResult r = optimize_design(cached, gamma, spec, grid, build_optimizer(cfg.optimizer));

  const fs::path dir = cfg.output_dir;
  write_file_atomic(dir / "design.csv", design_csv(r.design));
  write_file_atomic(dir / "sensitivity.csv", sensitivity_csv(r));
  write_file_atomic(dir / "manifest.txt", manifest_for(cfg, *model, gamma, r));

  std::cout << design_csv(r.design);
  std::cout << "converged=" << (r.converged ? "true" : "false")
            << " certificate=" << (r.certificate.passed ? "pass" : "fail") << '\n';
  return certified(r) ? kOk : kNotCertified;
}

int run_efficiency(const Options& o) {
  const RunConfig cfg = load(o, Command::Efficiency);
  const auto model = build_model(cfg);
  const CachedModel cached(*model);
  const ParamVector gamma = build_parameters(cfg, *model);
  const CriterionSpec spec = build_criterion(cfg.criterion);
  std::vector<double> points;
  std::vector<double> weights;
  for (const auto& [x, w] : cfg.design) {
    points.push_back(x);
    weights.push_back(w);
  }
  const Design candidate(points, weights);
  const auto grid = uniform_grid(model->design_space(), cfg.optimizer.grid);
  const DesignResult r = optimize_design(cached, gamma, spec, grid, build_optimizer(cfg.optimizer));
  const double eff = efficiency(cached, candidate, r.design, gamma, spec);

  const fs::path dir = cfg.output_dir;
  std::ostringstream summary;
  summary << std::setprecision(12) << "quantity,value\nefficiency," << eff << "\nloss_percent,"
          << 100.0 * (1.0 - eff) << '\n';
  write_file_atomic(dir / "efficiency.csv", summary.str());
  write_file_atomic(dir / "design.csv", design_csv(r.design));
  write_file_atomic(dir / "sensitivity.csv", sensitivity_csv(r));
  write_file_atomic(dir / "manifest.txt",
                    manifest_for(cfg, *model, gamma, r) + "efficiency = " + std::to_string(eff) + '\n');

  std::cout << summary.str();
  return certified(r) ? kOk : kNotCertified;
}

int run_scenario(const Options& o) {
  std::string name = o.name;
  ScenarioOptions opts;
  opts.output_dir = "out";
  if (!o.config.empty()) {
    const RunConfig cfg = load(o, Command::Scenario);
    if (name.empty()) name = cfg.scenario;
    opts.output_dir = cfg.output_dir;
    opts.grid = cfg.optimizer.grid;
    opts.optimizer = build_optimizer(cfg.optimizer);
  }
  if (!o.out.empty()) opts.output_dir = o.out;
  if (o.grid) opts.grid = *o.grid;
  if (name.empty()) throw ConfigError("--name or a scenario config is required", 0, 0, "scenario");

  bool ok = true;
  auto note = [&](const DesignResult& r) { ok = ok && certified(r); };
  std::cout << std::fixed << std::setprecision(2);
  if (name == "fedorov") {
    const auto rep = run_fedorov(opts);
    note(rep.product_d);
    note(rep.clayton_ds);
    std::cout << "Ds-optimal (Clayton):\n" << design_csv(rep.clayton_ds.design);
    std::cout << "Ds-efficiency loss of the product D-optimal design: " << rep.loss_percent << "%\n";
  } else if (name == "binary_tables") {
    const auto rep = run_binary_tables(opts);
    for (const auto& c : rep.table1) {
      note(c.d_optimal);
      note(c.ds_optimal);
      std::cout << pair_label(c.pair) << " alpha2=" << c.alpha2 << ' ' << c.interval << ": " << c.loss_percent
                << "%\n";
    }
  } else if (name == "weibull") {
    const auto rep = run_weibull(opts);
    note(rep.marshall_olkin_d);
    for (const auto& s : rep.settings) {
      note(s.d_optimal);
      note(s.ds_optimal);
    }
    std::cout << "Weibull assumed: " << rep.min_weibull_assumed << " .. " << rep.max_weibull_assumed << "%\n"
              << "Our models assumed: " << rep.min_ours_assumed << " .. " << rep.max_ours_assumed << "%\n";
  } else {
    throw ConfigError("unknown scenario '" + name + "' (expected fedorov, binary_tables or weibull)", 0, 0,
                      "scenario");
  }
  std::cout << "outputs written to " << opts.output_dir.string() << '\n';
  return ok ? kOk : kNotCertified;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal designs for copula-based bivariate regression models", "copula-oed"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Run configuration file");
    sub->add_option("--out", o.out, "Output directory (overrides the config)");
    sub->add_option("--grid", o.grid, "Candidate grid size")->check(CLI::Range(std::size_t{3}, std::size_t{1000000}));
  };
  auto* optimize = app.add_subcommand("optimize", "Compute an optimal design");
  auto* eff = app.add_subcommand("efficiency", "Efficiency of a given design");
  auto* scenario = app.add_subcommand("scenario", "Run a scripted study");
  add_common(optimize);
  add_common(eff);
  add_common(scenario);
  scenario->add_option("--name", o.name, "fedorov | binary_tables | weibull");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kFailure;
  }

  try {
    if (optimize->parsed()) return run_optimize(o);
    if (eff->parsed()) return run_efficiency(o);
    return run_scenario(o);
  } catch (const std::exception& e) {
    std::cerr << "copula-oed: " << e.what() << '\n';
    return kFailure;
  }
}
