#include "cli_app.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "config.hpp"
#include "report.hpp"

namespace alphamerton::cli {

const char* version() { return ALPHAMERTON_VERSION; }

namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  unsigned threads = 1;
};

struct ConvertOptions {
  double from = 0.0;
  double to = 0.0;
  std::string model = "config";
  std::vector<double> grid;
  double mu = 0.0, sigma = 0.0;
  double kappa = 0.0, theta = 0.0, xi = 0.0;
};

/// Config with command-line overrides applied.
ExperimentConfig load(const GlobalOptions& g) {
  if (g.config_path.empty()) throw ConfigError("--config is required for this command");
  ExperimentConfig cfg = load_config(g.config_path);
  if (!g.out_dir.empty()) cfg.outputs.dir = g.out_dir;
  if (cfg.sim) {
    if (g.seed) cfg.sim->seed = *g.seed;
    cfg.sim->threads = g.threads;
  }
  return cfg;
}

const SimConfig& require_sim(const ExperimentConfig& cfg) {
  if (!cfg.sim) throw ConfigError("config: this command needs a \"sim\" block");
  return *cfg.sim;
}

Json header(const std::string& command, const ExperimentConfig& cfg) {
  Json doc;
  doc["version"] = version();
  doc["command"] = command;
  doc["config"] = cfg.resolved();
  return doc;
}

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

fs::path output_dir(const ExperimentConfig& cfg) {
  fs::path dir(cfg.outputs.dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text, std::ostream& out) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw SimulationError("cannot write " + path.string());
  f << text;
  out << "wrote " << path.string() << "\n";
}

std::string market_name(const Market& m) {
  if (std::holds_alternative<ConstantVolMarket>(m)) {
    return "constant_vol (" + std::to_string(std::get<ConstantVolMarket>(m).size()) + " assets)";
  }
  return std::holds_alternative<HestonMarket>(m) ? "heston" : "factor";
}

// --- convert ---------------------------------------------------------------

CoefficientField heston_variance_field(double kappa, double theta, double xi) {
  return CoefficientField(
      1, 1, [=](const Vector& v) { return Vector::Constant(1, kappa * (theta - v[0])); },
      [=](const Vector& v) { return Matrix::Constant(1, 1, xi * std::sqrt(v[0])); },
      [=](const Vector& v) {
        return DiffusionJacobian{Matrix::Constant(1, 1, 0.5 * xi / std::sqrt(v[0]))};
      });
}

int cmd_convert(const GlobalOptions& g, const ConvertOptions& o, std::ostream& out) {
  const Interpretation from(o.from), to(o.to);
  std::optional<CoefficientField> field;
  bool price_like = false;
  bool factor_like = false;
  std::vector<double> grid = o.grid;
  std::string label = o.model;
  if (o.model == "gbm") {
    if (!(o.sigma >= 0.0)) throw ConfigError("--sigma must be >= 0");
    field = price_field(ConstantVolMarket{Vector::Constant(1, o.mu), Matrix::Constant(1, 1, o.sigma), 0.0});
    price_like = true;
    if (grid.empty()) grid = {0.5, 1.0, 2.0};
  } else if (o.model == "heston-variance") {
    if (!(o.kappa > 0.0) || !(o.theta > 0.0) || !(o.xi >= 0.0)) {
      throw ConfigError("heston-variance needs --kappa > 0, --theta > 0, --xi >= 0");
    }
    field = heston_variance_field(o.kappa, o.theta, o.xi);
    if (grid.empty()) grid = {0.01, 0.04, 0.1};
  } else if (o.model == "config") {
    const ExperimentConfig cfg = load(g);
    label = market_name(cfg.market);
    if (const auto* m = std::get_if<ConstantVolMarket>(&cfg.market)) {
      field = price_field(*m);
      price_like = true;
      if (grid.empty()) grid = {0.5, 1.0, 2.0};
    } else if (const auto* h = std::get_if<HestonMarket>(&cfg.market)) {
      field = heston_variance_field(h->kappa, h->long_run_mean, h->xi);
      label = "heston variance";
      if (grid.empty()) grid = {h->v0};
    } else {
      field = return_factor_field(std::get<FactorMarket>(cfg.market));
      factor_like = true;
      if (grid.empty()) grid = {cfg.x0};
    }
  } else {
    throw ConfigError("--model must be config, gbm or heston-variance");
  }
  const CoefficientField converted = convert(*field, from, to);

  std::ostringstream csv;
  csv << "x,component,drift_from,correction,drift_to,shift";
  if (price_like) csv << ",per_unit_shift";
  csv << "\n";
  for (double x : grid) {
    Vector state = Vector::Constant(static_cast<Eigen::Index>(field->state_dim()), x);
    if (factor_like) state[0] = 0.0;
    const Vector b0 = field->drift(state);
    const Vector c = correction_vector(*field, state);
    const Vector b1 = converted.drift(state);
    for (Eigen::Index i = 0; i < b0.size(); ++i) {
      const double shift = b1[i] - b0[i];
      csv << format_shortest(x) << "," << i + 1 << "," << format_shortest(b0[i]) << ","
          << format_shortest(c[i]) << "," << format_shortest(b1[i]) << "," << format_shortest(shift);
      if (price_like) csv << "," << format_shortest(shift / x);
      csv << "\n";
    }
  }
  out << "# convert " << label << ": alpha " << format_shortest(o.from) << " -> "
      << format_shortest(o.to) << "\n"
      << csv.str();
  if (!g.out_dir.empty()) {
    fs::create_directories(g.out_dir);
    write_file(fs::path(g.out_dir) / "convert.csv", csv.str(), out);
  }
  return kOk;
}

// --- solve -----------------------------------------------------------------

Json solve_row(const ExperimentConfig& cfg, double a) {
  const Interpretation alpha(a);
  Json row;
  row["alpha"] = a;
  if (const auto* m = std::get_if<ConstantVolMarket>(&cfg.market)) {
    const MertonSolution sol = solve_n_asset(*m, cfg.rho, alpha);
    const Vector mu_ito = ito_drift_diagonal_multiplicative(m->mu, m->gamma, alpha);
    row["weights"] = to_json(sol.policy.weights());
    row["consumption_fraction"] = sol.policy.consumption_fraction();
    row["beta0"] = sol.value.beta0;
    row["value_at_wealth0"] = sol.value(cfg.wealth0, 0.0);
    row["hjb_residual"] = hjb_residual(mu_ito, m->covariance(), m->r, cfg.rho, sol.policy,
                                       sol.value, cfg.wealth0, 0.0);
  } else if (const auto* h = std::get_if<HestonMarket>(&cfg.market)) {
    const HestonItoForm ito = heston_ito_form(*h, alpha);
    const Policy policy = solve_heston(*h, cfg.rho, alpha);
    const FellerResult feller = feller_check(ito.cir);
    row["mu_eff"] = ito.mu_eff;
    row["theta_alpha"] = ito.cir.theta_alpha;
    row["pi_times_v"] = ito.mu_eff - h->r;
    row["weight_at_v0"] = policy.weight_at(h->v0);
    row["consumption_fraction"] = policy.consumption_fraction();
    row["feller"] = Json{{"pass", feller.satisfied}, {"margin", feller.margin}};
  } else {
    const auto& f = std::get<FactorMarket>(cfg.market);
    const Policy policy = solve_factor(f, cfg.rho, alpha);
    row["mu_eff_at_x0"] = effective_drift_factor(f, alpha, cfg.x0);
    row["factor_drift_at_x0"] = factor_ito_drift(f, alpha, cfg.x0);
    row["weight_at_x0"] = policy.weight_at(cfg.x0);
    row["consumption_fraction"] = policy.consumption_fraction();
  }
  return row;
}

int cmd_solve(const GlobalOptions& g, std::ostream& out) {
  const ExperimentConfig cfg = load(g);
  Json doc = header("solve", cfg);
  Json rows = Json::array();
  for (double a : cfg.alphas) rows.push_back(solve_row(cfg, a));
  doc["results"] = rows;
  const std::string text = dump_json(doc);
  out << text;
  if (!g.out_dir.empty()) write_file(output_dir(cfg) / "solve.json", text, out);
  return kOk;
}

// --- verify ----------------------------------------------------------------

PathEnsemble simulate_for_export(const ExperimentConfig& cfg, double a) {
  const Interpretation alpha(a);
  const SimConfig& sim = *cfg.sim;
  if (const auto* m = std::get_if<ConstantVolMarket>(&cfg.market)) {
    return simulate_wealth(*m, alpha, solve_n_asset(*m, cfg.rho, alpha).policy, cfg.wealth0, sim);
  }
  if (const auto* h = std::get_if<HestonMarket>(&cfg.market)) {
    return simulate_wealth(*h, alpha, solve_heston(*h, cfg.rho, alpha), cfg.wealth0, sim);
  }
  const auto& f = std::get<FactorMarket>(cfg.market);
  return simulate_wealth(f, alpha, solve_factor(f, cfg.rho, alpha), cfg.wealth0, cfg.x0, sim);
}

int cmd_verify(const GlobalOptions& g, std::ostream& out) {
  const ExperimentConfig cfg = load(g);
  const SimConfig& sim = require_sim(cfg);
  // Surface solver and validation problems before any simulation runs.
  for (double a : cfg.alphas) solve_row(cfg, a);

  CompareOptions options;
  options.a0 = cfg.wealth0;
  options.x0 = cfg.x0;
  const ComparisonTable table = compare_interpretations(cfg.market, cfg.alphas, cfg.rho, sim, options);

  const fs::path dir = output_dir(cfg);
  std::ostringstream csv, text;
  write_verify_csv(csv, table);
  write_verify_text(text, table, market_name(cfg.market));

  Json doc = header("verify", cfg);
  doc["all_pass"] = table.all_pass();
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    Json r;
    r["alpha"] = row.alpha;
    r["pass"] = row.pass;
    r["mc_pass"] = row.mc_pass;
    r["hjb_pass"] = row.hjb_pass;
    r["J_mc"] = row.mc.point_estimate;
    r["J_se"] = row.mc.standard_error;
    r["tail_correction"] = row.mc.tail_correction;
    r["discount_mass"] = row.mc.discount_mass;
    r["failed_paths"] = row.failed_paths;
    if (row.feller) r["feller"] = Json{{"pass", row.feller->satisfied}, {"margin", row.feller->margin}};
    r["warnings"] = row.warnings;
    if (!row.error.empty()) r["error"] = row.error;
    rows.push_back(r);
  }
  doc["rows"] = rows;

  out << text.str();
  write_file(dir / "verify.csv", csv.str(), out);
  write_file(dir / "verify.txt", text.str(), out);
  write_file(dir / "verify.json", dump_json(doc), out);

  if (cfg.outputs.export_ensemble) {
    for (double a : cfg.alphas) {
      const PathEnsemble ens = simulate_for_export(cfg, a);
      const std::string stem = "ensemble_alpha_" + format_shortest(a);
      std::ostringstream e;
      write_ensemble_csv(e, ens);
      write_file(dir / (stem + ".csv"), e.str(), out);
      std::ostringstream b;
      write_summary_binary(b, summarize(ens));
      write_file(dir / (stem + ".bin"), b.str(), out);
    }
  }
  return table.all_pass() ? kOk : kRuntime;
}

// --- plotdata --------------------------------------------------------------

std::vector<std::string> default_series(const ExperimentConfig& cfg) {
  if (std::holds_alternative<HestonMarket>(cfg.market)) return {"alpha_weight", "heston_policy"};
  if (std::holds_alternative<ConstantVolMarket>(cfg.market) && cfg.sim) {
    return {"alpha_weight", "perturbation"};
  }
  return {"alpha_weight"};
}

std::string alpha_weight_series(const ExperimentConfig& cfg) {
  std::ostringstream csv;
  Eigen::Index n = 1;
  if (const auto* m = std::get_if<ConstantVolMarket>(&cfg.market)) n = m->mu.size();
  csv << "alpha";
  for (Eigen::Index i = 0; i < n; ++i) csv << ",weight_" << i + 1;
  csv << "\n";
  for (int k = 0; k <= 20; ++k) {
    const double a = k / 20.0;
    const Interpretation alpha(a);
    Vector w;
    if (const auto* m = std::get_if<ConstantVolMarket>(&cfg.market)) {
      w = solve_n_asset(*m, cfg.rho, alpha).policy.weights();
    } else if (const auto* h = std::get_if<HestonMarket>(&cfg.market)) {
      w = Vector::Constant(1, solve_heston(*h, cfg.rho, alpha).weight_at(h->v0));
    } else {
      const auto& f = std::get<FactorMarket>(cfg.market);
      w = Vector::Constant(1, solve_factor(f, cfg.rho, alpha).weight_at(cfg.x0));
    }
    csv << format_shortest(a);
    for (Eigen::Index i = 0; i < w.size(); ++i) csv << "," << format_shortest(w[i]);
    csv << "\n";
  }
  return csv.str();
}

std::string heston_policy_series(const ExperimentConfig& cfg) {
  const auto* h = std::get_if<HestonMarket>(&cfg.market);
  if (!h) throw ConfigError("series heston_policy needs a heston market");
  std::ostringstream csv;
  csv << "alpha,v,pi,pi_times_v\n";
  const int points = 61;
  for (double a : cfg.alphas) {
    const Policy policy = solve_heston(*h, cfg.rho, Interpretation(a));
    for (int k = 0; k < points; ++k) {
      // Log-spaced on [1e-3, 1].
      const double v = std::pow(10.0, -3.0 + 3.0 * k / (points - 1));
      const double pi = policy.weight_at(v);
      csv << format_shortest(a) << "," << format_shortest(v) << "," << format_shortest(pi) << ","
          << format_shortest(pi * v) << "\n";
    }
  }
  return csv.str();
}

std::string perturbation_series(const ExperimentConfig& cfg) {
  const auto* m = std::get_if<ConstantVolMarket>(&cfg.market);
  if (!m) throw ConfigError("series perturbation needs a constant_vol market");
  const SimConfig& sim = require_sim(cfg);
  const Interpretation alpha(cfg.alphas.front());
  const MertonSolution sol = solve_n_asset(*m, cfg.rho, alpha);
  const PerturbationCurve curve = perturbation_study(*m, alpha, sol.policy,
                                                     cfg.outputs.perturbation_deltas, sim, cfg.rho,
                                                     cfg.wealth0);
  std::ostringstream csv;
  csv << "delta,utility,se,difference_se\n";
  for (std::size_t i = 0; i < curve.deltas.size(); ++i) {
    csv << format_shortest(curve.deltas[i]) << "," << format_shortest(curve.estimates[i].point_estimate)
        << "," << format_shortest(curve.estimates[i].standard_error) << ","
        << format_shortest(curve.difference_se[i]) << "\n";
  }
  return csv.str();
}

int cmd_plotdata(const GlobalOptions& g, std::ostream& out) {
  const ExperimentConfig cfg = load(g);
  const std::vector<std::string> series =
      cfg.outputs.series.empty() ? default_series(cfg) : cfg.outputs.series;
  // Build every series before writing anything.
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& s : series) {
    if (s == "alpha_weight") {
      files.emplace_back("alpha_weight.csv", alpha_weight_series(cfg));
    } else if (s == "heston_policy") {
      files.emplace_back("heston_policy.csv", heston_policy_series(cfg));
    } else {
      files.emplace_back("perturbation.csv", perturbation_series(cfg));
    }
  }
  const fs::path dir = output_dir(cfg);
  for (const auto& [name, text] : files) write_file(dir / name, text, out);
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Merton consumption-investment under alpha-interpreted noise", "alphamerton"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "Experiment config (JSON)");
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--out", g.out_dir, "Output directory (overrides outputs.dir)");
  app.add_option("--threads", g.threads, "Worker threads for simulation")->check(CLI::PositiveNumber);

  ConvertOptions co;
  auto* convert_cmd = app.add_subcommand("convert", "Drift correction between two interpretations");
  convert_cmd->add_option("--from", co.from, "Source alpha")->required()->check(CLI::Range(0.0, 1.0));
  convert_cmd->add_option("--to", co.to, "Target alpha")->required()->check(CLI::Range(0.0, 1.0));
  convert_cmd->add_option("--model", co.model, "config, gbm or heston-variance")
      ->check(CLI::IsMember({"config", "gbm", "heston-variance"}));
  convert_cmd->add_option("--grid", co.grid, "State values to evaluate at")->delimiter(',');
  convert_cmd->add_option("--mu", co.mu, "GBM drift");
  convert_cmd->add_option("--sigma", co.sigma, "GBM volatility");
  convert_cmd->add_option("--kappa", co.kappa, "Variance mean-reversion speed");
  convert_cmd->add_option("--theta", co.theta, "Variance long-run mean");
  convert_cmd->add_option("--xi", co.xi, "Volatility of variance");
  auto* solve_cmd = app.add_subcommand("solve", "Closed-form optimal policies as JSON");
  auto* verify_cmd = app.add_subcommand("verify", "Closed form vs Monte Carlo and HJB residual");
  auto* plot_cmd = app.add_subcommand("plotdata", "Plot-ready CSV series");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*convert_cmd) return cmd_convert(g, co, out);
    if (*solve_cmd) return cmd_solve(g, out);
    if (*verify_cmd) return cmd_verify(g, out);
    if (*plot_cmd) return cmd_plotdata(g, out);
  } catch (const SolverError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const SimulationError& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  } catch (const Error& e) {
    // Config, parameter, dimension and domain problems.
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}

}  // namespace alphamerton::cli
