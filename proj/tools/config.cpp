#include "config.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace alphamerton::cli {

namespace {

double number(const Json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
  const Json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

double number_or(const Json& obj, const std::string& key, double fallback,
                 const std::string& where) {
  return obj.contains(key) ? number(obj, key, where) : fallback;
}

Vector vector_of(const Json& v, const std::string& where) {
  if (v.is_number()) return Vector::Constant(1, v.get<double>());
  if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a number or array");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(where + ": non-numeric entry");
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

Matrix matrix_of(const Json& v, const std::string& where) {
  if (v.is_number()) return Matrix::Constant(1, 1, v.get<double>());
  if (!v.is_array() || v.empty() || !v[0].is_array()) {
    throw ConfigError(where + ": expected an array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(v.size());
  const auto cols = static_cast<Eigen::Index>(v[0].size());
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vector row = vector_of(v[static_cast<std::size_t>(i)], where);
    if (row.size() != cols) throw ConfigError(where + ": ragged rows");
    out.row(i) = row.transpose();
  }
  return out;
}

void check(const std::vector<std::string>& problems) {
  if (problems.empty()) return;
  std::string msg = "invalid market:";
  for (const auto& p : problems) msg += " " + p + ";";
  msg.pop_back();
  throw ConfigError(msg);
}

Market parse_market(const Json& m, double& x0) {
  if (!m.is_object()) throw ConfigError("market: expected an object");
  if (!m.contains("type") || !m.at("type").is_string()) {
    throw ConfigError("market: missing \"type\" (constant_vol, factor or heston)");
  }
  const std::string type = m.at("type").get<std::string>();
  if (type == "constant_vol") {
    ConstantVolMarket out;
    if (!m.contains("mu")) throw ConfigError("market: missing \"mu\"");
    out.mu = vector_of(m.at("mu"), "market.mu");
    if (m.contains("gamma")) {
      out.gamma = matrix_of(m.at("gamma"), "market.gamma");
    } else if (m.contains("sigma")) {
      const Vector s = vector_of(m.at("sigma"), "market.sigma");
      out.gamma = s.asDiagonal();
    } else {
      throw ConfigError("market: need \"gamma\" or \"sigma\"");
    }
    out.r = number(m, "r", "market");
    if (out.gamma.rows() != out.mu.size()) {
      throw ConfigError("market: gamma has " + std::to_string(out.gamma.rows()) +
                        " rows for " + std::to_string(out.mu.size()) + " assets");
    }
    check(validate(out));
    return out;
  }
  if (type == "heston") {
    HestonMarket out;
    out.mu = number(m, "mu", "market");
    out.r = number(m, "r", "market");
    out.kappa = number(m, "kappa", "market");
    out.long_run_mean = number(m, "theta", "market");
    out.xi = number(m, "xi", "market");
    out.rho_corr = number(m, "rho_corr", "market");
    out.v0 = number(m, "v0", "market");
    check(validate(out));
    return out;
  }
  if (type == "factor") {
    FactorMarket out;
    for (const char* key : {"mu", "sigma", "b", "nu"}) {
      if (!m.contains(key)) throw ConfigError(std::string("market: missing \"") + key + "\"");
    }
    out.mu = parse_coefficient(m.at("mu"), "market.mu");
    out.sigma = parse_coefficient(m.at("sigma"), "market.sigma");
    out.b = parse_coefficient(m.at("b"), "market.b");
    out.nu = parse_coefficient(m.at("nu"), "market.nu");
    out.rho_corr = number(m, "rho_corr", "market");
    out.r = number(m, "r", "market");
    if (m.contains("domain")) {
      const Json& d = m.at("domain");
      const double inf = std::numeric_limits<double>::infinity();
      out.domain.lower = d.contains("lower") && !d.at("lower").is_null()
                             ? number(d, "lower", "market.domain") : -inf;
      out.domain.upper = d.contains("upper") && !d.at("upper").is_null()
                             ? number(d, "upper", "market.domain") : inf;
    }
    x0 = number_or(m, "x0", x0, "market");
    if (!out.domain.contains(x0)) throw ConfigError("market.x0 outside the factor domain");
    check(validate(out));
    return out;
  }
  throw ConfigError("market: unknown type \"" + type + "\"");
}

SimConfig parse_sim(const Json& s) {
  if (!s.is_object()) throw ConfigError("sim: expected an object");
  SimConfig c;
  c.horizon = number(s, "horizon", "sim");
  c.dt = number(s, "dt", "sim");
  const double n = number(s, "n_paths", "sim");
  if (!(n >= 1.0) || n != std::floor(n)) throw ConfigError("sim.n_paths: positive integer required");
  c.n_paths = static_cast<std::size_t>(n);
  if (!s.contains("seed")) throw ConfigError("sim: missing \"seed\" (no default seed)");
  if (!s.at("seed").is_number_unsigned()) throw ConfigError("sim.seed: unsigned integer required");
  c.seed = s.at("seed").get<std::uint64_t>();
  const std::string scheme = s.value("scheme", std::string("ito_euler"));
  if (scheme == "ito_euler") {
    c.scheme = Scheme::ito_euler;
  } else if (scheme == "alpha_point") {
    c.scheme = Scheme::alpha_point;
  } else {
    throw ConfigError("sim.scheme: expected ito_euler or alpha_point");
  }
  if (s.contains("save_every")) {
    if (!s.at("save_every").is_number_unsigned() || s.at("save_every").get<std::size_t>() == 0) {
      throw ConfigError("sim.save_every: positive integer required");
    }
    c.save_every = s.at("save_every").get<std::size_t>();
  }
  try {
    c.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("sim: ") + e.what());
  }
  return c;
}

}  // namespace

ScalarFunction parse_coefficient(const Json& spec, const std::string& name) {
  if (spec.is_number()) {
    const double c = spec.get<double>();
    return {[c](double) { return c; }, [](double) { return 0.0; }};
  }
  if (!spec.is_object() || !spec.contains("form")) {
    throw ConfigError(name + ": expected a number or {\"form\": ...}");
  }
  const std::string form = spec.at("form").get<std::string>();
  if (form == "constant") {
    const double c = number(spec, "value", name);
    return {[c](double) { return c; }, [](double) { return 0.0; }};
  }
  if (form == "linear") {
    // a + b x
    const double a = number_or(spec, "a", 0.0, name), b = number_or(spec, "b", 0.0, name);
    return {[a, b](double x) { return a + b * x; }, [b](double) { return b; }};
  }
  if (form == "sqrt") {
    // scale sqrt(x)
    const double k = number(spec, "scale", name);
    return {[k](double x) { return k * std::sqrt(x); },
            [k](double x) { return 0.5 * k / std::sqrt(x); }};
  }
  if (form == "exp") {
    // scale exp(rate x)
    const double k = number(spec, "scale", name), c = number(spec, "rate", name);
    return {[k, c](double x) { return k * std::exp(c * x); },
            [k, c](double x) { return k * c * std::exp(c * x); }};
  }
  throw ConfigError(name + ": unknown form \"" + form + "\"");
}

std::string scheme_name(Scheme s) {
  return s == Scheme::alpha_point ? "alpha_point" : "ito_euler";
}

ExperimentConfig parse_config(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  if (!doc.contains("market")) throw ConfigError("config: missing \"market\" block");
  ExperimentConfig cfg;
  cfg.x0 = 1.0;
  cfg.market = parse_market(doc.at("market"), cfg.x0);
  cfg.market_json = doc.at("market");
  cfg.rho = number_or(doc, "rho", cfg.rho, "config");
  if (!(cfg.rho > 0.0)) throw ConfigError("config.rho: discount rate must be > 0");
  if (doc.contains("alphas")) {
    const Vector a = vector_of(doc.at("alphas"), "config.alphas");
    cfg.alphas.assign(a.data(), a.data() + a.size());
  }
  for (double a : cfg.alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("config.alphas: every alpha must lie in [0, 1]");
  }
  cfg.wealth0 = number_or(doc, "wealth0", cfg.wealth0, "config");
  if (!(cfg.wealth0 > 0.0)) throw ConfigError("config.wealth0: must be > 0");
  if (doc.contains("sim")) cfg.sim = parse_sim(doc.at("sim"));
  if (doc.contains("outputs")) {
    const Json& o = doc.at("outputs");
    cfg.outputs.dir = o.value("dir", cfg.outputs.dir);
    cfg.outputs.export_ensemble = o.value("export_ensemble", false);
    if (o.contains("series")) cfg.outputs.series = o.at("series").get<std::vector<std::string>>();
    for (const auto& s : cfg.outputs.series) {
      if (s != "alpha_weight" && s != "heston_policy" && s != "perturbation") {
        throw ConfigError("outputs.series: unknown series \"" + s + "\"");
      }
    }
    if (o.contains("perturbation_deltas")) {
      const Vector d = vector_of(o.at("perturbation_deltas"), "outputs.perturbation_deltas");
      cfg.outputs.perturbation_deltas.assign(d.data(), d.data() + d.size());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return parse_config(doc);
}

Json ExperimentConfig::resolved() const {
  Json out;
  Json m = market_json;
  if (std::holds_alternative<FactorMarket>(market)) m["x0"] = x0;
  out["market"] = m;
  out["rho"] = rho;
  out["alphas"] = alphas;
  out["wealth0"] = wealth0;
  if (sim) {
    Json s;
    s["horizon"] = sim->horizon;
    s["dt"] = sim->dt;
    s["n_paths"] = sim->n_paths;
    s["seed"] = sim->seed;
    s["scheme"] = scheme_name(sim->scheme);
    s["save_every"] = sim->save_every;
    out["sim"] = s;
  }
  Json o;
  o["export_ensemble"] = outputs.export_ensemble;
  o["series"] = outputs.series;
  o["perturbation_deltas"] = outputs.perturbation_deltas;
  out["outputs"] = o;
  return out;
}

}  // namespace alphamerton::cli
