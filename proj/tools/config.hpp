#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "alphamerton/evaluation.hpp"

namespace alphamerton::cli {

using Json = nlohmann::ordered_json;

/// Raised for malformed or invalid configs; maps to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct OutputOptions {
  std::string dir = ".";
  bool export_ensemble = false;
  /// Plot series to produce; empty means every series that applies to the market.
  std::vector<std::string> series;
  std::vector<double> perturbation_deltas{-0.5, -0.25, 0.0, 0.25, 0.5};
};

struct ExperimentConfig {
  Market market;
  double rho = 0.1;
  std::vector<double> alphas{0.0, 0.5, 1.0};
  double wealth0 = 1.0;
  /// Initial factor value; generic factor markets only.
  double x0 = 1.0;
  std::optional<SimConfig> sim;
  OutputOptions outputs;
  /// Market block as given (coefficient specs are kept verbatim).
  Json market_json;

  /// Everything that determines results, with defaults filled in. Worker count
  /// and output directory are left out because they do not affect results.
  Json resolved() const;
};

ExperimentConfig parse_config(const Json& doc);
ExperimentConfig load_config(const std::string& path);

/// Scalar coefficient from its JSON description: a number (constant) or
/// {"form": "constant" | "linear" | "sqrt" | "exp", ...}.
ScalarFunction parse_coefficient(const Json& spec, const std::string& name);

std::string scheme_name(Scheme s);

}  // namespace alphamerton::cli
