#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace alphamerton::cli {

/// Shortest representation that reads back to the same double; "nan"/"inf" spelled out.
std::string format_shortest(double x);

/// JSON with the key order of `doc`, two-space indent and doubles at 17
/// significant digits. Non-finite doubles become null.
std::string dump_json(const Json& doc);

/// CSV of a comparison table: alpha, weight_1..n, beta0, J_closed, J_mc, J_se, hjb_residual, pass.
void write_verify_csv(std::ostream& out, const ComparisonTable& table);

/// Aligned text report with per-row diagnostics.
void write_verify_text(std::ostream& out, const ComparisonTable& table, const std::string& market);

/// One row per path per stored time: path_id, time, state_1..state_d.
void write_ensemble_csv(std::ostream& out, const PathEnsemble& ensemble);

struct EnsembleSummary {
  std::uint64_t n_paths = 0;
  std::vector<double> times;
  std::uint64_t dim = 0;
  /// [time][coord] across paths.
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> variance;
};

EnsembleSummary summarize(const PathEnsemble& ensemble);

/// Little-endian layout: "AMES", u32 version (1), u64 n_paths, u64 n_times, u64 dim,
/// f64 times[n_times], then for each time f64 mean[dim] followed by f64 variance[dim].
void write_summary_binary(std::ostream& out, const EnsembleSummary& summary);
EnsembleSummary read_summary_binary(std::istream& in);

}  // namespace alphamerton::cli
