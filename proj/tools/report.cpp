#include "report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace alphamerton::cli {

std::string format_shortest(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::string format_17(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  // Keep the value recognisably floating point.
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

void emit(std::ostream& out, const Json& v, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * depth), ' ');
  const std::string inner(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << inner << Json(it.key()).dump() << ": ";
        emit(out, it.value(), depth + 1);
      }
      out << "\n" << pad << "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out << "[]";
        return;
      }
      const bool flat = std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_primitive(); });
      if (flat) {
        out << "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out << ", ";
          emit(out, v[i], depth + 1);
        }
        out << "]";
        return;
      }
      out << "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ",\n";
        out << inner;
        emit(out, v[i], depth + 1);
      }
      out << "\n" << pad << "]";
      return;
    }
    case Json::value_t::number_float:
      out << format_17(v.get<double>());
      return;
    default:
      out << v.dump();
  }
}

template <class T>
void put(std::ostream& out, const T& x) {
  out.write(reinterpret_cast<const char*>(&x), sizeof x);
}

template <class T>
T get(std::istream& in) {
  T x{};
  in.read(reinterpret_cast<char*>(&x), sizeof x);
  if (!in) throw SimulationError("truncated ensemble summary");
  return x;
}

}  // namespace

std::string dump_json(const Json& doc) {
  std::ostringstream out;
  emit(out, doc, 0);
  out << "\n";
  return out.str();
}

void write_verify_csv(std::ostream& out, const ComparisonTable& table) {
  Eigen::Index n = 0;
  for (const auto& row : table.rows) n = std::max(n, row.weights.size());
  out << "alpha";
  for (Eigen::Index i = 0; i < n; ++i) out << ",weight_" << i + 1;
  out << ",beta0,J_closed,J_mc,J_se,hjb_residual,pass\n";
  const double nan = std::nan("");
  for (const auto& row : table.rows) {
    out << format_shortest(row.alpha);
    for (Eigen::Index i = 0; i < n; ++i) {
      out << "," << format_shortest(i < row.weights.size() ? row.weights[i] : nan);
    }
    const bool ran = row.error.empty();
    out << "," << format_shortest(row.beta0) << "," << format_shortest(row.j_closed) << ","
        << format_shortest(ran ? row.mc.point_estimate : nan) << ","
        << format_shortest(ran ? row.mc.standard_error : nan) << ","
        << format_shortest(row.hjb_residual) << "," << (row.pass ? "true" : "false") << "\n";
  }
}

void write_verify_text(std::ostream& out, const ComparisonTable& table, const std::string& market) {
  out << "market: " << market << "\n";
  out << std::left << std::setw(8) << "alpha" << std::setw(26) << "weights" << std::setw(16)
      << "J_closed" << std::setw(16) << "J_mc" << std::setw(12) << "J_se" << std::setw(12) << "z"
      << std::setw(14) << "hjb_residual" << "result\n";
  for (const auto& row : table.rows) {
    std::ostringstream w;
    w << std::setprecision(6);
    for (Eigen::Index i = 0; i < row.weights.size(); ++i) w << (i ? " " : "") << row.weights[i];
    std::ostringstream line;
    line << std::setprecision(8);
    line << std::left << std::setw(8) << row.alpha << std::setw(26) << w.str();
    if (!row.error.empty()) {
      out << line.str() << "ERROR: " << row.error << "\n";
      continue;
    }
    const double z = row.mc.standard_error > 0
                         ? (row.mc.point_estimate - row.j_closed) / row.mc.standard_error
                         : std::nan("");
    line << std::setw(16) << row.j_closed << std::setw(16) << row.mc.point_estimate
         << std::setw(12) << std::setprecision(3) << row.mc.standard_error << std::setw(12)
         << z << std::setw(14) << row.hjb_residual << (row.pass ? "PASS" : "FAIL");
    out << line.str() << "\n";
    if (row.feller) {
      out << "        feller: " << (row.feller->satisfied ? "satisfied" : "violated")
          << ", margin " << format_shortest(row.feller->margin) << "\n";
    }
    if (!row.mc_pass) out << "        Monte Carlo estimate outside the 3 SE band\n";
    if (!row.hjb_pass) out << "        HJB residual above tolerance\n";
    for (const auto& warn : row.warnings) out << "        warning: " << warn << "\n";
  }
  out << (table.all_pass() ? "all rows pass\n" : "some rows fail\n");
}

void write_ensemble_csv(std::ostream& out, const PathEnsemble& ensemble) {
  out << "path_id,time";
  for (std::size_t k = 0; k < ensemble.dim(); ++k) out << ",state_" << k + 1;
  out << "\n";
  for (std::size_t p = 0; p < ensemble.n_paths(); ++p) {
    for (std::size_t t = 0; t < ensemble.n_times(); ++t) {
      out << ensemble.path_id(p) << "," << format_shortest(ensemble.times()[t]);
      for (std::size_t k = 0; k < ensemble.dim(); ++k) {
        out << "," << format_shortest(ensemble.state(p, t, k));
      }
      out << "\n";
    }
  }
}

EnsembleSummary summarize(const PathEnsemble& ensemble) {
  EnsembleSummary s;
  s.n_paths = ensemble.n_paths();
  s.times = ensemble.times();
  s.dim = ensemble.dim();
  const double n = static_cast<double>(ensemble.n_paths());
  for (std::size_t t = 0; t < ensemble.n_times(); ++t) {
    std::vector<double> mean(ensemble.dim(), 0.0), var(ensemble.dim(), 0.0);
    for (std::size_t k = 0; k < ensemble.dim(); ++k) {
      for (std::size_t p = 0; p < ensemble.n_paths(); ++p) mean[k] += ensemble.state(p, t, k);
      mean[k] /= n;
      for (std::size_t p = 0; p < ensemble.n_paths(); ++p) {
        const double d = ensemble.state(p, t, k) - mean[k];
        var[k] += d * d;
      }
      var[k] = n > 1 ? var[k] / (n - 1) : 0.0;
    }
    s.mean.push_back(std::move(mean));
    s.variance.push_back(std::move(var));
  }
  return s;
}

void write_summary_binary(std::ostream& out, const EnsembleSummary& summary) {
  out.write("AMES", 4);
  put(out, std::uint32_t{1});
  put(out, summary.n_paths);
  put(out, static_cast<std::uint64_t>(summary.times.size()));
  put(out, summary.dim);
  for (double t : summary.times) put(out, t);
  for (std::size_t t = 0; t < summary.times.size(); ++t) {
    for (double m : summary.mean[t]) put(out, m);
    for (double v : summary.variance[t]) put(out, v);
  }
}

EnsembleSummary read_summary_binary(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "AMES", 4) != 0) throw SimulationError("not an ensemble summary");
  if (get<std::uint32_t>(in) != 1) throw SimulationError("unsupported summary version");
  EnsembleSummary s;
  s.n_paths = get<std::uint64_t>(in);
  const auto n_times = get<std::uint64_t>(in);
  s.dim = get<std::uint64_t>(in);
  for (std::uint64_t t = 0; t < n_times; ++t) s.times.push_back(get<double>(in));
  for (std::uint64_t t = 0; t < n_times; ++t) {
    std::vector<double> mean, var;
    for (std::uint64_t k = 0; k < s.dim; ++k) mean.push_back(get<double>(in));
    for (std::uint64_t k = 0; k < s.dim; ++k) var.push_back(get<double>(in));
    s.mean.push_back(std::move(mean));
    s.variance.push_back(std::move(var));
  }
  return s;
}

}  // namespace alphamerton::cli
