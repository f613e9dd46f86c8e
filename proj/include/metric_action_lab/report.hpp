#pragma once

// Experiment reports: per-h rows, a verdict, named invariant checks, CSV and JSON output.
//
// CSV columns: h, tau, theta_h, theta_target, d_inf, bound_residual, lower_bound, followed by
// experiment-specific extras and a trailing error column. Missing values are "nan".

#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "metric_action_lab/io.hpp"

namespace mal {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kReportSchema = 1;

enum class Verdict { ConsistentWithGammaConvergence, GammaConvergenceViolated, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::ConsistentWithGammaConvergence: return "ConsistentWithGammaConvergence";
    case Verdict::GammaConvergenceViolated: return "GammaConvergenceViolated";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

struct ReportRow {
  static constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
  double h = kMissing;
  double tau = kMissing;
  double theta_h = kMissing;
  double theta_target = kMissing;
  double d_inf = kMissing;
  double bound_residual = kMissing;
  double lower_bound = kMissing;
  std::vector<std::pair<std::string, double>> extra;  // same keys, same order in every row
  std::string error;

  double get(const std::string& key) const {
    for (const auto& [k, v] : extra)
      if (k == key) return v;
    return kMissing;
  }
};

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Witness {
  std::size_t row = 0;
  double lower_bound = 0.0;
  double target = 0.0;
  double gap = 0.0;
};

struct ExperimentReport {
  std::string experiment;
  std::vector<ReportRow> rows;
  Verdict verdict = Verdict::Inconclusive;
  std::optional<Witness> witness;
  std::vector<Check> checks;
  std::vector<std::string> notes;
  Json config = Json::object();
  std::uint64_t seed = 0;

  void check(std::string name, bool ok, std::string detail = {}) {
    checks.push_back({std::move(name), ok, std::move(detail)});
  }
  bool all_passed() const {
    for (const Check& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

inline std::vector<std::string> report_columns(const ExperimentReport& r) {
  std::vector<std::string> cols{"h", "tau", "theta_h", "theta_target", "d_inf", "bound_residual", "lower_bound"};
  if (!r.rows.empty())
    for (const auto& [k, v] : r.rows.front().extra) cols.push_back(k);
  cols.push_back("error");
  return cols;
}

inline std::string report_csv(const ExperimentReport& r) {
  const auto cols = report_columns(r);
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += "\n";
  for (const ReportRow& row : r.rows) {
    std::vector<double> v{row.h, row.tau, row.theta_h, row.theta_target, row.d_inf, row.bound_residual,
                          row.lower_bound};
    for (const auto& [k, x] : row.extra) v.push_back(x);
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_number(v[i]);
    std::string err = row.error;
    for (char& c : err)
      if (c == ',' || c == '\n') c = ';';
    out += "," + err + "\n";
  }
  return out;
}

inline Json report_json(const ExperimentReport& r) {
  Json j;
  j["schema"] = kReportSchema;
  j["version"] = kVersion;
  j["experiment"] = r.experiment;
  j["verdict"] = to_string(r.verdict);
  if (r.witness) {
    j["witness"] = {{"row", r.witness->row},
                    {"h", json_number(r.rows.at(r.witness->row).h)},
                    {"lower_bound", json_number(r.witness->lower_bound)},
                    {"target", json_number(r.witness->target)},
                    {"gap", json_number(r.witness->gap)}};
  } else {
    j["witness"] = nullptr;
  }
  Json checks = Json::array();
  for (const Check& c : r.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["checks"] = checks;
  j["all_checks_passed"] = r.all_passed();
  Json rows = Json::array();
  const auto cols = report_columns(r);
  for (const ReportRow& row : r.rows) {
    Json o;
    o["h"] = json_number(row.h);
    o["tau"] = json_number(row.tau);
    o["theta_h"] = json_number(row.theta_h);
    o["theta_target"] = json_number(row.theta_target);
    o["d_inf"] = json_number(row.d_inf);
    o["bound_residual"] = json_number(row.bound_residual);
    o["lower_bound"] = json_number(row.lower_bound);
    for (const auto& [k, v] : row.extra) o[k] = json_number(v);
    o["error"] = row.error;
    rows.push_back(o);
  }
  j["rows"] = rows;
  j["notes"] = r.notes;
  j["seed"] = r.seed;
  j["config"] = r.config;
  return j;
}

/// Writes <dir>/<stem>.csv and <dir>/<stem>.json.
inline void emit_report(const ExperimentReport& r, const std::filesystem::path& dir, const std::string& stem) {
  write_file(dir / (stem + ".csv"), report_csv(r));
  write_json(dir / (stem + ".json"), report_json(r));
}

}  // namespace mal
