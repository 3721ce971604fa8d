#include "dpeigen/serialize.hpp"

#include <cmath>
#include <ctime>
#include <nlohmann/json.hpp>

namespace dpeigen {

namespace {

using nlohmann::json;

json encode_real(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0.0 ? "infinity" : "-infinity";
  }
  return v;
}

std::string format_csv_number(double v) {
  return encode_real(v).dump();
}

json estimate_to_json(const EigenEstimate& estimate) {
  json history = json::array();
  for (const auto& [iteration, value] : estimate.descent_history) {
    history.push_back(json::array({iteration, encode_real(value)}));
  }
  json out;
  out["lambda_hat"] = encode_real(estimate.lambda_hat);
  out["residual"] = encode_real(estimate.residual);
  out["iterations_used"] = estimate.iterations_used;
  out["converged"] = estimate.converged;
  out["descent_history"] = history;
  return out;
}

json report_to_json(const CheckReport& report) {
  json details = json::array();
  for (const auto& witness : report.details) {
    json w;
    w["input"] = witness.input;
    w["lhs"] = encode_real(witness.lhs);
    w["rhs"] = encode_real(witness.rhs);
    details.push_back(w);
  }
  json out;
  out["check_name"] = report.check_name;
  out["trials"] = report.trials;
  out["failures"] = report.failures;
  out["worst_violation"] = encode_real(report.worst_violation);
  out["details"] = details;
  return out;
}

}  // namespace

std::string estimates_to_json(const EigenEstimate& weighted,
                              const EigenEstimate& raw,
                              const std::string& config_hash) {
  json out;
  out["config_hash"] = config_hash;
  out["weighted_quotient"] = estimate_to_json(weighted);
  out["raw_quotient"] = estimate_to_json(raw);
  const double slack = 1e-6 * std::abs(raw.lambda_hat);
  out["lambda0_le_lambda1"] = raw.lambda_hat <= weighted.lambda_hat + slack;
  return out.dump(2) + "\n";
}

std::string scan_to_json(const ScanReport& report,
                         const std::string& config_hash) {
  json rows = json::array();
  double largest_trivial = -1.0;
  double smallest_certified = -1.0;
  for (const auto& row : report.rows) {
    json r;
    r["lambda"] = encode_real(row.lambda);
    r["min_T"] = encode_real(row.min_energy);
    r["norm"] = encode_real(row.minimizer_norm);
    r["residual"] = encode_real(row.residual);
    r["classification"] = to_string(row.classification);
    rows.push_back(r);
    if (row.classification == ScanClass::trivial_only) {
      largest_trivial = std::max(largest_trivial, row.lambda);
    }
    if (row.classification == ScanClass::eigenvalue_certified &&
        (smallest_certified < 0.0 || row.lambda < smallest_certified)) {
      smallest_certified = row.lambda;
    }
  }
  json summary;
  summary["largest_trivial_lambda"] =
      largest_trivial < 0.0 ? json(nullptr) : encode_real(largest_trivial);
  summary["smallest_certified_lambda"] =
      smallest_certified < 0.0 ? json(nullptr) : encode_real(smallest_certified);
  summary["bracket_lower"] = encode_real(report.lambda0_estimate);
  summary["bracket_upper"] = encode_real(report.lambda1_estimate);

  json out;
  out["config_hash"] = config_hash;
  out["lambda0_estimate"] = encode_real(report.lambda0_estimate);
  out["lambda1_estimate"] = encode_real(report.lambda1_estimate);
  out["rows"] = rows;
  out["summary"] = summary;
  out["warnings"] = report.warnings;
  return out.dump(2) + "\n";
}

std::string scan_to_csv(const ScanReport& report) {
  std::string out = "lambda,min_T,norm,residual,classification\n";
  for (const auto& row : report.rows) {
    out += format_csv_number(row.lambda);
    out += ',';
    out += format_csv_number(row.min_energy);
    out += ',';
    out += format_csv_number(row.minimizer_norm);
    out += ',';
    out += format_csv_number(row.residual);
    out += ',';
    out += to_string(row.classification);
    out += '\n';
  }
  return out;
}

std::string diagnostics_to_json(const std::vector<CheckReport>& reports,
                                const std::string& config_hash) {
  json checks = json::array();
  bool all_ok = true;
  for (const auto& report : reports) {
    checks.push_back(report_to_json(report));
    all_ok = all_ok && report.ok();
  }
  json out;
  out["config_hash"] = config_hash;
  out["all_ok"] = all_ok;
  out["checks"] = checks;
  return out.dump(2) + "\n";
}

std::string run_meta_to_json(const std::string& config_hash,
                             const std::string& command,
                             const std::string& started_utc,
                             const std::string& finished_utc,
                             const std::string& tool_version) {
  json out;
  out["command"] = command;
  out["config_hash"] = config_hash;
  out["started_utc"] = started_utc;
  out["finished_utc"] = finished_utc;
  out["tool_version"] = tool_version;
  return out.dump(2) + "\n";
}

std::string current_utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm parts{};
  gmtime_r(&now, &parts);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &parts);
  return buffer;
}

}  // namespace dpeigen
