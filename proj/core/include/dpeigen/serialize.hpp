#pragma once

#include <string>
#include <vector>

#include "dpeigen/diagnostics.hpp"
#include "dpeigen/solver.hpp"

namespace dpeigen {

// JSON documents are rendered with sorted keys and shortest round-trip
// number formatting, so identical inputs produce identical bytes.
// Non-finite values are encoded as the strings "infinity", "-infinity" and
// "nan". Timestamps never appear in these documents; they live in the run
// metadata file only.

std::string estimates_to_json(const EigenEstimate& weighted,
                              const EigenEstimate& raw,
                              const std::string& config_hash);

std::string scan_to_json(const ScanReport& report,
                         const std::string& config_hash);

// Header exactly: lambda,min_T,norm,residual,classification
std::string scan_to_csv(const ScanReport& report);

std::string diagnostics_to_json(const std::vector<CheckReport>& reports,
                                const std::string& config_hash);

std::string run_meta_to_json(const std::string& config_hash,
                             const std::string& command,
                             const std::string& started_utc,
                             const std::string& finished_utc,
                             const std::string& tool_version);

// ISO-8601 UTC wall-clock time, second resolution.
std::string current_utc_timestamp();

}  // namespace dpeigen
