#pragma once

#include "dpeigen/run_config.hpp"

namespace dpeigen {

inline constexpr const char kToolVersion[] = "0.1.0";

// Exit codes shared by all commands:
//   0  success (solve: both quotient minimizations converged; scan: every
//      row classified; validate: every battery reports zero failures)
//   1  configuration or I/O error (bad config text, invalid exponent
//      triple, missing output directory, unwritable file)
//   2  computation finished but did not meet its target (non-converged
//      minimization, inconclusive scan rows, failed diagnostic battery)
//
// Commands never create the output directory; a missing directory is an
// error. All JSON reports are byte-deterministic for a fixed config;
// wall-clock timestamps appear only in run_meta.json.

int cmd_solve(const RunConfig& config);
int cmd_scan(const RunConfig& config);
int cmd_validate(const RunConfig& config);

}  // namespace dpeigen
