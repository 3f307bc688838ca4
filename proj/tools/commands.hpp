#pragma once

#include <ostream>

#include "run_config.hpp"

namespace mrraps::cli {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitAmbiguous = 2;

/// Each command writes its artifacts under config.out and a run_manifest.json
/// holding the resolved config. Errors propagate as exceptions; run() maps
/// them to kExitError.
int cmd_fit(const RunConfig& config, std::ostream& log);
int cmd_diagnose(const RunConfig& config, std::ostream& log);
int cmd_select(const RunConfig& config, std::ostream& log);
int cmd_simulate(const RunConfig& config, std::ostream& log);

/// Validates and dispatches on config.command. Never throws.
int run(const RunConfig& config, std::ostream& log, std::ostream& err);

}  // namespace mrraps::cli
