#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "repeaterlab/estimators.hpp"
#include "repeaterlab/io.hpp"
#include "repeaterlab/simulator.hpp"

namespace repeaterlab {

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitNumerical = 3 };

/// analyze report: equilibrium, throughput, latency, closed-form cross-checks.
Json analyze_report(const ProtocolParams& params, std::optional<std::uint64_t> horizon);

/// One row per trajectory: trajectory_index,success_count.
std::string simulation_csv(const SimulationResult& result);

Json simulation_summary(const SimulationResult& result, const Json& target);

/// Entry point shared by the repeaterlab executable and the tests.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace repeaterlab
