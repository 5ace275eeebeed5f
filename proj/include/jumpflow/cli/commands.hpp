#pragma once

#include "jumpflow/cli/config.hpp"
#include "jumpflow/model.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace jumpflow::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_verdict_failure = 1,
    exit_validation_failure = 2,
    exit_config_error = 3,
};

/// Runs every applicable assumption check on a built scenario. Check seeds
/// derive from `seed`, so reruns give identical reports.
std::vector<ValidationReport> run_validators(const BuiltScenario& built, const std::vector<int>& schedule,
                                             std::uint64_t seed);

int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Writes report.json / summary.csv (and paths.csv on request) under
/// config.out_dir. A schedule with fewer than two indices is a usage error.
int cmd_converge(const RunConfig& config, std::size_t workers, std::ostream& out, std::ostream& err);

/// Writes trajectory_<path_id>.csv with columns time, is_jump, x1_n0, x1_n<n>...
/// for X^0 and every X^n of the schedule, all driven by the same noise.
int cmd_simulate(const RunConfig& config, std::uint64_t path_id, std::ostream& out, std::ostream& err);

/// Full command line: subcommands validate, converge and simulate.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace jumpflow::cli
