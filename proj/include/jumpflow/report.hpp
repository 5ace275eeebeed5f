#pragma once

#include "jumpflow/experiments.hpp"

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace jumpflow {

inline constexpr int kReportSchemaVersion = 1;

/// Extra context recorded alongside a ConvergenceReport.
struct ReportContext {
    std::map<std::string, std::string> scenario_params;
    std::vector<std::string> notes;
};

/*
 * report.json layout (top-level keys are fixed):
 *   schema_version  integer
 *   scenario        {id, has_barrier, horizon, params}
 *   plan            {seed, paths, schedule, epsilons, n_steps, refine_hits,
 *                    trend_slack, exceedance_threshold, confidence}
 *   validation      string
 *   statistics      one object per n of the schedule
 *   verdicts        {solution, hitting}: {trend, verified}
 *   notes           array of strings
 * Non-finite numbers (never-hit times, empty means) are written as null.
 */
std::string report_json(const ConvergenceReport& report, const ReportContext& context = {});

/// Columns: n, mean_sq_delta, se, eps, p_delta_exceed, p_delta_lo, p_delta_hi,
/// p_tau_exceed, p_tau_lo, p_tau_hi. One row per (n, eps).
void write_summary_csv(std::ostream& os, const ConvergenceReport& report);

/// Columns: path_id, n, sup_distance, tau_limit, tau_n, hit_gap. Never-hit
/// times are written as "never_hit". Requires report.paths.
void write_paths_csv(std::ostream& os, const ConvergenceReport& report);

}  // namespace jumpflow
