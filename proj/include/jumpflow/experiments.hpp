#pragma once

#include "jumpflow/hitting.hpp"
#include "jumpflow/model.hpp"
#include "jumpflow/noise.hpp"
#include "jumpflow/solver.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace jumpflow {

/// How the coupled experiment is run. Index 0 is always solved as the
/// reference; `schedule` lists the indices compared against it.
struct CouplingPlan {
    std::uint64_t master_seed = 0;
    std::size_t paths = 2000;
    std::vector<int> schedule{1, 4, 16, 64};
    std::vector<double> epsilons{0.1};
    TimeGrid grid{1.0, 1000};
    bool refine_hits = true;
    /// Relative slack allowed between successive values by trend_verdict.
    double trend_slack = 0.1;
    /// A statistic is "verified" when its final exceedance upper bound is below this.
    double exceedance_threshold = 0.05;
    double confidence = 0.95;

    /// Throws std::invalid_argument on an empty schedule, paths == 0 or a
    /// nonpositive epsilon.
    void validate() const;
};

struct RunOptions {
    std::size_t workers = 1;
    /// Recorded verbatim in the report ("strict", "warn", "skip", ...).
    std::string validation = "not_run";
    /// Keep per-path outcomes in the report (for the per-path CSV dump).
    bool keep_paths = false;
};

struct PathComparison {
    int n = 0;
    double sup_distance = 0.0;
    HittingTime tau_limit;
    HittingTime tau_n;
    double hit_gap = 0.0;
};

struct PathOutcome {
    std::uint64_t path_id = 0;
    std::vector<PathComparison> per_n;
};

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

struct ExceedanceStat {
    double eps = 0.0;
    std::size_t delta_count = 0;
    double p_delta = 0.0;
    Interval delta_ci;
    std::size_t tau_count = 0;
    double p_tau = 0.0;
    Interval tau_ci;
};

struct IndexStats {
    int n = 0;
    double mean_sq_delta = 0.0;
    double se = 0.0;
    double max_delta = 0.0;
    std::size_t limit_hits = 0;
    std::size_t n_hits = 0;
    /// Mean |tau^n - tau^0| over paths where both hit.
    double mean_hit_gap = 0.0;
    std::vector<ExceedanceStat> exceedances;
};

enum class Verdict { decreasing, flat, non_decreasing, unavailable };

std::string_view to_string(Verdict v);

struct StatisticVerdict {
    Verdict trend = Verdict::unavailable;
    bool verified = false;
};

struct ConvergenceReport {
    std::string scenario_id;
    CouplingPlan plan;
    std::string validation;
    bool has_barrier = false;
    std::vector<IndexStats> per_n;
    StatisticVerdict solution;
    StatisticVerdict hitting;
    /// Not part of the serialized report (it would break byte-identical reruns).
    double wall_seconds = 0.0;
    std::vector<PathOutcome> paths;
};

/// Carries the (path_id, n) where a solver or hitting error happened.
class ExperimentError : public std::runtime_error {
public:
    ExperimentError(const std::string& what, std::uint64_t path_id, int n)
        : std::runtime_error(what), path_id_(path_id), n_(n) {}
    std::uint64_t path_id() const { return path_id_; }
    int n() const { return n_; }

private:
    std::uint64_t path_id_;
    int n_;
};

/// sup over the union of both time grids of |a(t) - b(t)|, each path read
/// right-continuously between its own points. Pre-jump values at jump times
/// are included. Throws std::invalid_argument for different horizons.
double sup_distance(const Trajectory& a, const Trajectory& b);

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::size_t successes, std::size_t trials, double confidence = 0.95);

/*
 * decreasing:     every value <= previous * (1 + slack) and last < first / 2
 * flat:           otherwise, if max - min <= slack * max(|max|, |min|)
 * non_decreasing: everything else
 */
Verdict trend_verdict(const std::vector<double>& values, double slack);

/// Drives X^0 and every X^n of the schedule with the same noise per path and
/// aggregates sup distances and hit-time gaps. Deterministic in (seq, plan),
/// independent of the worker count.
ConvergenceReport run_coupled(const ScenarioSequence& seq, const CouplingPlan& plan,
                              const RunOptions& options = {});

/// Hitting times of X^n for `paths` independent paths; each path stops
/// integrating at its first crossing.
std::vector<HittingTime> sample_hitting_times(const ScenarioSequence& seq, int n,
                                              const TimeGrid& grid, std::size_t paths,
                                              std::uint64_t master_seed, bool refine,
                                              std::size_t workers = 1);

/// Runs body(i) for i in [0, count) on `workers` threads. The first failure by
/// lowest index is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace jumpflow
