#include "jumpflow/experiments.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

namespace jumpflow {

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::decreasing: return "decreasing";
        case Verdict::flat: return "flat";
        case Verdict::non_decreasing: return "non_decreasing";
        case Verdict::unavailable: return "unavailable";
    }
    return "unknown";
}

void CouplingPlan::validate() const {
    if (paths < 1) throw std::invalid_argument("plan: paths must be >= 1");
    if (schedule.empty()) throw std::invalid_argument("plan: schedule must not be empty");
    for (int n : schedule) {
        if (n < 0) throw std::invalid_argument("plan: schedule indices must be >= 0");
    }
    for (double e : epsilons) {
        if (!(e > 0.0)) throw std::invalid_argument("plan: every epsilon must be positive");
    }
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw std::invalid_argument("plan: confidence must lie in (0, 1)");
    }
}

void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body) {
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto drain = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
    if (n_threads == 1) {
        drain();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (std::size_t w = 0; w < n_threads; ++w) pool.emplace_back(drain);
    }
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
}

double sup_distance(const Trajectory& a, const Trajectory& b) {
    if (a.size() == 0 || b.size() == 0) throw std::invalid_argument("sup_distance: empty trajectory");
    if (a.stopped_early || b.stopped_early) {
        throw std::invalid_argument("sup_distance: trajectories must span the whole window");
    }
    const double scale = std::max({1.0, std::abs(a.horizon), std::abs(b.horizon)});
    if (std::abs(a.horizon - b.horizon) > 1e-12 * scale || a.dim() != b.dim()) {
        throw std::invalid_argument("sup_distance: trajectories must share horizon and dimension");
    }

    double worst = 0.0;
    std::size_t i = 0, j = 0;
    // Invariant: a.times[i] and b.times[j] are the next unvisited points;
    // the held values are those of the last visited point.
    std::size_t ia = 0, jb = 0;
    while (i < a.size() || j < b.size()) {
        const double ta = i < a.size() ? a.times[i] : std::numeric_limits<double>::infinity();
        const double tb = j < b.size() ? b.times[j] : std::numeric_limits<double>::infinity();
        const double t = std::min(ta, tb);
        const bool on_a = ta == t;
        const bool on_b = tb == t;
        if (on_a) ia = i;
        if (on_b) jb = j;
        const auto ca = static_cast<Eigen::Index>(ia);
        const auto cb = static_cast<Eigen::Index>(jb);
        const double post = (a.states.col(ca) - b.states.col(cb)).norm();
        const auto pre_a = on_a ? a.pre_jump_states.col(ca) : a.states.col(ca);
        const auto pre_b = on_b ? b.pre_jump_states.col(cb) : b.states.col(cb);
        const double pre = (pre_a - pre_b).norm();
        worst = std::max({worst, post, pre});
        if (on_a) ++i;
        if (on_b) ++j;
    }
    return worst;
}

Interval wilson_interval(std::size_t successes, std::size_t trials, double confidence) {
    if (trials == 0) throw std::invalid_argument("wilson_interval: trials must be >= 1");
    if (successes > trials) throw std::invalid_argument("wilson_interval: successes exceed trials");
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw std::invalid_argument("wilson_interval: confidence must lie in (0, 1)");
    }
    const boost::math::normal standard;
    const double z = boost::math::quantile(standard, 0.5 + confidence / 2.0);
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    Interval out{std::max(0.0, center - half), std::min(1.0, center + half)};
    if (successes == 0) out.lo = 0.0;
    if (successes == trials) out.hi = 1.0;
    return out;
}

Verdict trend_verdict(const std::vector<double>& values, double slack) {
    if (values.size() < 2) throw std::invalid_argument("trend_verdict: need at least two values");
    bool monotone = true;
    for (std::size_t i = 1; i < values.size(); ++i) {
        monotone &= values[i] <= values[i - 1] * (1.0 + slack);
    }
    if (monotone && values.back() < values.front() / 2.0) return Verdict::decreasing;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*hi - *lo <= slack * std::max(std::abs(*hi), std::abs(*lo))) return Verdict::flat;
    return Verdict::non_decreasing;
}

namespace {

int verdict_rank(Verdict v) {
    switch (v) {
        case Verdict::decreasing: return 0;
        case Verdict::flat: return 1;
        case Verdict::non_decreasing: return 2;
        case Verdict::unavailable: return 3;
    }
    return 3;
}

PathOutcome run_one_path(const ScenarioSequence& seq, const CouplingPlan& plan,
                         const std::vector<CoefficientSet>& coefficients,
                         const std::vector<Vector>& initial, const std::vector<BarrierFunction>& barriers,
                         std::uint64_t path_id) {
    // coefficients[0] is the limit; coefficients[q + 1] is schedule[q].
    const NoisePath noise =
        sample_noise(plan.master_seed, path_id, plan.grid, coefficients[0].wiener_dim, seq.jumps);
    const AdaptedNoise adapted = adapt_noise(noise);

    auto solve = [&](std::size_t slot, int n) {
        try {
            return solve_path(coefficients[slot], initial[slot], adapted);
        } catch (const std::exception& err) {
            throw ExperimentError(std::string(err.what()) + " (path " + std::to_string(path_id) +
                                      ", n " + std::to_string(n) + ")",
                                  path_id, n);
        }
    };
    auto hit = [&](const Trajectory& traj, std::size_t slot, int n) {
        try {
            return first_hit(traj, barriers[slot], plan.refine_hits);
        } catch (const std::exception& err) {
            throw ExperimentError(std::string(err.what()) + " (path " + std::to_string(path_id) +
                                      ", n " + std::to_string(n) + ")",
                                  path_id, n);
        }
    };

    const Trajectory limit = solve(0, 0);
    const bool with_barrier = !barriers.empty();
    const HittingTime tau_limit = with_barrier ? hit(limit, 0, 0) : HittingTime{};

    PathOutcome out;
    out.path_id = path_id;
    out.per_n.reserve(plan.schedule.size());
    for (std::size_t q = 0; q < plan.schedule.size(); ++q) {
        const int n = plan.schedule[q];
        const Trajectory traj = solve(q + 1, n);
        PathComparison cmp;
        cmp.n = n;
        cmp.sup_distance = sup_distance(traj, limit);
        if (with_barrier) {
            cmp.tau_limit = tau_limit;
            cmp.tau_n = hit(traj, q + 1, n);
            cmp.hit_gap = hit_gap(cmp.tau_n, tau_limit);
        }
        out.per_n.push_back(cmp);
    }
    return out;
}

}  // namespace

ConvergenceReport run_coupled(const ScenarioSequence& seq, const CouplingPlan& plan,
                              const RunOptions& options) {
    plan.validate();
    const auto started = std::chrono::steady_clock::now();

    std::vector<CoefficientSet> coefficients{seq.limit()};
    std::vector<Vector> initial{seq.x0(0)};
    std::vector<BarrierFunction> barriers;
    if (seq.has_barrier()) barriers.push_back(seq.barrier(0));
    for (int n : plan.schedule) {
        coefficients.push_back(seq.at(n));
        initial.push_back(seq.x0(n));
        if (seq.has_barrier()) barriers.push_back(seq.barrier(n));
    }

    std::vector<PathOutcome> outcomes(plan.paths);
    parallel_for(plan.paths, options.workers, [&](std::size_t p) {
        outcomes[p] = run_one_path(seq, plan, coefficients, initial, barriers, p);
    });

    ConvergenceReport report;
    report.scenario_id = seq.id;
    report.plan = plan;
    report.validation = options.validation;
    report.has_barrier = seq.has_barrier();

    // Aggregation runs in path order, so floating-point sums do not depend on
    // how paths were scheduled.
    const double count = static_cast<double>(plan.paths);
    for (std::size_t q = 0; q < plan.schedule.size(); ++q) {
        IndexStats stats;
        stats.n = plan.schedule[q];
        double sum = 0.0, sum_sq = 0.0, gap_sum = 0.0;
        std::size_t both_hit = 0;
        std::vector<std::size_t> delta_counts(plan.epsilons.size(), 0);
        std::vector<std::size_t> tau_counts(plan.epsilons.size(), 0);
        for (const PathOutcome& path : outcomes) {
            const PathComparison& cmp = path.per_n[q];
            const double d2 = cmp.sup_distance * cmp.sup_distance;
            sum += d2;
            sum_sq += d2 * d2;
            stats.max_delta = std::max(stats.max_delta, cmp.sup_distance);
            if (report.has_barrier) {
                stats.limit_hits += cmp.tau_limit.hit() ? 1 : 0;
                stats.n_hits += cmp.tau_n.hit() ? 1 : 0;
                if (cmp.tau_limit.hit() && cmp.tau_n.hit()) {
                    gap_sum += cmp.hit_gap;
                    ++both_hit;
                }
            }
            for (std::size_t e = 0; e < plan.epsilons.size(); ++e) {
                delta_counts[e] += cmp.sup_distance > plan.epsilons[e] ? 1 : 0;
                tau_counts[e] += report.has_barrier && cmp.hit_gap > plan.epsilons[e] ? 1 : 0;
            }
        }
        stats.mean_sq_delta = sum / count;
        const double var = plan.paths > 1
                               ? std::max(0.0, (sum_sq - count * stats.mean_sq_delta * stats.mean_sq_delta) /
                                                   (count - 1.0))
                               : 0.0;
        stats.se = std::sqrt(var / count);
        stats.mean_hit_gap = both_hit ? gap_sum / static_cast<double>(both_hit) : 0.0;
        for (std::size_t e = 0; e < plan.epsilons.size(); ++e) {
            ExceedanceStat ex;
            ex.eps = plan.epsilons[e];
            ex.delta_count = delta_counts[e];
            ex.p_delta = static_cast<double>(delta_counts[e]) / count;
            ex.delta_ci = wilson_interval(delta_counts[e], plan.paths, plan.confidence);
            ex.tau_count = tau_counts[e];
            ex.p_tau = static_cast<double>(tau_counts[e]) / count;
            ex.tau_ci = wilson_interval(tau_counts[e], plan.paths, plan.confidence);
            stats.exceedances.push_back(ex);
        }
        report.per_n.push_back(std::move(stats));
    }

    if (plan.schedule.size() >= 2) {
        std::vector<double> msd;
        for (const auto& s : report.per_n) msd.push_back(s.mean_sq_delta);
        report.solution.trend = trend_verdict(msd, plan.trend_slack);
        bool final_ok = true;
        for (const auto& ex : report.per_n.back().exceedances) {
            final_ok &= ex.delta_ci.hi < plan.exceedance_threshold;
        }
        const bool msd_zero = std::all_of(msd.begin(), msd.end(), [](double v) { return v == 0.0; });
        report.solution.verified = (report.solution.trend == Verdict::decreasing || msd_zero) && final_ok;

        if (report.has_barrier && !plan.epsilons.empty()) {
            Verdict worst = Verdict::decreasing;
            bool all_zero = true;
            bool final_tau_ok = true;
            for (std::size_t e = 0; e < plan.epsilons.size(); ++e) {
                std::vector<double> series;
                for (const auto& s : report.per_n) series.push_back(s.exceedances[e].p_tau);
                final_tau_ok &= report.per_n.back().exceedances[e].tau_ci.hi < plan.exceedance_threshold;
                // A series that is identically zero has already converged.
                if (std::all_of(series.begin(), series.end(), [](double v) { return v == 0.0; })) continue;
                all_zero = false;
                const Verdict v = trend_verdict(series, plan.trend_slack);
                if (verdict_rank(v) > verdict_rank(worst)) worst = v;
            }
            report.hitting.trend = all_zero ? Verdict::flat : worst;
            report.hitting.verified =
                (report.hitting.trend == Verdict::decreasing || all_zero) && final_tau_ok;
        }
    }

    if (options.keep_paths) report.paths = std::move(outcomes);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

std::vector<HittingTime> sample_hitting_times(const ScenarioSequence& seq, int n,
                                              const TimeGrid& grid, std::size_t paths,
                                              std::uint64_t master_seed, bool refine,
                                              std::size_t workers) {
    const CoefficientSet cs = seq.at(n);
    const Vector x0 = seq.x0(n);
    const BarrierFunction barrier = seq.barrier(n);
    SolveConfig config;
    config.stop_when = [&barrier](double t, const Vector& x) { return barrier.value(t, x) >= 0.0; };

    std::vector<HittingTime> out(paths);
    parallel_for(paths, workers, [&](std::size_t p) {
        try {
            const NoisePath noise = sample_noise(master_seed, p, grid, cs.wiener_dim, seq.jumps);
            out[p] = first_hit(solve_path(cs, x0, noise, config), barrier, refine);
        } catch (const std::exception& err) {
            throw ExperimentError(std::string(err.what()) + " (path " + std::to_string(p) + ", n " +
                                      std::to_string(n) + ")",
                                  p, n);
        }
    });
    return out;
}

}  // namespace jumpflow
