#pragma once

#include "jumpflow/model.hpp"
#include "jumpflow/noise.hpp"
#include "jumpflow/types.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

namespace jumpflow {

/*
 * Noise re-expressed on the jump-adapted grid: the union of the uniform grid
 * points and the jump times. Each stored Wiener increment whose step contains
 * jump times is split at them by sequential conditional (bridge) sampling,
 * with the extra Gaussians drawn from the auxiliary region of the path's
 * wiener stream at indices fixed by the global jump index. Pieces of a step
 * always add back up to the stored increment, and the result depends only on
 * the noise, so every equation of a coupled family sees identical pieces.
 */
struct AdaptedNoise {
    std::vector<double> times;
    /// Row j: Wiener increment over [times[j], times[j+1]].
    Matrix wiener;
    /// Row j: Gaussian small-jump increment over the same piece (may be empty).
    Matrix small_jumps;
    /// Jump events landing at times[j] are jumps->events[first_jump[j] .. first_jump[j+1]).
    std::vector<std::size_t> first_jump;
    const JumpStream* jumps = nullptr;

    std::size_t points() const { return times.size(); }
    std::size_t jumps_at(std::size_t j) const { return first_jump[j + 1] - first_jump[j]; }
};

/// `noise` must outlive the result (events are referenced, not copied).
AdaptedNoise adapt_noise(const NoisePath& noise);

enum class OverflowPolicy { error, clamp };

struct SolveConfig {
    OverflowPolicy overflow_policy = OverflowPolicy::error;
    /// Component magnitude used by OverflowPolicy::clamp.
    double clamp_magnitude = 1e150;
    /// Optional early stop: integration ends at the first grid time where
    /// the predicate holds for the pre-jump or post-jump state.
    std::function<bool(double t, const Vector& x)> stop_when;
};

/// Raised when the state leaves the floating-point range under OverflowPolicy::error.
class SolverError : public NonFiniteError {
public:
    SolverError(const std::string& what, std::size_t step) : NonFiniteError(what), step_(step) {}
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

/// Euler approximation on a jump-adapted grid. Column i of `states` is X(t_i)
/// (after any jump at t_i); `pre_jump_states` holds X(t_i-), which equals
/// the post-jump value where no jump occurs.
struct Trajectory {
    std::vector<double> times;
    Matrix states;
    Matrix pre_jump_states;
    std::vector<char> is_jump;
    /// End of the time window the noise covered.
    double horizon = 0.0;
    bool clamped = false;
    bool stopped_early = false;

    std::size_t size() const { return times.size(); }
    std::size_t dim() const { return static_cast<std::size_t>(states.rows()); }
    Vector state(std::size_t i) const { return states.col(static_cast<Eigen::Index>(i)); }
    Vector pre_jump_state(std::size_t i) const {
        return pre_jump_states.col(static_cast<Eigen::Index>(i));
    }
    /// Right-continuous lookup: the state at the last grid time <= t.
    Vector value_at(double t) const;
};

Trajectory solve_path(const CoefficientSet& cs, const Vector& x0, const AdaptedNoise& noise,
                      const SolveConfig& config = {});
Trajectory solve_path(const CoefficientSet& cs, const Vector& x0, const NoisePath& noise,
                      const SolveConfig& config = {});

/// CSV with columns time, x_1..x_d, is_jump.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Empirical E[sup_t |X(t)|^2] / (1 + |x0|^2).
double check_moment_bound(const CoefficientSet& cs, const JumpMeasureSpec& jumps, const Vector& x0,
                          const TimeGrid& grid, std::size_t paths, std::uint64_t master_seed);

/// max over pairs of E|X(t) - X(s)|^2 / ((1 + |x0|^2) |t - s|).
double check_continuity_bound(const CoefficientSet& cs, const JumpMeasureSpec& jumps,
                              const Vector& x0, const TimeGrid& grid, std::size_t paths,
                              const std::vector<std::pair<double, double>>& pairs,
                              std::uint64_t master_seed);

}  // namespace jumpflow
