#pragma once

#include "jumpflow/barrier.hpp"
#include "jumpflow/model.hpp"
#include "jumpflow/solver.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <string_view>

namespace jumpflow {

enum class CrossingKind { none, initial, continuous_crossing, jump_crossing, horizon_forced };

std::string_view to_string(CrossingKind kind);

/// inf{t >= 0 : phi(t, X(t)) >= 0}; `value` is +infinity when the set is empty.
struct HittingTime {
    double value = std::numeric_limits<double>::infinity();
    CrossingKind kind = CrossingKind::none;
    /// Grid index at which the crossing was detected.
    std::size_t index = 0;

    bool hit() const { return kind != CrossingKind::none; }
    static HittingTime never() { return {}; }
};

/*
 * Discretely monitored first hitting time.
 *
 * Grid times are scanned in order. At a jump time both X(t-) and X(t) are
 * tested; a crossing by X(t-) counts as continuous, a crossing only by X(t)
 * as a jump crossing. With `refine`, continuous crossings are moved back to
 * the zero of the linear interpolant of phi over the last segment.
 *
 * Finite-mode barriers stop at their horizon: the result is the raw crossing
 * if it is not later than the horizon, otherwise the horizon itself with kind
 * horizon_forced. This makes first_hit(finite_horizon_wrap(phi, T)) equal to
 * min(first_hit(phi), T) exactly.
 *
 * Throws NonFiniteError on a non-finite phi, and std::invalid_argument if a
 * finite-mode barrier outlives the trajectory without a crossing.
 */
HittingTime first_hit(const Trajectory& traj, const BarrierFunction& barrier, bool refine);

/// phi 1_{[0,T)}(t): the same barrier, forced to fire at T.
BarrierFunction finite_horizon_wrap(const BarrierFunction& barrier, double horizon);

/// |a - b| with the never-hit sentinel: both never -> 0, exactly one -> +infinity.
double hit_gap(const HittingTime& a, const HittingTime& b);

/// Sampled sup of |phi^n - phi^0| over [0, box.horizon] x B_d(box.radius).
double check_barrier_convergence(const ScenarioSequence& seq, int n, const SampleBox& box,
                                 RngStream stream);

/// Minimum of |b(t,x)^T D_x phi(t,x)| over sampled points; passes when it
/// stays above `floor`. With `boundary_band`, only points where
/// |phi(t,x)| <= band are considered.
ValidationReport check_nondegeneracy(const CoefficientSet& cs, const BarrierFunction& barrier,
                                     const SampleBox& box, RngStream stream, double floor = 0.0,
                                     std::optional<double> boundary_band = std::nullopt);

}  // namespace jumpflow
