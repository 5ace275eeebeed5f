#include "jumpflow/hitting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace jumpflow {

std::string_view to_string(CrossingKind kind) {
    switch (kind) {
        case CrossingKind::none: return "never_hit";
        case CrossingKind::initial: return "initial";
        case CrossingKind::continuous_crossing: return "continuous_crossing";
        case CrossingKind::jump_crossing: return "jump_crossing";
        case CrossingKind::horizon_forced: return "horizon_forced";
    }
    return "unknown";
}

namespace {

double eval_phi(const BarrierFunction& barrier, double t, const Vector& x, std::size_t index) {
    const double v = barrier.raw(t, x);
    if (!std::isfinite(v)) {
        throw NonFiniteError("first_hit: barrier is not finite at grid index " + std::to_string(index));
    }
    return v;
}

}  // namespace

HittingTime first_hit(const Trajectory& traj, const BarrierFunction& barrier, bool refine) {
    if (!barrier) throw std::invalid_argument("first_hit: empty barrier");
    if (traj.size() == 0) throw std::invalid_argument("first_hit: empty trajectory");
    const double cap = barrier.horizon();

    double prev = eval_phi(barrier, traj.times[0], traj.state(0), 0);
    if (prev >= 0.0) return {traj.times[0], CrossingKind::initial, 0};

    for (std::size_t i = 1; i < traj.size(); ++i) {
        const double t = traj.times[i];
        const double before = eval_phi(barrier, t, traj.pre_jump_state(i), i);
        const double after = traj.is_jump[i] ? eval_phi(barrier, t, traj.state(i), i) : before;

        std::optional<HittingTime> found;
        if (before >= 0.0) {
            double when = t;
            if (refine) {
                const double t_prev = traj.times[i - 1];
                when = t_prev + (t - t_prev) * (-prev / (before - prev));
                when = std::clamp(when, t_prev, t);
            }
            found = HittingTime{when, CrossingKind::continuous_crossing, i};
        } else if (after >= 0.0) {
            found = HittingTime{t, CrossingKind::jump_crossing, i};
        }

        if (found) {
            if (found->value > cap) return HittingTime{cap, CrossingKind::horizon_forced, i};
            return *found;
        }
        if (t >= cap) return HittingTime{cap, CrossingKind::horizon_forced, i};
        prev = after;
    }

    if (barrier.is_finite()) {
        if (traj.stopped_early) {
            throw std::invalid_argument("first_hit: trajectory was stopped before the barrier horizon");
        }
        throw std::invalid_argument("first_hit: trajectory ends before the barrier horizon");
    }
    return HittingTime::never();
}

BarrierFunction finite_horizon_wrap(const BarrierFunction& barrier, double horizon) {
    if (!(horizon > 0.0)) throw std::invalid_argument("finite_horizon_wrap: horizon must be positive");
    return barrier.truncated_at(horizon);
}

double hit_gap(const HittingTime& a, const HittingTime& b) {
    if (!a.hit() && !b.hit()) return 0.0;
    if (a.hit() != b.hit()) return std::numeric_limits<double>::infinity();
    return std::abs(a.value - b.value);
}

double check_barrier_convergence(const ScenarioSequence& seq, int n, const SampleBox& box,
                                 RngStream stream) {
    if (n < 1) throw std::invalid_argument("check_barrier_convergence: n must be >= 1");
    const BarrierFunction lim = seq.barrier(0);
    const BarrierFunction cur = seq.barrier(n);
    const std::size_t d = seq.limit().state_dim;

    auto gap = [&](double t, const Vector& x) {
        const double v = std::abs(cur.raw(t, x) - lim.raw(t, x));
        if (!std::isfinite(v)) throw NonFiniteError("check_barrier_convergence: barrier not finite");
        return v;
    };
    double worst = 0.0;
    for (double t : {0.0, box.horizon}) {
        Vector x = Vector::Zero(static_cast<Eigen::Index>(d));
        worst = std::max(worst, gap(t, x));
        for (std::size_t i = 0; i < d; ++i) {
            for (double sign : {1.0, -1.0}) {
                x.setZero();
                x(static_cast<Eigen::Index>(i)) = sign * box.radius;
                worst = std::max(worst, gap(t, x));
            }
        }
    }
    for (std::size_t s = 0; s < box.samples; ++s) {
        const auto [t, x] = sample_point(box, d, stream);
        worst = std::max(worst, gap(t, x));
    }
    return worst;
}

ValidationReport check_nondegeneracy(const CoefficientSet& cs, const BarrierFunction& barrier,
                                     const SampleBox& box, RngStream stream, double floor,
                                     std::optional<double> boundary_band) {
    cs.require_complete();
    if (box.samples < 1) throw std::invalid_argument("check_nondegeneracy: samples must be >= 1");
    ValidationReport report;
    report.assumption = "G3";
    report.seed = stream.master_seed();
    report.path_id = stream.path_id();
    report.role = stream.role();
    report.estimate = std::numeric_limits<double>::infinity();

    // The cut-off at a finite horizon is excluded: phi is only required to be
    // smooth on [0, T).
    SampleBox region = box;
    if (barrier.is_finite()) region.horizon = std::min(box.horizon, barrier.horizon());
    const bool open_right = barrier.is_finite() && region.horizon >= barrier.horizon();

    const std::size_t max_attempts = boundary_band ? 200 * box.samples : box.samples;
    for (std::size_t attempt = 0; attempt < max_attempts && report.samples < box.samples; ++attempt) {
        auto [t, x] = sample_point(region, cs.state_dim, stream);
        if (open_right && t >= barrier.horizon()) continue;
        if (boundary_band && std::abs(barrier.raw(t, x)) > *boundary_band) continue;
        const Matrix b = cs.diffusion(t, x);
        const Vector grad = barrier.gradient(t, x);
        if (!b.allFinite() || !grad.allFinite()) {
            throw NonFiniteError("check_nondegeneracy: non-finite diffusion or gradient");
        }
        const double strength = (b.transpose() * grad).norm();
        ++report.samples;
        if (strength < report.estimate) {
            report.estimate = strength;
            report.witness = Witness{t, x, {}, {}};
        }
    }
    report.pass = report.samples > 0 && report.estimate > floor;
    report.detail = boundary_band ? "min |b^T D_x phi| near the barrier's zero set"
                                  : "min |b^T D_x phi| over sampled points";
    return report;
}

}  // namespace jumpflow
