#include "jumpflow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace jumpflow {

namespace {

// Normal indices (not blocks) where bridge draws live.
constexpr std::uint64_t kWienerBridgeBase = 2 * RngStream::kAuxBlockOffset;
constexpr std::uint64_t kSmallJumpBridgeBase = 2 * RngStream::kAuxBlockOffset + (std::uint64_t{1} << 45);

Eigen::RowVectorXd split_piece(Eigen::RowVectorXd& remaining, double frac, double sd,
                               const RngStream& stream, std::uint64_t base) {
    Eigen::RowVectorXd piece(remaining.size());
    for (Eigen::Index c = 0; c < remaining.size(); ++c) {
        piece(c) = frac * remaining(c) + sd * stream.normal_at(base + static_cast<std::uint64_t>(c));
    }
    remaining -= piece;
    return piece;
}

bool apply_overflow_policy(Vector& x, const SolveConfig& config, std::size_t step, const char* stage) {
    if (x.allFinite() && x.cwiseAbs().maxCoeff() <= config.clamp_magnitude) return false;
    if (config.overflow_policy == OverflowPolicy::error) {
        if (x.allFinite()) return false;
        throw SolverError("solve_path: non-finite state " + std::string(stage) + " at step " +
                              std::to_string(step),
                          step);
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (std::isnan(x(i))) {
            x(i) = 0.0;
        } else {
            x(i) = std::clamp(x(i), -config.clamp_magnitude, config.clamp_magnitude);
        }
    }
    return true;
}

}  // namespace

AdaptedNoise adapt_noise(const NoisePath& noise) {
    const TimeGrid& grid = noise.wiener.grid;
    const auto& events = noise.jumps.events;
    const std::size_t n = grid.n_steps();
    const Eigen::Index k = noise.wiener.increments.cols();
    const bool has_small = noise.small_jumps.size() > 0;
    const Eigen::Index m = has_small ? noise.small_jumps.cols() : 0;
    if (static_cast<std::size_t>(noise.wiener.increments.rows()) != n ||
        (has_small && static_cast<std::size_t>(noise.small_jumps.rows()) != n)) {
        throw std::invalid_argument("adapt_noise: increment rows must match the grid");
    }
    if (!events.empty() && events.back().time > grid.horizon()) {
        throw std::invalid_argument("adapt_noise: jump times exceed the grid horizon");
    }

    const RngStream wiener_stream =
        make_stream(noise.wiener.master_seed, noise.wiener.path_id, StreamRole::wiener);
    const RngStream mark_stream =
        make_stream(noise.wiener.master_seed, noise.wiener.path_id, StreamRole::jump_marks);

    AdaptedNoise out;
    out.jumps = &noise.jumps;
    const std::size_t capacity = n + 1 + events.size();
    out.times.reserve(capacity);
    out.first_jump.reserve(capacity + 1);
    out.wiener.resize(static_cast<Eigen::Index>(capacity - 1), k);
    out.small_jumps.resize(has_small ? static_cast<Eigen::Index>(capacity - 1) : 0, m);

    out.times.push_back(0.0);
    out.first_jump.push_back(0);
    std::size_t e = 0;
    Eigen::Index row = 0;
    Eigen::RowVectorXd rem_w(k), rem_z(m);

    for (std::size_t i = 0; i < n; ++i) {
        double u = grid.point(i);
        const double w = grid.point(i + 1);
        rem_w = noise.wiener.increments.row(static_cast<Eigen::Index>(i));
        if (has_small) rem_z = noise.small_jumps.row(static_cast<Eigen::Index>(i));

        while (e < events.size() && events[e].time < w) {
            const double v = events[e].time;
            const std::size_t first = e;
            while (e < events.size() && events[e].time == v) ++e;
            const double frac = (v - u) / (w - u);
            const double sd = std::sqrt(std::max(0.0, (v - u) * (w - v) / (w - u)));
            out.wiener.row(row) = split_piece(rem_w, frac, sd, wiener_stream,
                                              kWienerBridgeBase + first * static_cast<std::uint64_t>(k));
            if (has_small) {
                out.small_jumps.row(row) = split_piece(rem_z, frac, sd, mark_stream,
                                                      kSmallJumpBridgeBase + first * static_cast<std::uint64_t>(m));
            }
            ++row;
            out.times.push_back(v);
            out.first_jump.push_back(e);
            u = v;
        }
        out.wiener.row(row) = rem_w;
        if (has_small) out.small_jumps.row(row) = rem_z;
        ++row;
        out.times.push_back(w);
        while (e < events.size() && events[e].time == w) ++e;
        out.first_jump.push_back(e);
    }
    // So far entry j is the end of point j's events; prepend 0 so that entry j
    // becomes the start and entry j + 1 the end.
    out.first_jump.insert(out.first_jump.begin(), 0);
    out.wiener.conservativeResize(row, k);
    if (has_small) out.small_jumps.conservativeResize(row, m);
    return out;
}

Vector Trajectory::value_at(double t) const {
    if (times.empty()) throw std::logic_error("Trajectory::value_at: empty trajectory");
    auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t idx = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
    return state(idx);
}

Trajectory solve_path(const CoefficientSet& cs, const Vector& x0, const AdaptedNoise& noise,
                      const SolveConfig& config) {
    cs.require_complete();
    const auto d = static_cast<Eigen::Index>(cs.state_dim);
    if (x0.size() != d) throw std::invalid_argument("solve_path: x0 has wrong dimension");
    if (!x0.allFinite()) throw std::invalid_argument("solve_path: x0 must be finite");
    if (noise.wiener.cols() != static_cast<Eigen::Index>(cs.wiener_dim)) {
        throw std::invalid_argument("solve_path: Wiener dimension mismatch");
    }
    const bool has_small = noise.small_jumps.size() > 0;

    const std::size_t points = noise.points();
    Trajectory traj;
    traj.times = noise.times;
    traj.horizon = noise.times.back();
    traj.states.resize(d, static_cast<Eigen::Index>(points));
    traj.pre_jump_states.resize(d, static_cast<Eigen::Index>(points));
    traj.is_jump.assign(points, 0);

    Vector x = x0;
    traj.states.col(0) = x;
    traj.pre_jump_states.col(0) = x;
    std::size_t last = 0;
    if (config.stop_when && config.stop_when(0.0, x)) {
        traj.stopped_early = true;
    }

    for (std::size_t j = 0; j + 1 < points && !traj.stopped_early; ++j) {
        const double u = noise.times[j];
        const double v = noise.times[j + 1];
        const double dt = v - u;
        const auto row = static_cast<Eigen::Index>(j);

        const Matrix b = cs.diffusion(u, x);
        if (b.rows() != d || b.cols() != noise.wiener.cols()) {
            throw std::invalid_argument("solve_path: diffusion has wrong shape");
        }
        Vector next = x + (cs.drift(u, x) - cs.compensator(u, x)) * dt +
                      b * noise.wiener.row(row).transpose();
        if (has_small) next += cs.jump(u, x, noise.small_jumps.row(row).transpose());
        traj.clamped |= apply_overflow_policy(next, config, j + 1, "before jump");
        x = std::move(next);
        traj.pre_jump_states.col(static_cast<Eigen::Index>(j + 1)) = x;

        const std::size_t n_jumps = noise.jumps_at(j + 1);
        if (n_jumps > 0) {
            traj.is_jump[j + 1] = 1;
            for (std::size_t q = 0; q < n_jumps; ++q) {
                const JumpEvent& ev = noise.jumps->events[noise.first_jump[j + 1] + q];
                x += cs.jump(v, x, ev.mark);
                traj.clamped |= apply_overflow_policy(x, config, j + 1, "after jump");
            }
        }
        traj.states.col(static_cast<Eigen::Index>(j + 1)) = x;
        last = j + 1;

        if (config.stop_when &&
            (config.stop_when(v, traj.pre_jump_states.col(static_cast<Eigen::Index>(j + 1))) ||
             config.stop_when(v, x))) {
            traj.stopped_early = true;
        }
    }

    if (last + 1 < points) {
        traj.times.resize(last + 1);
        traj.is_jump.resize(last + 1);
        traj.states.conservativeResize(d, static_cast<Eigen::Index>(last + 1));
        traj.pre_jump_states.conservativeResize(d, static_cast<Eigen::Index>(last + 1));
    }
    return traj;
}

Trajectory solve_path(const CoefficientSet& cs, const Vector& x0, const NoisePath& noise,
                      const SolveConfig& config) {
    return solve_path(cs, x0, adapt_noise(noise), config);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "time";
    for (std::size_t i = 0; i < traj.dim(); ++i) os << ",x_" << (i + 1);
    os << ",is_jump\n";
    const auto old_precision = os.precision(17);
    for (std::size_t j = 0; j < traj.size(); ++j) {
        os << traj.times[j];
        for (Eigen::Index i = 0; i < traj.states.rows(); ++i) {
            os << ',' << traj.states(i, static_cast<Eigen::Index>(j));
        }
        os << ',' << (traj.is_jump[j] ? 1 : 0) << '\n';
    }
    os.precision(old_precision);
}

namespace {

template <typename PerPath>
void for_each_path(const CoefficientSet& cs, const JumpMeasureSpec& jumps, const Vector& x0,
                   const TimeGrid& grid, std::size_t paths, std::uint64_t master_seed,
                   PerPath&& per_path) {
    for (std::size_t p = 0; p < paths; ++p) {
        try {
            const NoisePath noise = sample_noise(master_seed, p, grid, cs.wiener_dim, jumps);
            per_path(solve_path(cs, x0, noise));
        } catch (const SolverError& err) {
            throw SolverError(std::string(err.what()) + " (path " + std::to_string(p) + ")",
                              err.step());
        }
    }
}

}  // namespace

double check_moment_bound(const CoefficientSet& cs, const JumpMeasureSpec& jumps, const Vector& x0,
                          const TimeGrid& grid, std::size_t paths, std::uint64_t master_seed) {
    if (paths < 100) throw std::invalid_argument("check_moment_bound: paths must be >= 100");
    double sum = 0.0;
    for_each_path(cs, jumps, x0, grid, paths, master_seed, [&](const Trajectory& traj) {
        const double sup_post = traj.states.colwise().squaredNorm().maxCoeff();
        const double sup_pre = traj.pre_jump_states.colwise().squaredNorm().maxCoeff();
        sum += std::max(sup_post, sup_pre);
    });
    return sum / static_cast<double>(paths) / (1.0 + x0.squaredNorm());
}

double check_continuity_bound(const CoefficientSet& cs, const JumpMeasureSpec& jumps,
                              const Vector& x0, const TimeGrid& grid, std::size_t paths,
                              const std::vector<std::pair<double, double>>& pairs,
                              std::uint64_t master_seed) {
    if (paths == 0) throw std::invalid_argument("check_continuity_bound: paths must be positive");
    for (const auto& [s, t] : pairs) {
        if (s == t || s < 0.0 || t < 0.0 || s > grid.horizon() || t > grid.horizon()) {
            throw std::invalid_argument("check_continuity_bound: need distinct s, t in [0, T]");
        }
    }
    std::vector<double> sums(pairs.size(), 0.0);
    for_each_path(cs, jumps, x0, grid, paths, master_seed, [&](const Trajectory& traj) {
        for (std::size_t q = 0; q < pairs.size(); ++q) {
            sums[q] += (traj.value_at(pairs[q].second) - traj.value_at(pairs[q].first)).squaredNorm();
        }
    });
    double worst = 0.0;
    for (std::size_t q = 0; q < pairs.size(); ++q) {
        const double mean = sums[q] / static_cast<double>(paths);
        worst = std::max(worst, mean / ((1.0 + x0.squaredNorm()) * std::abs(pairs[q].second - pairs[q].first)));
    }
    return worst;
}

}  // namespace jumpflow
