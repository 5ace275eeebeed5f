#pragma once

#include "jumpflow/rng.hpp"
#include "jumpflow/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace jumpflow {

/// Uniform grid 0 = t_0 < t_1 < ... < t_n = T.
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t n_steps);

    double horizon() const { return horizon_; }
    std::size_t n_steps() const { return n_steps_; }
    double step() const { return step_; }
    /// t_i; the last point is exactly the horizon.
    double point(std::size_t i) const;
    std::vector<double> points() const;

private:
    double horizon_;
    std::size_t n_steps_;
    double step_;
};

/// Row i holds W(t_{i+1}) - W(t_i) for each of the k components.
struct WienerIncrements {
    TimeGrid grid;
    Matrix increments;
    std::uint64_t master_seed = 0;
    std::uint64_t path_id = 0;

    std::size_t dim() const { return static_cast<std::size_t>(increments.cols()); }
};

WienerIncrements sample_wiener(const TimeGrid& grid, std::size_t dim, const RngStream& stream);

/// Sums consecutive groups of `factor` rows, giving the increments of the same
/// Brownian path on a grid with n_steps / factor steps.
WienerIncrements coarsen(const WienerIncrements& fine, std::size_t factor);

/// Draws one mark from mu / mu(outer region). Must never return the zero vector.
using MarkSampler = std::function<Vector(RngStream&)>;

/// gaussian_moment_match feeds c(t, x, G) with G ~ N(0, small-jump covariance)
/// per step, which matches the small-jump contribution exactly only for c
/// linear in theta.
enum class SmallJumpPolicy { drop, gaussian_moment_match };

struct FiniteActivity {
    double total_mass = 0.0;
    MarkSampler sampler;
};

struct TruncatedInfinite {
    double truncation_level = 0.0;
    double outer_mass = 0.0;
    MarkSampler outer_sampler;
    SmallJumpPolicy small_jump_policy = SmallJumpPolicy::drop;
    /// Integral of theta theta^T over the ball of radius truncation_level.
    Matrix small_jump_covariance;
};

/// The Levy measure mu of the driving Poisson random measure.
class JumpMeasureSpec {
public:
    JumpMeasureSpec() = default;
    static JumpMeasureSpec none(std::size_t mark_dim = 1);
    static JumpMeasureSpec finite(std::size_t mark_dim, double total_mass, MarkSampler sampler);
    static JumpMeasureSpec truncated(std::size_t mark_dim, TruncatedInfinite spec);

    std::size_t mark_dim() const { return mark_dim_; }
    bool is_finite_activity() const { return !truncated_.has_value(); }
    /// Mass of the sampled part of mu (total mass, or the outer mass).
    double sampled_mass() const;
    const MarkSampler& sampler() const;
    bool has_sampler() const { return static_cast<bool>(sampler()); }
    const std::optional<TruncatedInfinite>& truncated_part() const { return truncated_; }
    /// True when small jumps are replaced by a Gaussian with matched covariance.
    bool gaussian_small_jumps() const;

    /// Throws std::invalid_argument if masses are negative/non-finite, or a
    /// sampler is attached to a nonpositive mass.
    void validate() const;

    /// Draws a mark and rejects the zero vector (mu has no atom at zero).
    Vector draw_mark(RngStream& stream) const;

private:
    std::size_t mark_dim_ = 1;
    FiniteActivity finite_{};
    std::optional<TruncatedInfinite> truncated_;
};

struct JumpEvent {
    double time;
    Vector mark;
};

struct JumpStream {
    std::vector<JumpEvent> events;

    std::size_t size() const { return events.size(); }
    bool empty() const { return events.empty(); }
    /// Number of events with time in (from, to].
    std::size_t count_in(double from, double to) const;
};

/// Poisson variate with the given mean, drawn from the sequential interface
/// of `stream` (inversion for small means, PTRS rejection otherwise).
std::uint64_t sample_poisson(double mean, RngStream& stream);

/// Conditional-uniform sampling of the Poisson random measure on (0, horizon]:
/// draw the count, then sorted uniform times, then independent marks.
JumpStream sample_jumps(const JumpMeasureSpec& spec, double horizon,
                        std::pair<RngStream, RngStream> streams);

/// Everything random that drives one Monte Carlo path. Shared by every
/// equation of a coupled family.
struct NoisePath {
    WienerIncrements wiener;
    JumpStream jumps;
    /// n_steps x m Gaussian increments standing in for compensated small
    /// jumps; empty unless the measure uses gaussian_moment_match.
    Matrix small_jumps;
};

/// R with R R^T = covariance, for a symmetric positive semidefinite matrix.
Matrix covariance_root(const Matrix& covariance);

NoisePath sample_noise(std::uint64_t master_seed, std::uint64_t path_id, const TimeGrid& grid,
                       std::size_t wiener_dim, const JumpMeasureSpec& spec);

}  // namespace jumpflow
