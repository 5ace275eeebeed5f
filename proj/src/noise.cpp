#include "jumpflow/noise.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace jumpflow {

TimeGrid::TimeGrid(double horizon, std::size_t n_steps)
    : horizon_(horizon), n_steps_(n_steps), step_(n_steps == 0 ? 0.0 : horizon / n_steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw std::invalid_argument("TimeGrid: horizon must be positive and finite");
    }
}

double TimeGrid::point(std::size_t i) const {
    if (i == 0) return 0.0;
    if (i >= n_steps_) return horizon_;
    return horizon_ * (static_cast<double>(i) / static_cast<double>(n_steps_));
}

std::vector<double> TimeGrid::points() const {
    std::vector<double> out(n_steps_ + 1);
    for (std::size_t i = 0; i <= n_steps_; ++i) out[i] = point(i);
    return out;
}

WienerIncrements sample_wiener(const TimeGrid& grid, std::size_t dim, const RngStream& stream) {
    WienerIncrements out{grid, Matrix(grid.n_steps(), dim), stream.master_seed(), stream.path_id()};
    const double scale = std::sqrt(grid.step());
    for (std::size_t i = 0; i < grid.n_steps(); ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            out.increments(i, j) = scale * stream.normal_at(i * dim + j);
        }
    }
    return out;
}

WienerIncrements coarsen(const WienerIncrements& fine, std::size_t factor) {
    const std::size_t n = fine.grid.n_steps();
    if (factor == 0 || n % factor != 0) {
        throw std::invalid_argument("coarsen: factor must divide the number of steps");
    }
    WienerIncrements out{TimeGrid(fine.grid.horizon(), n / factor),
                         Matrix::Zero(n / factor, fine.increments.cols()), fine.master_seed,
                         fine.path_id};
    for (std::size_t i = 0; i < n; ++i) out.increments.row(i / factor) += fine.increments.row(i);
    return out;
}

JumpMeasureSpec JumpMeasureSpec::none(std::size_t mark_dim) {
    JumpMeasureSpec spec;
    spec.mark_dim_ = mark_dim;
    return spec;
}

JumpMeasureSpec JumpMeasureSpec::finite(std::size_t mark_dim, double total_mass,
                                        MarkSampler sampler) {
    JumpMeasureSpec spec;
    spec.mark_dim_ = mark_dim;
    spec.finite_ = {total_mass, std::move(sampler)};
    spec.validate();
    return spec;
}

JumpMeasureSpec JumpMeasureSpec::truncated(std::size_t mark_dim, TruncatedInfinite part) {
    JumpMeasureSpec spec;
    spec.mark_dim_ = mark_dim;
    spec.truncated_ = std::move(part);
    spec.validate();
    return spec;
}

double JumpMeasureSpec::sampled_mass() const {
    return truncated_ ? truncated_->outer_mass : finite_.total_mass;
}

const MarkSampler& JumpMeasureSpec::sampler() const {
    return truncated_ ? truncated_->outer_sampler : finite_.sampler;
}

bool JumpMeasureSpec::gaussian_small_jumps() const {
    return truncated_ && truncated_->small_jump_policy == SmallJumpPolicy::gaussian_moment_match;
}

void JumpMeasureSpec::validate() const {
    const double mass = sampled_mass();
    if (!std::isfinite(mass) || mass < 0.0) {
        throw std::invalid_argument("jump measure: mass must be finite and nonnegative");
    }
    if (has_sampler() && mass <= 0.0) {
        throw std::invalid_argument("jump measure: a mark sampler requires positive mass");
    }
    if (!has_sampler() && mass > 0.0) {
        throw std::invalid_argument("jump measure: positive mass requires a mark sampler");
    }
    if (truncated_) {
        if (!(truncated_->truncation_level > 0.0)) {
            throw std::invalid_argument("jump measure: truncation level must be positive");
        }
        if (gaussian_small_jumps()) {
            const auto& cov = truncated_->small_jump_covariance;
            const auto m = static_cast<Eigen::Index>(mark_dim_);
            if (cov.rows() != m || cov.cols() != m) {
                throw std::invalid_argument("jump measure: small-jump covariance must be m x m");
            }
            if (!cov.allFinite() || (cov - cov.transpose()).norm() > 1e-12 * (1.0 + cov.norm())) {
                throw std::invalid_argument("jump measure: small-jump covariance must be symmetric");
            }
        }
    }
}

Vector JumpMeasureSpec::draw_mark(RngStream& stream) const {
    Vector mark = sampler()(stream);
    if (mark.size() != static_cast<Eigen::Index>(mark_dim_)) {
        throw std::invalid_argument("jump measure: sampler returned a mark of wrong dimension");
    }
    if (!mark.allFinite()) throw NonFiniteError("jump measure: sampler returned a non-finite mark");
    if (mark.isZero(0.0)) {
        throw std::invalid_argument("jump measure: sampler returned the zero mark");
    }
    return mark;
}

std::size_t JumpStream::count_in(double from, double to) const {
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(),
                      [&](const JumpEvent& e) { return e.time > from && e.time <= to; }));
}

std::uint64_t sample_poisson(double mean, RngStream& stream) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw std::invalid_argument("sample_poisson: mean must be finite and nonnegative");
    }
    if (mean == 0.0) return 0;
    if (mean < 10.0) {
        // Sequential inversion.
        const double u = stream.uniform();
        double p = std::exp(-mean);
        double cdf = p;
        std::uint64_t k = 0;
        while (u > cdf) {
            ++k;
            p *= mean / static_cast<double>(k);
            const double next = cdf + p;
            if (next == cdf) break;
            cdf = next;
        }
        return k;
    }
    // Hormann's transformed rejection with squeeze (PTRS).
    const double log_mean = std::log(mean);
    const double smu = std::sqrt(mean);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = stream.uniform() - 0.5;
        const double v = stream.uniform();
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -mean + k * log_mean - std::lgamma(k + 1.0)) {
            return static_cast<std::uint64_t>(k);
        }
    }
}

JumpStream sample_jumps(const JumpMeasureSpec& spec, double horizon,
                        std::pair<RngStream, RngStream> streams) {
    if (!(horizon > 0.0)) throw std::invalid_argument("sample_jumps: horizon must be positive");
    spec.validate();
    JumpStream out;
    const double mass = spec.sampled_mass();
    if (mass == 0.0) return out;

    auto& [time_stream, mark_stream] = streams;
    const std::uint64_t count = sample_poisson(mass * horizon, time_stream);
    std::vector<double> times(count);
    for (auto& t : times) t = horizon * time_stream.uniform();
    std::sort(times.begin(), times.end());

    out.events.reserve(count);
    for (double t : times) out.events.push_back({t, spec.draw_mark(mark_stream)});
    return out;
}

Matrix covariance_root(const Matrix& covariance) {
    // LDLT tolerates singular (semidefinite) covariances.
    const Eigen::LDLT<Matrix> ldlt(covariance);
    Matrix root = ldlt.transpositionsP().transpose() * Matrix(ldlt.matrixL());
    root *= ldlt.vectorD().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    return root;
}

NoisePath sample_noise(std::uint64_t master_seed, std::uint64_t path_id, const TimeGrid& grid,
                       std::size_t wiener_dim, const JumpMeasureSpec& spec) {
    NoisePath noise{
        sample_wiener(grid, wiener_dim, make_stream(master_seed, path_id, StreamRole::wiener)),
        sample_jumps(spec, grid.horizon(),
                     {make_stream(master_seed, path_id, StreamRole::jump_times),
                      make_stream(master_seed, path_id, StreamRole::jump_marks)}),
        Matrix(),
    };
    if (spec.gaussian_small_jumps()) {
        const auto m = static_cast<Eigen::Index>(spec.mark_dim());
        const Matrix root = covariance_root(spec.truncated_part()->small_jump_covariance);

        const RngStream marks = make_stream(master_seed, path_id, StreamRole::jump_marks);
        const std::uint64_t base = 2 * RngStream::kAuxBlockOffset;
        const double scale = std::sqrt(grid.step());
        noise.small_jumps.resize(static_cast<Eigen::Index>(grid.n_steps()), m);
        Vector z(m);
        for (std::size_t i = 0; i < grid.n_steps(); ++i) {
            for (Eigen::Index j = 0; j < m; ++j) {
                z(j) = marks.normal_at(base + i * static_cast<std::uint64_t>(m) +
                                       static_cast<std::uint64_t>(j));
            }
            noise.small_jumps.row(static_cast<Eigen::Index>(i)) = (scale * root * z).transpose();
        }
    }
    return noise;
}

}  // namespace jumpflow
