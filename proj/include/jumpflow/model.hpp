#pragma once

#include "jumpflow/barrier.hpp"
#include "jumpflow/noise.hpp"
#include "jumpflow/rng.hpp"
#include "jumpflow/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace jumpflow {

using DriftFn = std::function<Vector(double t, const Vector& x)>;
using DiffusionFn = std::function<Matrix(double t, const Vector& x)>;
using JumpCoeffFn = std::function<Vector(double t, const Vector& x, const Vector& mark)>;

/*
 * Coefficients of one equation
 *
 *   dX = a(t,X) dt + b(t,X) dW + \int c(t,X(t-),theta) (nu - mu x dt)(dtheta, dt).
 *
 * `compensator` must equal \int c(t,x,theta) mu(dtheta) over the sampled
 * (outer) part of mu; check_compensator() spot-checks it.
 *
 * All callables are required to be pure: they are invoked concurrently from
 * worker threads.
 */
struct CoefficientSet {
    std::size_t state_dim = 1;
    std::size_t wiener_dim = 1;
    std::size_t mark_dim = 1;
    DriftFn drift;
    DiffusionFn diffusion;
    JumpCoeffFn jump;
    DriftFn compensator;

    /// All four coefficients identically zero.
    static CoefficientSet zero(std::size_t d, std::size_t k, std::size_t m);

    /// Throws std::invalid_argument if a callable is missing.
    void require_complete() const;
};

/// Indexed family X^n, n >= 0; index 0 is the limit equation.
struct ScenarioSequence {
    std::string id;
    JumpMeasureSpec jumps;
    std::function<CoefficientSet(int n)> coefficient_family;
    std::function<Vector(int n)> initial_family;
    std::function<BarrierFunction(int n)> barrier_family;
    /// Finite horizon of the scenario, or the simulation window for
    /// infinite-horizon barriers.
    double horizon = 1.0;

    CoefficientSet limit() const { return at(0); }
    CoefficientSet at(int n) const;
    Vector x0(int n) const;
    BarrierFunction barrier(int n) const;
    bool has_barrier() const { return static_cast<bool>(barrier_family); }
};

/// Where validators sample: t in [0, horizon], x in the closed ball of `radius`.
struct SampleBox {
    double horizon = 1.0;
    double radius = 1.0;
    std::size_t samples = 1000;
    /// Mark draws per point for integrals against mu.
    std::size_t mark_samples = 256;
};

struct Witness {
    double t = 0.0;
    Vector x;
    Vector y;
    Vector mark;
};

/// Outcome of one randomized spot check. These are not proofs: a pass only
/// says that no sampled point violated the bound.
struct ValidationReport {
    std::string assumption;
    std::size_t samples = 0;
    double estimate = 0.0;
    bool pass = false;
    std::optional<Witness> witness;
    std::string detail;
    std::uint64_t seed = 0;
    std::uint64_t path_id = 0;
    StreamRole role = StreamRole::wiener;
};

double operator_norm(const Matrix& m);

/// Uniform draw from [0, horizon] x B_d(radius).
std::pair<double, Vector> sample_point(const SampleBox& box, std::size_t dim, RngStream& stream);

/// Monte Carlo estimate of \int f(theta) mu(dtheta) with its standard error.
/// Includes the Gaussian stand-in for small jumps when the measure uses one.
struct MarkIntegral {
    double value = 0.0;
    double standard_error = 0.0;
};
MarkIntegral integrate_marks(const JumpMeasureSpec& spec,
                             const std::function<double(const Vector&)>& integrand,
                             std::size_t draws, RngStream& stream);

/// Growth bound: max ratio (|a|^2 + |b|^2 + \int |c|^2 dmu) / (1 + |x|^2).
ValidationReport check_linear_growth(const CoefficientSet& cs, const JumpMeasureSpec& jumps,
                                     const SampleBox& box, RngStream stream);

/// Local Lipschitz bound on B_d(radius): max ratio of squared coefficient
/// differences to |x - y|^2 over sampled pairs.
ValidationReport check_local_lipschitz(const CoefficientSet& cs, const JumpMeasureSpec& jumps,
                                       const SampleBox& box, RngStream stream);

/// max |a^n - a^0| + |b^n - b^0| + (\int |c^n - c^0|^2 dmu)^{1/2} over sampled (t, x).
double check_coefficient_convergence(const ScenarioSequence& seq, int n, const SampleBox& box,
                                     RngStream stream);

/// Gaps |x0(n) - x0(0)| along a schedule; passes when they shrink.
ValidationReport check_initial_convergence(const ScenarioSequence& seq,
                                           const std::vector<int>& schedule);

using EnvelopeStateFn = std::function<double(double t, const Vector& x)>;
using EnvelopeMarkFn = std::function<double(const Vector& mark)>;

/// |c(t,x,theta)| <= h(t,x) g(theta) at sampled points. `estimate` holds the
/// worst violation margin (0 when none).
ValidationReport check_small_jump_envelope(const CoefficientSet& cs, const JumpMeasureSpec& jumps,
                                           const EnvelopeStateFn& h, const EnvelopeMarkFn& g,
                                           const SampleBox& box, RngStream stream);

/// Compares the compensator callable against Monte Carlo \int c dmu. Passes
/// when every component is within 4 standard errors.
ValidationReport check_compensator(const CoefficientSet& cs, const JumpMeasureSpec& jumps,
                                   const SampleBox& box, RngStream stream);

}  // namespace jumpflow
