#pragma once

#include "jumpflow/barrier.hpp"
#include "jumpflow/model.hpp"
#include "jumpflow/noise.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace jumpflow {

/// A one-dimensional mark distribution together with the moments the
/// compensator and validators need.
struct MarkLaw {
    std::string name;
    MarkSampler sampler;
    double mean = 0.0;
    double second_moment = 0.0;
};

MarkLaw unit_marks();
/// +1 or -1 with probability 1/2 each.
MarkLaw symmetric_unit_marks();
/// Uniform on [lo, hi].
MarkLaw uniform_marks(double lo, double hi);
MarkLaw normal_marks(double mean, double sd);
MarkLaw exponential_marks(double rate);
/// Parses "unit", "symmetric", "uniform:lo:hi", "normal:mean:sd", "exponential:rate".
MarkLaw parse_mark_law(const std::string& text);

/// Finite-activity measure with total mass `rate` and marks from `law`
/// (no jumps when rate is 0).
JumpMeasureSpec compound_poisson(double rate, const MarkLaw& law);

using ScalarFamily = std::function<double(int n)>;

/// value(0) = limit, value(n) = limit + rate / n.
ScalarFamily harmonic_family(double limit, double rate);

/// d = k = m = 1 constant coefficients a^n, b^n and c^n(t,x,theta) = c^n theta,
/// with compensator c^n * jump_rate * mark_mean.
std::function<CoefficientSet(int)> constant_coefficients(ScalarFamily drift, ScalarFamily vol,
                                                         ScalarFamily jump_scale, double jump_rate,
                                                         double mark_mean);

enum class CrossingDirection {
    /// Hit when X >= h(t); phi = x - h(t).
    up,
    /// Hit when X <= h(t); phi = h(t) - x.
    down,
};

struct LevyBarrierParams {
    ScalarFamily drift = harmonic_family(0.0, 0.0);
    ScalarFamily vol = harmonic_family(1.0, 0.0);
    ScalarFamily jump_scale = harmonic_family(0.0, 0.0);
    ScalarFamily x0 = harmonic_family(0.0, 0.0);
    double jump_rate = 0.0;
    MarkLaw marks = unit_marks();
    /// h^n(t).
    std::function<double(int n, double t)> curve = [](int, double) { return 1.0; };
    CrossingDirection direction = CrossingDirection::up;
    double horizon = 1.0;
};

/// Levy processes X^n = x0^n + a^n t + b^n W + c^n Z crossing curves h^n on
/// [0, T), the barrier cut off at T. Throws ScenarioError when b^0 = 0.
ScenarioSequence levy_barrier(const LevyBarrierParams& params);

struct IntervalExitParams {
    std::function<CoefficientSet(int)> coefficients;
    JumpMeasureSpec jumps = JumpMeasureSpec::none();
    ScalarFamily left = harmonic_family(-1.0, 0.0);
    ScalarFamily right = harmonic_family(1.0, 0.0);
    ScalarFamily x0 = harmonic_family(0.0, 0.0);
    /// Simulation window; the barrier itself has no horizon.
    double horizon = 10.0;
    /// Indices whose start point is checked against (l^n, r^n), besides 0.
    std::vector<int> schedule{1, 4, 16, 64};
};

/// Exit from (l^n, r^n) for d = k = 1. The barrier is -(x - l^n)(r^n - x),
/// which is >= 0 outside the interval. Throws ScenarioError if a start point
/// lies outside its interval or b^0 is not positive on [l^0, r^0].
ScenarioSequence interval_exit(const IntervalExitParams& params);

struct LevyDrivenParams {
    std::size_t state_dim = 1;
    std::size_t wiener_dim = 1;
    std::function<Vector(int n, double t, const Vector& x)> drift;
    std::function<Matrix(int n, double t, const Vector& x)> diffusion;
    /// d x m gain applied to dZ.
    std::function<Matrix(int n, double t, const Vector& x)> jump_gain;
    std::function<Vector(int n)> x0;
    JumpMeasureSpec jumps = JumpMeasureSpec::none();
    /// Mean of the sampled marks (mu restricted to the sampled part, normalized).
    Vector mark_mean;
    std::function<BarrierFunction(int n)> barrier;
    double horizon = 1.0;
    SampleBox envelope_box{1.0, 2.0, 500, 0};
    std::uint64_t envelope_seed = 0;
};

/// dX = a dt + b dW + H(t, X(t-)) dZ with Z(t) = \int\int theta nu~. Rejects
/// (ScenarioError) a gain that fails the |H theta| <= |H| |theta| envelope check.
ScenarioSequence levy_driven(const LevyDrivenParams& params);

// Named templates used by the command-line front end.

struct ParamSpec {
    std::string name;
    std::string default_value;
    std::string description;
};

using ParamMap = std::map<std::string, std::string>;

/// What cmd_validate needs besides the sequence itself.
struct BuiltScenario {
    ScenarioSequence sequence;
    /// Whether the diffusion nondegeneracy check applies (false for
    /// deterministic templates).
    bool check_nondegeneracy = true;
    /// Sample only near phi = 0 when checking nondegeneracy.
    std::optional<double> boundary_band;
    std::optional<std::pair<EnvelopeStateFn, EnvelopeMarkFn>> envelope;
    SampleBox box;
};

struct ScenarioTemplate {
    std::string id;
    std::string summary;
    std::vector<ParamSpec> params;
    std::function<BuiltScenario(const ParamMap& params, double horizon,
                                const std::vector<int>& schedule)>
        build;
};

const std::vector<ScenarioTemplate>& scenario_templates();
/// Throws std::invalid_argument for an unknown id.
const ScenarioTemplate& find_template(const std::string& id);

}  // namespace jumpflow
