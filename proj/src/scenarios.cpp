#include "jumpflow/scenarios.hpp"

#include "jumpflow/hitting.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace jumpflow {

namespace {

Vector scalar(double v) {
    Vector out(1);
    out(0) = v;
    return out;
}

double parse_number(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(value)) {
        throw std::invalid_argument(what + ": expected a finite number, got '" + text + "'");
    }
    return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(item);
    return parts;
}

}  // namespace

MarkLaw unit_marks() {
    return {"unit", [](RngStream&) { return scalar(1.0); }, 1.0, 1.0};
}

MarkLaw symmetric_unit_marks() {
    return {"symmetric", [](RngStream& s) { return scalar(s.uniform() < 0.5 ? -1.0 : 1.0); }, 0.0, 1.0};
}

MarkLaw uniform_marks(double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("uniform marks: need lo < hi");
    return {"uniform",
            [lo, hi](RngStream& s) {
                double v = 0.0;
                do v = lo + (hi - lo) * s.uniform();
                while (v == 0.0);
                return scalar(v);
            },
            0.5 * (lo + hi), (lo * lo + lo * hi + hi * hi) / 3.0};
}

MarkLaw normal_marks(double mean, double sd) {
    if (!(sd > 0.0)) throw std::invalid_argument("normal marks: sd must be positive");
    return {"normal",
            [mean, sd](RngStream& s) {
                double v = 0.0;
                do v = mean + sd * s.normal();
                while (v == 0.0);
                return scalar(v);
            },
            mean, mean * mean + sd * sd};
}

MarkLaw exponential_marks(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential marks: rate must be positive");
    return {"exponential", [rate](RngStream& s) { return scalar(-std::log(s.uniform()) / rate); },
            1.0 / rate, 2.0 / (rate * rate)};
}

MarkLaw parse_mark_law(const std::string& text) {
    const auto parts = split(text, ':');
    const std::string kind = parts.empty() ? "" : parts[0];
    auto arg = [&](std::size_t i) { return parse_number(parts.at(i), "marks '" + text + "'"); };
    if (kind == "unit" && parts.size() == 1) return unit_marks();
    if (kind == "symmetric" && parts.size() == 1) return symmetric_unit_marks();
    if (kind == "uniform" && parts.size() == 3) return uniform_marks(arg(1), arg(2));
    if (kind == "normal" && parts.size() == 3) return normal_marks(arg(1), arg(2));
    if (kind == "exponential" && parts.size() == 2) return exponential_marks(arg(1));
    throw std::invalid_argument("unknown mark law '" + text +
                                "' (expected unit, symmetric, uniform:lo:hi, normal:mean:sd or "
                                "exponential:rate)");
}

JumpMeasureSpec compound_poisson(double rate, const MarkLaw& law) {
    if (rate == 0.0) return JumpMeasureSpec::none(1);
    return JumpMeasureSpec::finite(1, rate, law.sampler);
}

ScalarFamily harmonic_family(double limit, double rate) {
    return [limit, rate](int n) { return n == 0 ? limit : limit + rate / static_cast<double>(n); };
}

std::function<CoefficientSet(int)> constant_coefficients(ScalarFamily drift, ScalarFamily vol,
                                                         ScalarFamily jump_scale, double jump_rate,
                                                         double mark_mean) {
    return [=](int n) {
        const double a = drift(n);
        const double b = vol(n);
        const double c = jump_scale(n);
        const double mc = c * jump_rate * mark_mean;
        return CoefficientSet{
            1,
            1,
            1,
            [a](double, const Vector&) { return scalar(a); },
            [b](double, const Vector&) { return Matrix::Constant(1, 1, b); },
            [c](double, const Vector&, const Vector& mark) -> Vector { return c * mark; },
            [mc](double, const Vector&) { return scalar(mc); },
        };
    };
}

ScenarioSequence levy_barrier(const LevyBarrierParams& p) {
    if (p.vol(0) == 0.0) {
        throw ScenarioError("levy_barrier: (G3) nondegeneracy fails, b0 = 0 makes the limit diffusion degenerate");
    }
    if (!(p.horizon > 0.0)) throw ScenarioError("levy_barrier: horizon must be positive");
    ScenarioSequence seq;
    seq.id = "levy_barrier";
    seq.jumps = compound_poisson(p.jump_rate, p.marks);
    seq.coefficient_family = constant_coefficients(p.drift, p.vol, p.jump_scale, p.jump_rate, p.marks.mean);
    seq.initial_family = [x0 = p.x0](int n) { return scalar(x0(n)); };
    seq.horizon = p.horizon;
    const double sign = p.direction == CrossingDirection::up ? 1.0 : -1.0;
    seq.barrier_family = [curve = p.curve, sign, horizon = p.horizon](int n) {
        BarrierFunction phi(
            [curve, sign, n](double t, const Vector& x) { return sign * (x(0) - curve(n, t)); },
            [sign](double, const Vector&) { return scalar(sign); });
        return finite_horizon_wrap(phi, horizon);
    };
    return seq;
}

ScenarioSequence interval_exit(const IntervalExitParams& p) {
    if (!p.coefficients) throw ScenarioError("interval_exit: coefficients are required");
    if (!(p.horizon > 0.0)) throw ScenarioError("interval_exit: horizon must be positive");
    std::vector<int> indices{0};
    indices.insert(indices.end(), p.schedule.begin(), p.schedule.end());
    for (int n : indices) {
        const double l = p.left(n), r = p.right(n), x = p.x0(n);
        if (!(l < r)) throw ScenarioError("interval_exit: need l^n < r^n (n = " + std::to_string(n) + ")");
        if (!(l < x && x < r)) {
            throw ScenarioError("interval_exit: start point " + std::to_string(x) + " lies outside (" +
                                std::to_string(l) + ", " + std::to_string(r) + ") for n = " +
                                std::to_string(n));
        }
    }
    const CoefficientSet limit = p.coefficients(0);
    if (limit.state_dim != 1 || limit.wiener_dim != 1) {
        throw ScenarioError("interval_exit: requires d = k = 1");
    }
    const double l0 = p.left(0), r0 = p.right(0);
    for (int i = 0; i <= 32; ++i) {
        const double x = l0 + (r0 - l0) * i / 32.0;
        for (double t : {0.0, 0.5 * p.horizon, p.horizon}) {
            if (!(limit.diffusion(t, scalar(x))(0, 0) > 0.0)) {
                throw ScenarioError("interval_exit: (G3) b0 must be positive on [l0, r0]");
            }
        }
    }

    ScenarioSequence seq;
    seq.id = "interval_exit";
    seq.jumps = p.jumps;
    seq.coefficient_family = p.coefficients;
    seq.initial_family = [x0 = p.x0](int n) { return scalar(x0(n)); };
    seq.horizon = p.horizon;
    seq.barrier_family = [left = p.left, right = p.right](int n) {
        const double l = left(n), r = right(n);
        return BarrierFunction(
            [l, r](double, const Vector& x) { return -(x(0) - l) * (r - x(0)); },
            [l, r](double, const Vector& x) { return scalar(2.0 * x(0) - l - r); });
    };
    return seq;
}

ScenarioSequence levy_driven(const LevyDrivenParams& p) {
    if (!p.drift || !p.diffusion || !p.jump_gain || !p.x0) {
        throw ScenarioError("levy_driven: drift, diffusion, jump_gain and x0 are required");
    }
    const std::size_t m = p.jumps.mark_dim();
    const Vector mean = p.mark_mean.size() == 0 ? Vector::Zero(static_cast<Eigen::Index>(m)) : p.mark_mean;
    if (mean.size() != static_cast<Eigen::Index>(m)) {
        throw ScenarioError("levy_driven: mark_mean must have the mark dimension");
    }
    const double mass = p.jumps.sampled_mass();

    ScenarioSequence seq;
    seq.id = "levy_driven";
    seq.jumps = p.jumps;
    seq.horizon = p.horizon;
    seq.initial_family = p.x0;
    seq.barrier_family = p.barrier;
    seq.coefficient_family = [p, m, mean, mass](int n) {
        return CoefficientSet{
            p.state_dim,
            p.wiener_dim,
            m,
            [p, n](double t, const Vector& x) { return p.drift(n, t, x); },
            [p, n](double t, const Vector& x) { return p.diffusion(n, t, x); },
            [p, n](double t, const Vector& x, const Vector& mark) -> Vector {
                return p.jump_gain(n, t, x) * mark;
            },
            [p, n, mean, mass](double t, const Vector& x) -> Vector {
                return mass * (p.jump_gain(n, t, x) * mean);
            },
        };
    };

    const CoefficientSet limit = seq.limit();
    const auto gain = p.jump_gain;
    const ValidationReport envelope = check_small_jump_envelope(
        limit, p.jumps, [gain](double t, const Vector& x) { return operator_norm(gain(0, t, x)); },
        [](const Vector& mark) { return mark.norm(); }, p.envelope_box,
        make_stream(p.envelope_seed, 0, StreamRole::jump_marks));
    // The envelope holds with equality in exact arithmetic; allow rounding.
    if (envelope.estimate > 1e-9) {
        throw ScenarioError("levy_driven: (A4) envelope |c| <= |H| |theta| violated");
    }
    return seq;
}

namespace {

std::string param_or_default(const ParamMap& params, const std::vector<ParamSpec>& schema,
                             const std::string& name) {
    if (auto it = params.find(name); it != params.end()) return it->second;
    for (const auto& spec : schema) {
        if (spec.name == name) return spec.default_value;
    }
    throw std::logic_error("template parameter '" + name + "' has no schema entry");
}

struct Params {
    const ParamMap& values;
    const std::vector<ParamSpec>& schema;

    std::string text(const std::string& name) const { return param_or_default(values, schema, name); }
    double number(const std::string& name) const { return parse_number(text(name), "parameter '" + name + "'"); }
    ScalarFamily family(const std::string& limit, const std::string& rate) const {
        return harmonic_family(number(limit), number(rate));
    }
};

BarrierFunction level_barrier(double level, double sign, bool finite, double horizon) {
    BarrierFunction phi([level, sign](double, const Vector& x) { return sign * (x(0) - level); },
                        [sign](double, const Vector&) { return scalar(sign); });
    return finite ? finite_horizon_wrap(phi, horizon) : phi;
}

bool parse_finite_mode(const std::string& text) {
    if (text == "finite") return true;
    if (text == "infinite") return false;
    throw std::invalid_argument("horizon_mode must be 'finite' or 'infinite', got '" + text + "'");
}

std::vector<ParamSpec> closed_form_schema() {
    return {
        {"a0", "1", "limit drift a^0"},
        {"a_rate", "1", "a^n = a0 + a_rate / n"},
        {"x0", "0", "limit start point"},
        {"x0_rate", "0", "x0^n = x0 + x0_rate / n"},
        {"level", "1", "barrier level; hit when X >= level"},
        {"horizon_mode", "infinite", "finite (cut off at the horizon) or infinite"},
    };
}

std::vector<ParamSpec> levy_barrier_schema() {
    return {
        {"a0", "1", "limit drift"},
        {"a_rate", "2", "a^n = a0 + a_rate / n"},
        {"b0", "1", "limit volatility (must be nonzero)"},
        {"b_rate", "1", "b^n = b0 + b_rate / n"},
        {"c0", "0", "limit jump scale"},
        {"c_rate", "1", "c^n = c0 + c_rate / n"},
        {"x0", "0", "limit start point"},
        {"x0_rate", "0", "x0^n = x0 + x0_rate / n"},
        {"jump_rate", "1", "total jump intensity"},
        {"marks", "unit", "mark law"},
        {"level", "1", "barrier curve h(t) = level + level_slope t + level_rate / n"},
        {"level_slope", "0", "slope of the barrier curve"},
        {"level_rate", "0", "offset of h^n from h^0"},
        {"direction", "up", "up: hit when X >= h; down: hit when X <= h"},
    };
}

std::vector<ParamSpec> interval_exit_schema() {
    return {
        {"a0", "0", "limit drift"},
        {"a_rate", "0", "a^n = a0 + a_rate / n"},
        {"b0", "1", "limit volatility (must be positive)"},
        {"b_rate", "0", "b^n = b0 + b_rate / n"},
        {"c0", "0", "limit jump scale"},
        {"c_rate", "0", "c^n = c0 + c_rate / n"},
        {"jump_rate", "0", "total jump intensity"},
        {"marks", "unit", "mark law"},
        {"x0", "0", "limit start point"},
        {"x0_rate", "0", "x0^n = x0 + x0_rate / n"},
        {"left", "-1", "left end l^0"},
        {"left_rate", "1", "l^n = left - left_rate / n"},
        {"right", "1", "right end r^0"},
        {"right_rate", "1", "r^n = right + right_rate / n"},
        {"boundary_band", "0.5", "nondegeneracy is checked where |phi| <= band"},
    };
}

std::vector<ParamSpec> levy_driven_schema() {
    return {
        {"a0", "0", "limit drift"},
        {"a_rate", "0", "a^n = a0 + a_rate / n"},
        {"b0", "1", "limit volatility"},
        {"b_rate", "0", "b^n = b0 + b_rate / n"},
        {"h0", "1", "limit jump gain"},
        {"h_rate", "0", "h^n = h0 + h_rate / n"},
        {"x0", "0", "limit start point"},
        {"x0_rate", "0", "x0^n = x0 + x0_rate / n"},
        {"jump_rate", "2", "total jump intensity"},
        {"marks", "symmetric", "mark law"},
        {"level", "1", "barrier level; hit when X >= level"},
        {"horizon_mode", "finite", "finite or infinite"},
    };
}

SampleBox default_box(double horizon, double radius) {
    return SampleBox{horizon, radius, 400, 64};
}

}  // namespace

const std::vector<ScenarioTemplate>& scenario_templates() {
    static const std::vector<ScenarioTemplate> templates = [] {
        std::vector<ScenarioTemplate> out;

        out.push_back({"closed_form_drift",
                       "deterministic X^n(t) = x0^n + a^n t crossing a constant level",
                       closed_form_schema(),
                       [](const ParamMap& values, double horizon, const std::vector<int>&) {
                           static const auto schema = closed_form_schema();
                           const Params p{values, schema};
                           const double level = p.number("level");
                           const bool finite = parse_finite_mode(p.text("horizon_mode"));
                           BuiltScenario built;
                           ScenarioSequence& seq = built.sequence;
                           seq.id = "closed_form_drift";
                           seq.jumps = JumpMeasureSpec::none();
                           seq.horizon = horizon;
                           seq.coefficient_family = constant_coefficients(
                               p.family("a0", "a_rate"), harmonic_family(0.0, 0.0), harmonic_family(0.0, 0.0), 0.0, 0.0);
                           seq.initial_family = [x0 = p.family("x0", "x0_rate")](int n) { return scalar(x0(n)); };
                           seq.barrier_family = [level, finite, horizon](int) {
                               return level_barrier(level, 1.0, finite, horizon);
                           };
                           built.check_nondegeneracy = false;
                           built.box = default_box(horizon, std::max(2.0, std::abs(level) + 1.0));
                           return built;
                       }});

        out.push_back({"levy_barrier",
                       "Levy processes a^n t + b^n W + c^n Z crossing a curve before the horizon",
                       levy_barrier_schema(),
                       [](const ParamMap& values, double horizon, const std::vector<int>&) {
                           static const auto schema = levy_barrier_schema();
                           const Params p{values, schema};
                           LevyBarrierParams lp;
                           lp.drift = p.family("a0", "a_rate");
                           lp.vol = p.family("b0", "b_rate");
                           lp.jump_scale = p.family("c0", "c_rate");
                           lp.x0 = p.family("x0", "x0_rate");
                           lp.jump_rate = p.number("jump_rate");
                           lp.marks = parse_mark_law(p.text("marks"));
                           const double level = p.number("level");
                           const double slope = p.number("level_slope");
                           const double rate = p.number("level_rate");
                           lp.curve = [level, slope, rate](int n, double t) {
                               return level + slope * t + (n == 0 ? 0.0 : rate / n);
                           };
                           const std::string dir = p.text("direction");
                           if (dir != "up" && dir != "down") {
                               throw std::invalid_argument("direction must be 'up' or 'down'");
                           }
                           lp.direction = dir == "up" ? CrossingDirection::up : CrossingDirection::down;
                           lp.horizon = horizon;
                           BuiltScenario built;
                           built.sequence = levy_barrier(lp);
                           const double c0 = std::abs(p.number("c0"));
                           built.envelope = std::pair<EnvelopeStateFn, EnvelopeMarkFn>{
                               [c0](double, const Vector&) { return c0; },
                               [](const Vector& mark) { return mark.norm(); }};
                           built.box = default_box(horizon, std::max(2.0, std::abs(level) + 1.0));
                           return built;
                       }});

        out.push_back({"interval_exit",
                       "exit of a one-dimensional jump diffusion from (l^n, r^n)",
                       interval_exit_schema(),
                       [](const ParamMap& values, double horizon, const std::vector<int>& schedule) {
                           static const auto schema = interval_exit_schema();
                           const Params p{values, schema};
                           const double jump_rate = p.number("jump_rate");
                           const MarkLaw marks = parse_mark_law(p.text("marks"));
                           IntervalExitParams ip;
                           ip.coefficients = constant_coefficients(p.family("a0", "a_rate"), p.family("b0", "b_rate"),
                                                                   p.family("c0", "c_rate"), jump_rate, marks.mean);
                           ip.jumps = compound_poisson(jump_rate, marks);
                           ip.x0 = p.family("x0", "x0_rate");
                           const double left = p.number("left"), left_rate = p.number("left_rate");
                           const double right = p.number("right"), right_rate = p.number("right_rate");
                           ip.left = harmonic_family(left, -left_rate);
                           ip.right = harmonic_family(right, right_rate);
                           ip.horizon = horizon;
                           ip.schedule = schedule;
                           BuiltScenario built;
                           built.sequence = interval_exit(ip);
                           built.boundary_band = p.number("boundary_band");
                           const double c0 = std::abs(p.number("c0"));
                           built.envelope = std::pair<EnvelopeStateFn, EnvelopeMarkFn>{
                               [c0](double, const Vector&) { return c0; },
                               [](const Vector& mark) { return mark.norm(); }};
                           const double reach = std::max({std::abs(left), std::abs(right)}) +
                                                std::abs(left_rate) + std::abs(right_rate);
                           built.box = default_box(horizon, std::max(1.0, reach));
                           return built;
                       }});

        out.push_back({"levy_driven",
                       "dX = a dt + b dW + h dZ driven by a compensated compound Poisson Z",
                       levy_driven_schema(),
                       [](const ParamMap& values, double horizon, const std::vector<int>&) {
                           static const auto schema = levy_driven_schema();
                           const Params p{values, schema};
                           const MarkLaw marks = parse_mark_law(p.text("marks"));
                           const double jump_rate = p.number("jump_rate");
                           const ScalarFamily a = p.family("a0", "a_rate"), b = p.family("b0", "b_rate"), h = p.family("h0", "h_rate");
                           const ScalarFamily x0 = p.family("x0", "x0_rate");
                           const double level = p.number("level");
                           const bool finite = parse_finite_mode(p.text("horizon_mode"));
                           LevyDrivenParams lp;
                           lp.drift = [a](int n, double, const Vector&) { return scalar(a(n)); };
                           lp.diffusion = [b](int n, double, const Vector&) { return Matrix::Constant(1, 1, b(n)); };
                           lp.jump_gain = [h](int n, double, const Vector&) { return Matrix::Constant(1, 1, h(n)); };
                           lp.x0 = [x0](int n) { return scalar(x0(n)); };
                           lp.jumps = compound_poisson(jump_rate, marks);
                           lp.mark_mean = scalar(marks.mean);
                           lp.barrier = [level, finite, horizon](int) {
                               return level_barrier(level, 1.0, finite, horizon);
                           };
                           lp.horizon = horizon;
                           lp.envelope_box = SampleBox{horizon, 2.0, 200, 0};
                           BuiltScenario built;
                           built.sequence = levy_driven(lp);
                           const double h0 = std::abs(h(0));
                           built.envelope = std::pair<EnvelopeStateFn, EnvelopeMarkFn>{
                               [h0](double, const Vector&) { return h0; },
                               [](const Vector& mark) { return mark.norm(); }};
                           built.check_nondegeneracy = b(0) != 0.0;
                           built.box = default_box(horizon, std::max(2.0, std::abs(level) + 1.0));
                           return built;
                       }});
        return out;
    }();
    return templates;
}

const ScenarioTemplate& find_template(const std::string& id) {
    for (const auto& t : scenario_templates()) {
        if (t.id == id) return t;
    }
    std::string known;
    for (const auto& t : scenario_templates()) known += (known.empty() ? "" : ", ") + t.id;
    throw std::invalid_argument("unknown scenario '" + id + "' (known: " + known + ")");
}

}  // namespace jumpflow
