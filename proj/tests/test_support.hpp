#pragma once

#include "jumpflow/model.hpp"
#include "jumpflow/scenarios.hpp"

#include <cmath>

namespace jumpflow::testing {

inline Vector scalar(double v) {
    return Vector::Constant(1, v);
}

/// d = k = m = 1 coefficients from plain scalar functions of (t, x).
inline CoefficientSet scalar_sde(std::function<double(double, double)> a, std::function<double(double, double)> b,
                                 std::function<double(double, double, double)> c = nullptr,
                                 std::function<double(double, double)> mc = nullptr) {
    CoefficientSet cs = CoefficientSet::zero(1, 1, 1);
    cs.drift = [a](double t, const Vector& x) { return scalar(a(t, x(0))); };
    cs.diffusion = [b](double t, const Vector& x) { return Matrix::Constant(1, 1, b(t, x(0))); };
    if (c) cs.jump = [c](double t, const Vector& x, const Vector& th) { return scalar(c(t, x(0), th(0))); };
    if (mc) cs.compensator = [mc](double t, const Vector& x) { return scalar(mc(t, x(0))); };
    return cs;
}

/// Sequence whose every member uses `family(n)` and starts at x0.
inline ScenarioSequence scalar_sequence(std::function<CoefficientSet(int)> family, JumpMeasureSpec jumps,
                                        double x0, double horizon) {
    ScenarioSequence seq;
    seq.id = "test";
    seq.jumps = std::move(jumps);
    seq.coefficient_family = std::move(family);
    seq.initial_family = [x0](int) { return scalar(x0); };
    seq.horizon = horizon;
    return seq;
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double standard_error(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace jumpflow::testing
