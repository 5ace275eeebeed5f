#pragma once

#include "jumpflow/types.hpp"

#include <functional>
#include <limits>
#include <optional>

namespace jumpflow {

using BarrierFn = std::function<double(double t, const Vector& x)>;
using BarrierGradientFn = std::function<Vector(double t, const Vector& x)>;

enum class HorizonMode { finite, infinite };

/*
 * A level function phi(t, x); the process "hits" when phi(t, X(t)) >= 0.
 *
 * In finite mode the function is cut off at the horizon: value(t, x) is
 * phi(t, x) for t < horizon and 0 from the horizon on, so every path is
 * stopped no later than the horizon. raw() always evaluates the underlying
 * callable.
 */
class BarrierFunction {
public:
    BarrierFunction() = default;
    explicit BarrierFunction(BarrierFn phi, std::optional<BarrierGradientFn> gradient = {});

    HorizonMode mode() const { return mode_; }
    bool is_finite() const { return mode_ == HorizonMode::finite; }
    /// Cut-off time in finite mode; +infinity otherwise.
    double horizon() const { return horizon_; }

    double value(double t, const Vector& x) const;
    double raw(double t, const Vector& x) const { return phi_(t, x); }

    bool has_analytic_gradient() const { return gradient_.has_value(); }
    /// D_x phi; central differences with relative step 1e-6 if no analytic
    /// gradient was supplied.
    Vector gradient(double t, const Vector& x) const;
    Vector finite_difference_gradient(double t, const Vector& x) const;

    explicit operator bool() const { return static_cast<bool>(phi_); }

    /// Finite-mode copy cut off at `horizon`.
    BarrierFunction truncated_at(double horizon) const;

private:
    BarrierFn phi_;
    std::optional<BarrierGradientFn> gradient_;
    HorizonMode mode_ = HorizonMode::infinite;
    double horizon_ = std::numeric_limits<double>::infinity();
};

}  // namespace jumpflow
