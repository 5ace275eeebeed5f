#include "jumpflow/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jumpflow {

BarrierFunction::BarrierFunction(BarrierFn phi, std::optional<BarrierGradientFn> gradient)
    : phi_(std::move(phi)), gradient_(std::move(gradient)) {
    if (!phi_) throw std::invalid_argument("BarrierFunction: phi is required");
}

double BarrierFunction::value(double t, const Vector& x) const {
    if (mode_ == HorizonMode::finite && t >= horizon_) return 0.0;
    return phi_(t, x);
}

Vector BarrierFunction::gradient(double t, const Vector& x) const {
    if (gradient_) return (*gradient_)(t, x);
    return finite_difference_gradient(t, x);
}

Vector BarrierFunction::finite_difference_gradient(double t, const Vector& x) const {
    Vector grad(x.size());
    Vector probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
        probe(i) = x(i) + h;
        const double up = phi_(t, probe);
        probe(i) = x(i) - h;
        const double down = phi_(t, probe);
        probe(i) = x(i);
        grad(i) = (up - down) / (2.0 * h);
    }
    return grad;
}

BarrierFunction BarrierFunction::truncated_at(double horizon) const {
    if (!(horizon > 0.0)) throw std::invalid_argument("truncated_at: horizon must be positive");
    BarrierFunction out = *this;
    out.mode_ = HorizonMode::finite;
    out.horizon_ = std::min(horizon, horizon_);
    return out;
}

}  // namespace jumpflow
