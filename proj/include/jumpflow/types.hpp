#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace jumpflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a coefficient, barrier or state evaluates to NaN or infinity.
class NonFiniteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by scenario builders when the requested parameters violate a
/// structural premise (degenerate diffusion, start outside the domain, ...).
class ScenarioError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace jumpflow
