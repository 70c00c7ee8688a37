#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace kitamp {

/// Maps an unconstrained internal coordinate onto a bounded parameter.
///
/// The mapping is chosen from the bounds: a sine map when both ends are
/// finite (taken in log space for positive `log_scale` parameters), an
/// exponential or quadratic map for a single finite end, and the identity
/// when unbounded. Bounds are therefore enforced by construction.
struct BoundedParameter {
    double lower = -INFINITY;
    double upper = INFINITY;
    bool log_scale = false;

    double to_external(double internal) const;
    double to_internal(double external) const;
    /// d external / d internal
    double derivative(double internal) const;
    bool at_bound(double external, double rel_tol = 1e-6) const;
};

struct LsqOptions {
    int max_iterations = 1000;
    double ftol = 1e-10;  // actual and predicted relative cost reduction
    double xtol = 1e-12;  // relative step in internal coordinates
    double gtol = 1e-12;  // scaled gradient, relative to |r|
    double initial_lambda = 1e-3;
};

struct LsqResult {
    Eigen::VectorXd x;         // internal coordinates
    Eigen::VectorXd residual;
    Eigen::MatrixXd jacobian;  // d residual / d x at the solution
    double cost = 0.0;         // 0.5 |r|^2
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    std::string message;
};

/// Fills r (and J when non-null) at x.
using ResidualFunction = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* J)>;

/// Levenberg-Marquardt with Marquardt diagonal scaling; the damped step is
/// solved as an augmented least-squares problem by QR.
LsqResult levenberg_marquardt(const ResidualFunction& f, Eigen::VectorXd x0, const LsqOptions& options = {});

}  // namespace kitamp
