#include "kitamp/lsq.hpp"

#include <algorithm>
#include <cmath>

namespace kitamp {

namespace {

bool finite(double v) { return std::isfinite(v); }

double sine_to_unit(double x) { return 0.5 * (1.0 + std::sin(x)); }

double unit_to_sine(double u) { return std::asin(std::clamp(2.0 * u - 1.0, -1.0, 1.0)); }

}  // namespace

double BoundedParameter::to_external(double x) const {
    const bool lo = finite(lower), hi = finite(upper);
    if (lo && hi) {
        if (log_scale && lower > 0.0) {
            const double a = std::log(lower), b = std::log(upper);
            return std::exp(a + (b - a) * sine_to_unit(x));
        }
        return lower + (upper - lower) * sine_to_unit(x);
    }
    if (lo) return log_scale ? lower + std::exp(x) : lower + x * x;
    if (hi) return log_scale ? upper - std::exp(x) : upper - x * x;
    return x;
}

double BoundedParameter::to_internal(double p) const {
    const bool lo = finite(lower), hi = finite(upper);
    if (lo && hi) {
        if (log_scale && lower > 0.0) {
            const double a = std::log(lower), b = std::log(upper);
            return unit_to_sine((std::log(p) - a) / (b - a));
        }
        return unit_to_sine((p - lower) / (upper - lower));
    }
    if (lo) return log_scale ? std::log(std::max(p - lower, 1e-300)) : std::sqrt(std::max(p - lower, 0.0));
    if (hi) return log_scale ? std::log(std::max(upper - p, 1e-300)) : std::sqrt(std::max(upper - p, 0.0));
    return p;
}

double BoundedParameter::derivative(double x) const {
    const bool lo = finite(lower), hi = finite(upper);
    if (lo && hi) {
        if (log_scale && lower > 0.0) {
            const double a = std::log(lower), b = std::log(upper);
            return to_external(x) * (b - a) * 0.5 * std::cos(x);
        }
        return (upper - lower) * 0.5 * std::cos(x);
    }
    if (lo) return log_scale ? std::exp(x) : 2.0 * x;
    if (hi) return log_scale ? -std::exp(x) : -2.0 * x;
    return 1.0;
}

bool BoundedParameter::at_bound(double p, double rel_tol) const {
    auto near = [&](double b) {
        const double scale = std::max({std::abs(b), std::abs(p), 1.0});
        return std::abs(p - b) <= rel_tol * scale;
    };
    return (finite(lower) && near(lower)) || (finite(upper) && near(upper));
}

LsqResult levenberg_marquardt(const ResidualFunction& f, Eigen::VectorXd x, const LsqOptions& opt) {
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    const Eigen::Index n = x.size();

    LsqResult res;
    VectorXd r;
    MatrixXd J;
    f(x, r, &J);
    ++res.evaluations;
    const Eigen::Index m = r.size();
    double cost = 0.5 * r.squaredNorm();
    if (!finite(cost)) {
        res.x = x;
        res.residual = r;
        res.jacobian = J;
        res.cost = cost;
        res.message = "non-finite residual at the starting point";
        return res;
    }

    VectorXd diag = VectorXd::Ones(n);
    double lambda = opt.initial_lambda;
    VectorXd r_trial;
    MatrixXd aug(m + n, n);
    VectorXd rhs(m + n);

    for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
        for (Eigen::Index j = 0; j < n; ++j) diag(j) = std::max(diag(j), J.col(j).norm());

        const VectorXd grad = J.transpose() * r;
        double gscaled = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
            if (diag(j) > 0.0) gscaled = std::max(gscaled, std::abs(grad(j)) / diag(j));
        if (cost == 0.0 || gscaled <= opt.gtol * std::max(std::sqrt(2.0 * cost), 1e-300)) {
            res.converged = true;
            res.message = "gradient tolerance reached";
            break;
        }

        bool accepted = false;
        bool small_step = false;
        for (int inner = 0; inner < 60; ++inner) {
            aug.topRows(m) = J;
            aug.bottomRows(n) = (std::sqrt(lambda) * diag).asDiagonal();
            rhs.head(m) = -r;
            rhs.tail(n).setZero();
            const VectorXd step = aug.colPivHouseholderQr().solve(rhs);
            const VectorXd x_trial = x + step;
            f(x_trial, r_trial, nullptr);
            ++res.evaluations;
            const double trial = 0.5 * r_trial.squaredNorm();
            if (finite(trial) && trial < cost) {
                const double reduction = (cost - trial) / cost;
                const double predicted = (cost - 0.5 * (r + J * step).squaredNorm()) / cost;
                small_step = step.norm() <= opt.xtol * (x.norm() + opt.xtol);
                x = x_trial;
                r = r_trial;
                f(x, r, &J);
                ++res.evaluations;
                cost = 0.5 * r.squaredNorm();
                lambda = std::max(lambda * 0.3, 1e-12);
                accepted = true;
                if ((reduction <= opt.ftol && predicted <= opt.ftol) || small_step) {
                    res.converged = true;
                    res.message = reduction <= opt.ftol ? "cost tolerance reached" : "step tolerance reached";
                }
                break;
            }
            if (step.norm() <= opt.xtol * (x.norm() + opt.xtol)) {
                small_step = true;
                break;
            }
            lambda *= 4.0;
        }
        if (res.converged) {
            ++res.iterations;
            break;
        }
        if (!accepted) {
            // No descent available at any damping: a stationary point to
            // working precision.
            res.converged = small_step;
            res.message = small_step ? "no further decrease at minimal step" : "damping exhausted without decrease";
            break;
        }
    }
    if (res.iterations >= opt.max_iterations && !res.converged) res.message = "iteration limit reached";

    res.x = x;
    res.residual = r;
    res.jacobian = J;
    res.cost = cost;
    return res;
}

}  // namespace kitamp
