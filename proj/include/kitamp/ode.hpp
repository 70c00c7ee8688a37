#pragma once

// Embedded Dormand-Prince 5(4) integrator for complex state vectors, with
// PI step-size control and output at caller-chosen abscissae.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "kitamp/errors.hpp"

namespace kitamp {

struct OdeOptions {
    double rtol = 1e-8;
    /// Absolute tolerance per component; empty means rtol * 1e-3 * |y0_i|
    /// (or rtol * 1e-3 of the largest |y0| for components that start at 0).
    std::vector<double> atol;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0;  // 0: pick from the derivative scale
    std::size_t max_steps = 2'000'000;
};

struct OdeStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t evaluations = 0;
    double smallest_step = std::numeric_limits<double>::infinity();
};

template <class Rhs>
class DormandPrince {
public:
    using State = Eigen::VectorXcd;

    DormandPrince(Rhs rhs, OdeOptions options) : rhs_(std::move(rhs)), opt_(std::move(options)) {}

    /// Integrates from outputs.front() to outputs.back(); returns the state at
    /// every output abscissa (strictly increasing, first = start point).
    std::vector<State> integrate(const State& y0, std::span<const double> outputs) {
        if (outputs.empty()) return {};
        std::vector<State> result;
        result.reserve(outputs.size());
        result.push_back(y0);

        setup_tolerances(y0);
        State y = y0;
        double x = outputs.front();
        State k1 = eval(x, y);
        double h = opt_.initial_step > 0.0 ? opt_.initial_step : initial_step(x, y, k1, outputs.back() - x);
        double err_prev = 1e-4;

        for (std::size_t o = 1; o < outputs.size(); ++o) {
            const double target = outputs[o];
            while (x < target) {
                if (stats_.accepted + stats_.rejected >= opt_.max_steps) fail("step budget exhausted", x, h);
                h = std::min({h, opt_.max_step, target - x});
                bool last = h >= target - x;
                State y_new, k_last, err_vec;
                step(x, y, k1, h, y_new, k_last, err_vec);
                double err = error_norm(y, y_new, err_vec);
                if (!std::isfinite(err)) {
                    ++stats_.rejected;
                    h *= 0.25;
                    if (h < 1e-14 * std::max(1.0, std::abs(x))) fail("non-finite derivative", x, h);
                    continue;
                }
                if (err <= 1.0) {
                    ++stats_.accepted;
                    stats_.smallest_step = std::min(stats_.smallest_step, h);
                    x = last ? target : x + h;
                    y = std::move(y_new);
                    k1 = std::move(k_last);  // FSAL
                    double fac = 0.9 * std::pow(err, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
                    if (err == 0.0) fac = 5.0;
                    h *= std::clamp(fac, 0.2, 5.0);
                    err_prev = std::max(err, 1e-4);
                } else {
                    ++stats_.rejected;
                    h *= std::max(0.2, 0.9 * std::pow(err, -1.0 / 5.0));
                    if (h < 1e-14 * std::max(1.0, std::abs(x))) fail("step size underflow", x, h);
                }
            }
            result.push_back(y);
        }
        return result;
    }

    const OdeStats& stats() const { return stats_; }

private:
    State eval(double x, const State& y) {
        ++stats_.evaluations;
        return rhs_(x, y);
    }

    void setup_tolerances(const State& y0) {
        const auto n = static_cast<std::size_t>(y0.size());
        if (opt_.atol.size() == n) {
            atol_ = opt_.atol;
            return;
        }
        double largest = y0.cwiseAbs().maxCoeff();
        if (largest == 0.0) largest = 1.0;
        atol_.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double mag = std::abs(y0[static_cast<Eigen::Index>(i)]);
            atol_[i] = opt_.rtol * 1e-3 * (mag > 0.0 ? mag : largest);
        }
    }

    double error_norm(const State& y, const State& y_new, const State& err) const {
        double worst = 0.0;
        for (Eigen::Index i = 0; i < err.size(); ++i) {
            double sc = atol_[static_cast<std::size_t>(i)] + opt_.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
            worst = std::max(worst, std::abs(err[i]) / sc);
        }
        return worst;
    }

    double initial_step(double x, const State& y, const State& f0, double span) {
        double d0 = 0.0, d1 = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            double sc = atol_[static_cast<std::size_t>(i)] + opt_.rtol * std::abs(y[i]);
            d0 = std::max(d0, std::abs(y[i]) / sc);
            d1 = std::max(d1, std::abs(f0[i]) / sc);
        }
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
        h0 = std::min(h0, span);
        State y1 = y + h0 * f0;
        State f1 = eval(x + h0, y1);
        double d2 = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            double sc = atol_[static_cast<std::size_t>(i)] + opt_.rtol * std::abs(y[i]);
            d2 = std::max(d2, std::abs(f1[i] - f0[i]) / sc / h0);
        }
        double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6 * span, h0 * 1e-3)
                                              : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
        return std::min({100.0 * h0, h1, span});
    }

    void step(double x, const State& y, const State& k1, double h, State& y_new, State& k7, State& err) {
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                                a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                                a65 = -5103.0 / 18656;
        static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                                b6 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                                e6 = 22.0 / 525, e7 = -1.0 / 40;
        State k2 = eval(x + c2 * h, y + h * (a21 * k1));
        State k3 = eval(x + c3 * h, y + h * (a31 * k1 + a32 * k2));
        State k4 = eval(x + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        State k5 = eval(x + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        State k6 = eval(x + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        k7 = eval(x + h, y_new);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    }

    [[noreturn]] void fail(const char* why, double x, double h) const {
        std::ostringstream os;
        os << "ODE integration failed: " << why << " at x = " << x << " (h = " << h << ", accepted "
           << stats_.accepted << ", rejected " << stats_.rejected << " steps)";
        throw NumericalError(os.str());
    }

    Rhs rhs_;
    OdeOptions opt_;
    std::vector<double> atol_;
    OdeStats stats_;
};

}  // namespace kitamp
