#include "kitamp/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kitamp/errors.hpp"
#include "kitamp/units.hpp"

namespace kitamp {

namespace {
constexpr double kTraceTolerance = 1e-12;
constexpr double kUnimodularTolerance = 1e-6;
}  // namespace

BlochDispersion::BlochDispersion(FrequencyGrid grid, std::vector<BlochPoint> points, double period)
    : grid_(std::move(grid)), points_(std::move(points)), period_(period) {
    if (grid_.size() != points_.size()) throw AlignmentError("BlochDispersion: size mismatch");
}

BlochDispersion BlochDispersion::linear(const FrequencyGrid& grid, double phase_velocity, double period) {
    std::vector<BlochPoint> pts(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) pts[k] = {angular(grid[k]) / phase_velocity, 0.0, false};
    return BlochDispersion(grid, std::move(pts), period);
}

std::size_t BlochDispersion::bracket(double f) const {
    const auto& p = grid_.points;
    if (p.empty() || f < p.front() || f > p.back()) {
        std::ostringstream os;
        os << "dispersion: frequency " << f << " Hz lies outside the tabulated grid";
        throw DomainError(os.str());
    }
    auto it = std::upper_bound(p.begin(), p.end(), f);
    std::size_t hi = static_cast<std::size_t>(it - p.begin());
    if (hi >= p.size()) hi = p.size() - 1;
    return hi == 0 ? 1 : hi;
}

bool BlochDispersion::in_stopband_at(double f) const {
    if (grid_.size() == 1) return points_[0].in_stopband;
    std::size_t hi = bracket(f);
    return points_[hi - 1].in_stopband || points_[hi].in_stopband;
}

double BlochDispersion::wavenumber_at(double f) const {
    if (grid_.size() == 1) {
        if (f != grid_[0]) throw DomainError("dispersion: single-point table");
        return points_[0].wavenumber;
    }
    std::size_t hi = bracket(f);
    if (points_[hi - 1].in_stopband || points_[hi].in_stopband) {
        std::ostringstream os;
        os << "frequency " << f << " Hz lies in a stopband";
        throw StopbandError(os.str(), f);
    }
    double f0 = grid_[hi - 1], f1 = grid_[hi];
    double t = (f - f0) / (f1 - f0);
    return points_[hi - 1].wavenumber + t * (points_[hi].wavenumber - points_[hi - 1].wavenumber);
}

std::vector<Stopband> BlochDispersion::stopbands() const {
    std::vector<Stopband> out;
    for (std::size_t k = 0; k < points_.size(); ++k) {
        if (!points_[k].in_stopband) continue;
        std::size_t j = k;
        while (j + 1 < points_.size() && points_[j + 1].in_stopband) ++j;
        out.push_back({grid_[k], grid_[j]});
        k = j;
    }
    return out;
}

BlochDispersion bloch_dispersion(const TwoPortChain& supercell, double supercell_length) {
    if (!(supercell_length > 0.0)) throw DomainError("bloch_dispersion: supercell_length must be > 0");
    const auto& grid = supercell.grid();
    std::vector<BlochPoint> pts(grid.size());

    double prev = 0.0;     // k*L at the previous point
    double slope = 0.0;    // d(kL)/df estimate, for branch prediction
    double prev_f = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto& m = supercell[k];
        if (std::abs(m.determinant() - 1.0) > kUnimodularTolerance) {
            std::ostringstream os;
            os << "bloch_dispersion: supercell ABCD is not unimodular at index " << k << " (|det - 1| = "
               << std::abs(m.determinant() - 1.0) << ")";
            throw DomainError(os.str());
        }
        const double t = 0.5 * (m(0, 0) + m(1, 1)).real();
        const double f = grid[k];
        const double predicted = prev + slope * (f - prev_f);
        double phase;
        double atten = 0.0;
        bool stop = std::abs(t) > 1.0 + kTraceTolerance;
        if (stop) {
            // Real part pinned to the nearest multiple of pi with matching
            // parity: even multiples where t > 1, odd where t < -1.
            double parity = t > 0.0 ? 0.0 : 1.0;
            double n = std::round((std::max(predicted, prev) / constants::pi - parity) / 2.0);
            phase = (2.0 * n + parity) * constants::pi;
            if (phase < prev - 1e-9) phase += 2.0 * constants::pi;
            atten = std::acosh(std::abs(t)) / supercell_length;
        } else {
            const double p = std::acos(std::clamp(t, -1.0, 1.0));
            // Candidates 2 j pi +/- p; keep those not behind the previous
            // value and take the one closest to the linear prediction.
            double best = std::numeric_limits<double>::infinity();
            double best_dist = std::numeric_limits<double>::infinity();
            const double j0 = std::floor(prev / (2.0 * constants::pi));
            for (double j = j0 - 1.0; j <= j0 + 2.0; j += 1.0) {
                for (double cand : {2.0 * j * constants::pi + p, 2.0 * j * constants::pi - p}) {
                    if (cand < prev - 1e-9) continue;
                    double dist = std::abs(cand - predicted);
                    if (dist < best_dist) {
                        best_dist = dist;
                        best = cand;
                    }
                }
            }
            phase = best;
        }
        if (k > 0 && f > prev_f) slope = (phase - prev) / (f - prev_f);
        if (k == 0) slope = phase / f;
        pts[k] = {phase / supercell_length, atten, stop};
        prev = phase;
        prev_f = f;
    }
    return BlochDispersion(grid, std::move(pts), supercell_length);
}

}  // namespace kitamp
