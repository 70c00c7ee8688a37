#pragma once

// Bloch dispersion of a periodic line from the trace of its unit-cell ABCD
// matrix: cos(k L) = (A + D) / 2.

#include <cstddef>
#include <vector>

#include "kitamp/network.hpp"

namespace kitamp {

struct BlochPoint {
    double wavenumber;   // rad/m, real part, continuous from dc
    double attenuation;  // Np/m, nonzero only inside stopbands
    bool in_stopband;
};

struct Stopband {
    double lower;  // Hz, first flagged grid point
    double upper;  // Hz, last flagged grid point
    double center() const { return 0.5 * (lower + upper); }
};

class BlochDispersion {
public:
    BlochDispersion() = default;
    BlochDispersion(FrequencyGrid grid, std::vector<BlochPoint> points, double period);

    /// Exactly linear dispersion k = 2 pi f / v (used for dispersionless media).
    static BlochDispersion linear(const FrequencyGrid& grid, double phase_velocity, double period);

    const FrequencyGrid& grid() const { return grid_; }
    const std::vector<BlochPoint>& points() const { return points_; }
    double period() const { return period_; }

    /// Linear interpolation of the real wavenumber. Throws StopbandError if
    /// either bracketing grid point is flagged, DomainError off-grid.
    double wavenumber_at(double frequency) const;
    bool in_stopband_at(double frequency) const;

    /// Contiguous runs of flagged grid points.
    std::vector<Stopband> stopbands() const;

private:
    std::size_t bracket(double frequency) const;

    FrequencyGrid grid_;
    std::vector<BlochPoint> points_;
    double period_ = 0.0;
};

/// Requires det(ABCD) = 1 within 1e-6 at every point (PreconditionError is a
/// DomainError). Stopbands are where |(A+D)/2| > 1.
BlochDispersion bloch_dispersion(const TwoPortChain& supercell, double supercell_length);

}  // namespace kitamp
