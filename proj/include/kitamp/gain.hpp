#pragma once

// Three-wave-mixing parametric gain in a dispersion-engineered kinetic
// inductance line.
//
// The medium is treated as an effective homogeneous line whose wavenumber
// k(f) is the Bloch wavenumber of the supercell. Envelopes are current
// amplitudes (A); with dk = k_p - k_s - k_i the implemented equations are
//
//   dA_p/dx = i k_p eps/4 A_s A_i e^{-i dk x} + i k_p xi/8 (|A_p|^2 + 2|A_s|^2 + 2|A_i|^2) A_p
//   dA_s/dx = i k_s eps/4 A_p A_i* e^{+i dk x} + i k_s xi/8 (|A_s|^2 + 2|A_p|^2 + 2|A_i|^2) A_s
//   dA_i/dx = i k_i eps/4 A_p A_s* e^{+i dk x} + i k_i xi/8 (|A_i|^2 + 2|A_p|^2 + 2|A_s|^2) A_i
//
// The xi terms are self/cross phase modulation and can be switched off. In
// undepleted mode the mixing term of the pump equation is dropped. With
// phase matching, no phase modulation and an undepleted pump, the signal
// power gain is cosh^2(g L) with g = eps I_p sqrt(k_s k_i) / 4.
//
// The photon fluxes n_j = |A_j|^2 / k_j obey n_s - n_i = const and
// n_p + n_s = const (Manley-Rowe).

#include <cstddef>
#include <limits>
#include <vector>

#include "json.hpp"
#include "kitamp/csv.hpp"
#include "kitamp/dispersion.hpp"
#include "kitamp/network.hpp"
#include "kitamp/nonlinearity.hpp"

namespace kitamp {

struct PumpSpec {
    double frequency;          // Hz
    double current_amplitude;  // A

    /// Matched z0 embedding: I_p = sqrt(2 P / z0).
    static PumpSpec from_power_dbm(double frequency, double dbm, double z0 = 50.0);
    double power_dbm(double z0 = 50.0) const;
};

struct Medium {
    SupercellSpec supercell;
    FilmSpec film;
    double i_dc;  // A
};

/// Medium ready for coupled-mode integration: tabulated dispersion, mixing
/// coefficients and length.
class MediumModel {
public:
    /// Dispersion tabulated on `points` grid points up to `f_max`. The line
    /// inductance is renormalised by L_k(I_dc) / L_dc.
    MediumModel(const Medium& medium, double f_max, std::size_t points = 20001);

    /// Uniform, exactly linear-dispersion line. No operating-point limit.
    static MediumModel dispersionless(double length, double phase_velocity, MixingCoefficients mixing,
                                      double f_max, std::size_t output_points = 101);

    const BlochDispersion& dispersion() const { return dispersion_; }
    double length() const { return length_; }
    const MixingCoefficients& mixing() const { return mixing_; }
    double i_dc() const { return i_dc_; }
    double i_critical() const { return i_critical_; }
    std::size_t output_points() const { return output_points_; }

    MediumModel with_length(double length, std::size_t output_points) const;

private:
    MediumModel() = default;

    BlochDispersion dispersion_;
    double length_ = 0.0;
    MixingCoefficients mixing_{0.0, 0.0};
    double i_dc_ = 0.0;
    double i_critical_ = std::numeric_limits<double>::infinity();
    std::size_t output_points_ = 2;
};

/// dk = k(f_p) - k(f_s) - k(f_p - f_s), rad/m. Requires 0 < f_signal < f_pump.
double phase_mismatch(const BlochDispersion& dispersion, double f_pump, double f_signal);

struct CmeOptions {
    bool depleted_pump = true;
    bool phase_modulation = true;
    double rtol = 1e-8;
    double max_step = std::numeric_limits<double>::infinity();
    /// Input signal amplitude as a fraction of the pump amplitude (or in A
    /// when the pump is off).
    double signal_fraction = 1e-6;
};

struct CmeSolution {
    double f_pump = 0.0, f_signal = 0.0, f_idler = 0.0;
    double k_pump = 0.0, k_signal = 0.0, k_idler = 0.0;
    double phase_mismatch = 0.0;
    std::vector<double> positions;
    std::vector<cdouble> pump, signal, idler;
    std::size_t steps = 0;

    double gain() const;     // |A_s(L)|^2 / |A_s(0)|^2
    double gain_db() const;
    /// Largest deviation of the Manley-Rowe invariants along x, relative to
    /// the signal flux (and, with a depleted pump, the pump flux).
    double manley_rowe_drift() const;
};

CmeSolution solve_3wm(const MediumModel& medium, const PumpSpec& pump, double f_signal,
                      const CmeOptions& options = {});

struct GainProfile {
    FrequencyGrid grid;
    std::vector<double> on_off_gain;       // dB
    std::vector<double> off_transmission;  // dB, <= 0
    std::vector<double> true_gain;         // dB
    std::vector<bool> valid;               // false in stopbands / beyond the pump

    /// Builds the profile from on/off gain and off-state transmission, both dB.
    static GainProfile from_on_off(FrequencyGrid grid, std::vector<double> on_off_db,
                                   std::vector<double> off_transmission_db);
};

/// On/off gain from solve_3wm at every grid point; true = on/off + off (dB).
GainProfile gain_profile(const MediumModel& medium, const PumpSpec& pump, const FrequencyGrid& grid,
                         const std::vector<double>& off_transmission_db, const CmeOptions& options = {});

struct BandSummary {
    double lower = 0.0, upper = 0.0;  // Hz, linearly interpolated edges
    double peak_db = 0.0;
    double peak_frequency = 0.0;
    double median_true_gain_db = 0.0;
    double median_on_off_gain_db = 0.0;
    std::size_t points_in_band = 0;
    double width() const { return upper - lower; }
};

/// Widest contiguous interval with true gain >= peak - 3 dB. ShapeError when
/// the maximum is reached only at the grid ends.
BandSummary bandwidth_3db(const GainProfile& profile);

/// Peak on/off gain over `grid` for pump amplitude `i_p`.
double peak_gain_db(const MediumModel& medium, double f_pump, double i_p, const FrequencyGrid& grid,
                    const CmeOptions& options = {});

/// Bisection on the pump amplitude in (0, i_max] for peak on/off gain equal to
/// `target_db`. Throws DomainError if i_max cannot reach the target.
double tune_pump_amplitude(const MediumModel& medium, double f_pump, const FrequencyGrid& grid, double target_db,
                           double i_max, const CmeOptions& options = {}, double tolerance_db = 0.01);

/// Smooth stand-in for a measured profile: true gain is a parabola in
/// frequency with the given peak and 3 dB width.
std::vector<double> parabolic_gain_db(const FrequencyGrid& grid, double center, double width_3db, double peak_db);

CsvTable gain_profile_to_csv(const GainProfile& profile);
GainProfile gain_profile_from_csv(const CsvTable& table);
nlohmann::json band_summary_json(const BandSummary& band);

}  // namespace kitamp
