#pragma once

// SNTJ noise calibration: synthetic sweeps and the bounded three-parameter
// fit of output power against junction bias.
//
// Model, per sweep point:
//   P(V) = G_sys [N(V, f_s) + r N(V, f_i) + N_ex] h f_s B
// with N the junction noise in quanta, r the idler/signal gain ratio and B
// the resolution bandwidth.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "kitamp/csv.hpp"

namespace kitamp {

struct FitParams {
    double g_sys = 1.0;      // linear
    double asymmetry = 1.0;  // G~1^i / G~1^s
    double n_ex = 0.0;       // quanta
};

struct NoiseSweep {
    double frequency = 0.0;        // signal, Hz
    double idler_frequency = 0.0;  // Hz
    std::vector<double> voltages;  // V, ascending
    std::vector<double> power;     // W
    double resolution_bandwidth = 1e6;
    double temperature = 0.0;      // junction / chain temperature, K

    /// >= 7 points, both bias signs, positive bandwidth and frequencies.
    void validate() const;
};

struct Interval {
    double lo;
    double hi;
};

struct FitBounds {
    Interval g_sys{0.0, INFINITY};
    Interval asymmetry{0.01, 100.0};
    Interval n_ex{0.0, INFINITY};

    void validate() const;
};

struct FitStart {
    std::string label;
    FitParams initial;
    FitParams final;
    double cost = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string message;
};

struct FitResult {
    double frequency = 0.0;
    double g_sys = 0.0;
    double g_sys_db = 0.0;
    double asymmetry = 0.0;
    double n_ex = 0.0;
    double n_sys = 0.0;  // n_ex + 0.5
    double residual_rms = 0.0;  // W
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();  // (g_sys, asymmetry, n_ex)
    bool converged = false;
    std::array<bool, 3> at_bound{false, false, false};
    std::size_t chosen_start = 0;
    std::vector<FitStart> starts;

    FitParams params() const { return {g_sys, asymmetry, n_ex}; }
};

double model_output(const FitParams& p, double voltage, double f_signal, double f_idler, double temperature,
                    double rbw);

struct SyntheticSpec {
    FitParams truth;
    std::vector<double> voltages;
    double noise_fraction = 0.0;  // std-dev of the multiplicative Gaussian factor
    std::uint64_t seed = 0;

    void validate() const;
};

/// n points evenly spaced over [-v_max, v_max].
std::vector<double> symmetric_voltages(double v_max, std::size_t n);

NoiseSweep synthesize_sweep(const SyntheticSpec& spec, double f_signal, double f_idler, double temperature,
                            double rbw = 1e6);

/// Multi-start bounded fit. Throws FitError, listing every start, when no
/// start converges.
FitResult fit_noise_sweep(const NoiseSweep& sweep, const FitBounds& bounds = {});

struct BandFit {
    std::vector<double> frequencies;
    std::vector<std::optional<FitResult>> results;  // empty where the fit failed
    std::vector<std::string> errors;                // per point, empty on success
    double band_lower = 0.0;
    double band_upper = 0.0;
    double median_n_sys = 0.0;
    double median_true_gain_db = 0.0;  // NaN when no gains were supplied
    std::size_t points_in_band = 0;
    std::size_t failed = 0;
};

/// Fits every sweep concurrently; medians are taken over successful fits
/// whose frequency lies in [band_lower, band_upper]. `true_gain_db`, when
/// non-empty, holds one value per sweep.
BandFit fit_band(const std::vector<NoiseSweep>& sweeps, const FitBounds& bounds, double band_lower,
                 double band_upper, const std::vector<double>& true_gain_db = {});

// Serialisation.
CsvTable sweep_to_csv(const NoiseSweep& sweep);
nlohmann::json sweep_sidecar(const NoiseSweep& sweep);
NoiseSweep sweep_from_files(const CsvTable& table, const nlohmann::json& sidecar);
nlohmann::json fit_result_json(const FitResult& result);
FitResult fit_result_from_json(const nlohmann::json& j);
nlohmann::json band_fit_json(const BandFit& band);

}  // namespace kitamp
