#pragma once

#include <optional>
#include <string>

#include "kitamp/bias_tee.hpp"
#include "kitamp/calfit.hpp"
#include "kitamp/coupler.hpp"
#include "kitamp/gain.hpp"
#include "kitamp/network.hpp"
#include "kitamp/noisechain.hpp"
#include "kitamp/nonlinearity.hpp"

namespace kitamp {

struct GridSpec {
    double start = 0.0;
    double stop = 0.0;
    std::size_t points = 0;

    FrequencyGrid grid() const { return FrequencyGrid::linear(start, stop, points); }
};

struct GainSettings {
    GridSpec grid;
    double off_transmission_db = 0.0;        // internal transmission applied to on/off gain
    std::optional<double> target_peak_db;    // tune the pump amplitude by bisection when set
    std::size_t dispersion_points = 20001;
};

struct NoiseSettings {
    GridSpec grid;
    double pump_frequency = 0.0;  // idler = pump - signal
};

/// Synthetic calibration run: a flat excess noise across a band whose FSA
/// gain follows a parabola in dB.
struct CalibrationSettings {
    double pump_frequency = 0.0;
    double band_center = 0.0;
    double band_width = 0.0;        // 3 dB width of the FSA gain
    double fsa_peak_gain_db = 0.0;  // true gain
    double backend_gain_db = 0.0;   // G3 G~2
    double n_ex = 0.0;
    GridSpec grid;
    double voltage_max = 0.0;
    std::size_t voltage_points = 0;
    double noise_fraction = 0.0;
    double temperature = 0.0;
    double rbw = 1e6;
    FitBounds bounds;
};

struct ProjectConfig {
    FilmSpec film;
    SupercellSpec supercell;
    BiasState bias;
    PumpSpec pump;
    CouplerSpec coupler;
    BiasTeeSpec bias_tee;
    DcTermination dc_termination = DcTermination::Matched;
    GridSpec component_grid;
    ReadoutChain chain;
    GainSettings gain;
    NoiseSettings noise;
    CalibrationSettings calibration;
    std::string output_dir = "out";

    /// Checks every section and throws one ValidationError listing all
    /// failures.
    void validate() const;
};

/// Parses YAML; malformed text or missing keys raise ParseError (with line
/// numbers where the parser reports them). Semantic checks are left to
/// validate().
ProjectConfig load_config(const std::string& path);
ProjectConfig parse_config(const std::string& text);

/// The reference project, as shipped in configs/reference.yaml.
ProjectConfig reference_config();

}  // namespace kitamp
