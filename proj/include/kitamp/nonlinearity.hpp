#pragma once

// Current-dependent kinetic inductance of a thin superconducting line and the
// three-/four-wave-mixing coefficients derived from it.
//
//   L_k(I) = L_dc [1 + (I/I*)^2 + (I/I*)^4]
//   eps    = 2 I_dc / (I*^2 + I_dc^2)
//   xi     = 1 / (I*^2 + I_dc^2)
//
// All quantities are SI: H per square, A, 1/A, 1/A^2.

namespace kitamp {

/// Highest power of (I/I*) retained in the kinetic-inductance series.
inline constexpr int kKineticSeriesOrder = 4;

struct FilmSpec {
    double sheet_inductance;  // H per square
    double thickness;         // m
    double line_width;        // m
    double i_star;            // A
    double i_critical;        // A

    /// Throws ValidationError listing every violated invariant.
    void validate() const;

    /// Inductance per unit length of a line of this film at zero current.
    double inductance_per_length() const { return sheet_inductance / line_width; }
};

struct BiasState {
    double i_dc;
    double i_pump_amplitude;

    /// Throws OperatingPointError if |i_dc| + |i_p| >= film.i_critical.
    void validate(const FilmSpec& film) const;
};

struct MixingCoefficients {
    double epsilon;  // 1/A
    double xi;       // 1/A^2
};

/// 10 nm NbTiN, 1 um wide: 35 pH/sq, Ic ~ 800 uA, I* = 2.8 mA.
FilmSpec reference_film();

/// L_k(I) in H per square. Requires |i_total| < film.i_star.
double kinetic_inductance(const FilmSpec& film, double i_total);

/// dL_k/dI of the truncated series, H per square per ampere.
double kinetic_inductance_slope(const FilmSpec& film, double i_total);

/// Coefficients at an operating point; requires |i_dc| < film.i_critical.
MixingCoefficients mixing_coefficients(const FilmSpec& film, double i_dc);

/// Bare closed form for a given I*, without the operating-regime check.
/// Used for analysis away from the superconducting regime (e.g. i_dc = I*).
MixingCoefficients mixing_coefficients(double i_star, double i_dc);

}  // namespace kitamp
