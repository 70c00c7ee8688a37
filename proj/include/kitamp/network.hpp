#pragma once

// Frequency-domain linear network engine: ABCD two-port chains and their
// conversion to scattering parameters.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kitamp/nonlinearity.hpp"

namespace kitamp {

using cdouble = std::complex<double>;

struct FrequencyGrid {
    std::vector<double> points;  // Hz

    /// `count` points from start to stop inclusive; count >= 1.
    static FrequencyGrid linear(double start, double stop, std::size_t count);

    /// Throws ValidationError unless strictly increasing and positive.
    void validate() const;

    std::size_t size() const { return points.size(); }
    double operator[](std::size_t k) const { return points[k]; }
    bool operator==(const FrequencyGrid&) const = default;
};

/// Uniform TEM transmission line section.
struct LineSection {
    double char_impedance;          // ohm
    double length;                  // m
    double inductance_per_length;   // H/m
    double capacitance_per_length;  // F/m
    double loss_per_length = 0.0;   // Np/m

    static LineSection from_lc(double l_per_m, double c_per_m, double length, double loss = 0.0);
    /// Per-length C chosen so that sqrt(L'/C') = z0.
    static LineSection from_l_and_impedance(double l_per_m, double z0, double length, double loss = 0.0);

    void validate() const;
    double phase_velocity() const;
    /// Delay through the section, s.
    double delay() const { return length / phase_velocity(); }
};

class TwoPortChain {
public:
    TwoPortChain() = default;
    TwoPortChain(FrequencyGrid grid, std::vector<Eigen::Matrix2cd> abcd);

    static TwoPortChain identity(const FrequencyGrid& grid);

    const FrequencyGrid& grid() const { return grid_; }
    const std::vector<Eigen::Matrix2cd>& abcd() const { return abcd_; }
    const Eigen::Matrix2cd& operator[](std::size_t k) const { return abcd_[k]; }
    std::size_t size() const { return abcd_.size(); }

    /// max_k |det(ABCD_k) - 1|
    double max_determinant_error() const;

private:
    FrequencyGrid grid_;
    std::vector<Eigen::Matrix2cd> abcd_;
};

struct NPortSParams {
    std::size_t n_ports = 0;
    FrequencyGrid grid;
    std::vector<Eigen::MatrixXcd> matrix;
    double reference_impedance = 50.0;

    cdouble at(std::size_t k, std::size_t row, std::size_t col) const { return matrix[k](row, col); }
    /// Port indices are 1-based to match S_ij notation.
    double magnitude_db(std::size_t k, std::size_t i, std::size_t j) const;

    /// max over frequency of max_ij |S_ij - S_ji|
    double reciprocity_error() const;
    /// max over frequency of the largest |element| of S^H S - I
    double unitarity_error() const;
    /// max |S_ij| over all entries and frequencies
    double max_magnitude() const;
};

TwoPortChain line_abcd(const LineSection& section, const FrequencyGrid& grid);

/// Series impedance element; `impedance[k]` is evaluated at grid point k.
TwoPortChain series_impedance_abcd(const std::vector<cdouble>& impedance, const FrequencyGrid& grid);
TwoPortChain series_capacitor_abcd(double capacitance, const FrequencyGrid& grid);

/// Per-frequency product in order. Throws AlignmentError on grid mismatch.
TwoPortChain cascade(std::span<const TwoPortChain> chains);
TwoPortChain cascade(const TwoPortChain& first, const TwoPortChain& second);

/// `chain` cascaded with itself `count` times (exponentiation by squaring).
TwoPortChain repeat(const TwoPortChain& chain, std::size_t count);

NPortSParams abcd_to_sparams(const TwoPortChain& chain, double z_ref);
TwoPortChain sparams_to_abcd(const NPortSParams& sparams);

/// Terminates port `port` (1-based) of `s` in a load with reflection `gamma`
/// and returns the remaining (n-1)-port.
NPortSParams terminate_port(const NPortSParams& s, std::size_t port, cdouble gamma);

/// Dispersion-engineered line: a run of unloaded cells followed by loaded
/// cells, repeated n_supercells times.
struct SupercellSpec {
    std::size_t n_unloaded;
    std::size_t n_loaded;
    double unloaded_z0;       // ohm
    double loaded_z0;         // ohm
    double unit_cell_length;  // m
    std::size_t n_supercells;

    void validate() const;
    double supercell_length() const;
    double total_length() const;
};

/// 30 unloaded cells at 50 ohm, 4 loaded at 80 ohm, 2 um cells, 1200 supercells.
SupercellSpec reference_supercell();

struct SupercellSections {
    LineSection unloaded;  // all unloaded cells of one supercell, concatenated
    LineSection loaded;
};

/// Per-length L from the film; per-length C sized to reach each Z0 target at
/// zero bias. `inductance_scale` multiplies L' (dc-bias renormalisation) while
/// keeping C' fixed.
SupercellSections supercell_sections(const SupercellSpec& spec, const FilmSpec& film,
                                     double inductance_scale = 1.0);

struct SupercellChain {
    TwoPortChain supercell;
    TwoPortChain medium;
};

SupercellChain supercell_chain(const SupercellSpec& spec, const FilmSpec& film,
                               const FrequencyGrid& grid, double inductance_scale = 1.0);

}  // namespace kitamp
