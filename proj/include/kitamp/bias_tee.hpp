#pragma once

#include <cstddef>
#include <vector>

#include "kitamp/network.hpp"

namespace kitamp {

/// On-chip bias tee: a series (overlap) capacitor in the rf path and a dc
/// branch made of a long high-impedance kinetic-inductance line.
///
/// Ports: 1 = rf in, 2 = rf + dc out (junction), 3 = dc port.
struct BiasTeeSpec {
    double series_capacitance;  // F
    double dc_branch_squares;   // count of squares
    double dc_branch_width;     // m
    double dc_branch_impedance; // ohm
    double sheet_inductance;    // H per square

    void validate() const;
    double branch_length() const { return dc_branch_squares * dc_branch_width; }
    double branch_total_inductance() const { return dc_branch_squares * sheet_inductance; }
    LineSection branch_section() const;
};

/// 4000 squares of 2 um wide, 35 pH/sq line at ~700 ohm; 31.8 pF block.
BiasTeeSpec reference_bias_tee();

/// What the far end of the dc branch sees when the tee is reduced to its rf
/// through path or when locating branch resonances.
enum class DcTermination { Open, Matched };

NPortSParams bias_tee_sparams(const BiasTeeSpec& spec, const FrequencyGrid& grid, double z_ref = 50.0);

/// Two-port 1 -> 2 response with port 3 terminated per `termination`.
NPortSParams bias_tee_through(const BiasTeeSpec& spec, const FrequencyGrid& grid, DcTermination termination,
                              double z_ref = 50.0);

/// -3 dB corner of a lone series capacitor between source and load
/// resistances: 1 / (2 pi (Rs + Rl) C).
double series_capacitor_corner(double capacitance, double z_source = 50.0, double z_load = 50.0);

/// Same corner located numerically from |S21|^2 = 1/2 of the series-C two-port.
double series_capacitor_corner_numeric(double capacitance, double z_ref = 50.0);

/// Input impedance of the dc branch seen from the junction.
cdouble dc_branch_input_impedance(const BiasTeeSpec& spec, double frequency, DcTermination termination,
                                  double z_ref = 50.0);

/// Low-impedance (series) resonances of the dc branch below f_max, found by
/// bracketing and refining zeros of Im(Gamma_in) where Re(Gamma_in) < 0,
/// Gamma_in being the branch input reflection against its own impedance.
std::vector<double> dc_branch_resonances(const BiasTeeSpec& spec, double f_max,
                                         DcTermination termination = DcTermination::Matched,
                                         double z_ref = 50.0);

}  // namespace kitamp
