#pragma once

#include <vector>

#include "kitamp/network.hpp"

namespace kitamp {

/// Symmetric coupled-line section described by its even and odd modes.
///
/// Port convention: line A runs 1 -> 2, line B runs 3 -> 4 with ports 1 and 3
/// at the same end. S21 is the through path, S24 the forward (pump-injection)
/// coupling and S23 the reverse coupling.
struct CouplerSpec {
    double coupled_length;                 // m
    double even_impedance;                 // ohm
    double odd_impedance;                  // ohm
    double effective_phase_velocity_even;  // m/s
    double effective_phase_velocity_odd;   // m/s

    /// Strict invariants (all positive, even >= odd). `require_matched`
    /// additionally enforces sqrt(Ze Zo) within 5% of 50 ohm.
    void validate(bool require_matched = true) const;

    /// Max-coupling coefficient (Ze - Zo) / (Ze + Zo).
    double coupling_coefficient() const;
};

/// Even/odd impedances giving midband coupling `coupling_db` (< 0) in a
/// system of impedance z0.
struct EvenOddImpedance {
    double even;
    double odd;
};
EvenOddImpedance coupler_impedances_for(double coupling_db, double z0 = 50.0);

/// -20 dB design, 1500 um long, both modes at the velocity that makes the
/// section a quarter wave at 15 GHz.
CouplerSpec reference_coupler();

NPortSParams coupler_sparams(const CouplerSpec& spec, const FrequencyGrid& grid, double z_ref = 50.0);

struct CouplerMetrics {
    std::vector<double> through_db;   // |S21|
    std::vector<double> forward_db;   // |S24|
    std::vector<double> reverse_db;   // |S23|
    std::vector<double> directivity_db;  // |S24| - |S23| in dB; +inf when S23 = 0
};

CouplerMetrics coupler_metrics(const NPortSParams& s);

}  // namespace kitamp
