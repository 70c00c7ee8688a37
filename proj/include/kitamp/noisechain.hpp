#pragma once

// Cascaded readout-chain noise model in photon-normalised units (quanta).
//
// Chain layout: eta1 -> FSA -> eta2 -> HEMT -> WAMP, with the loss ahead of
// the warm amplifier taken as unity and its added noise neglected.
// Thermal occupancies include the vacuum half quantum.

#include <variant>
#include <vector>

#include "kitamp/spectrum.hpp"

namespace kitamp {

/// (1/2) coth(h f / 2 k_B T); exactly 0.5 at T = 0.
double thermal_occupancy(double frequency, double temperature);

/// Shot noise of a voltage-biased tunnel junction seen at frequency f:
///   N = (1 / 4hf) sum_{+,-} (eV +/- hf) coth((eV +/- hf) / 2 k_B T)
/// Even in V, equal to thermal_occupancy(f, T) at V = 0 and to e|V| / 2hf
/// for e|V| >> hf, k_B T.
double sntj_noise(double voltage, double frequency, double temperature);

/// Large-bias asymptote e|V| / (2 h f).
double sntj_asymptote(double voltage, double frequency);

/// Transmission efficiency modelled as a beamsplitter against a thermal bath.
struct Efficiency {
    Spectrum eta;
    double bath_temperature = 0.0;  // K

    void validate() const;
};

struct AmplifierStage {
    Spectrum gain;                        // linear power gain (on/off for a paramp)
    Spectrum added_noise;                 // quanta, input referred
    Spectrum internal_transmission = 1.0; // off-state transmission, <= 1

    void validate() const;
    /// Gain reduced by internal transmission.
    double true_gain(double f) const { return gain(f) * internal_transmission(f); }
};

/// N_in eta + N_T (1 - eta).
double beamsplit(double n_in, const Efficiency& eff, double frequency);

/// Excess noise referred to the source through the input loss:
///   [N_ex^s + N_T^s (1 - eta^s)] / eta^s + r [N_ex^i + N_T^i (1 - eta^i)] / eta^i
/// with r the idler/signal true-gain ratio.
double effective_excess_noise(const Efficiency& input_loss, double f_signal, double f_idler, double n_ex_signal,
                              double n_ex_idler, double asymmetry);

using ChainEntry = std::variant<Efficiency, AmplifierStage>;

struct ReadoutChain {
    Efficiency input_loss;       // eta1, source -> FSA
    AmplifierStage fsa;          // first-stage paramp
    Efficiency interstage_loss;  // eta2, FSA -> HEMT
    AmplifierStage hemt;
    AmplifierStage wamp;

    /// Accepts [eta1, FSA, eta2, HEMT, WAMP] or the same with a unity
    /// efficiency between HEMT and WAMP. Throws StructureError otherwise.
    static ReadoutChain from_entries(const std::vector<ChainEntry>& entries);

    void validate() const;
};

struct ChainOutput {
    double n_out = 0.0;            // quanta at the analyser input
    double system_gain = 0.0;      // G3 G~2 G~1^s
    double asymmetry = 0.0;        // G~1^i / G~1^s
    double n_in_signal = 0.0;      // after eta1
    double n_in_idler = 0.0;
    double excess_noise = 0.0;     // effective FSA excess noise
    double hemt_noise = 0.0;       // HEMT added noise referred to its input, incl. eta2
    double hemt_term = 0.0;        // G3 G~2 N~add,2 contribution to n_out
};

/// Full cascade including the HEMT term.
ChainOutput chain_output(const ReadoutChain& chain, double n_in_signal, double n_in_idler, double f_signal,
                         double f_idler);

/// Same output with the HEMT term dropped (high-gain / low-HEMT-noise form).
double chain_output_high_gain(const ReadoutChain& chain, double n_in_signal, double n_in_idler, double f_signal,
                              double f_idler);

/// Relative difference between the full and the high-gain forms.
double high_gain_discrepancy(const ReadoutChain& chain, double n_in_signal, double n_in_idler, double f_signal,
                             double f_idler);

struct SystemNoise {
    double limit = 0.0;            // N_ex + 0.5
    double exact = 0.0;            // limit + HEMT term referred to the FSA input
    double hemt_input_referred = 0.0;
    double fsa_true_gain_db = 0.0;
    bool limit_valid = true;       // FSA true gain >= threshold
};

SystemNoise system_noise(const ReadoutChain& chain, double f_signal, double f_idler, double threshold_db = 16.0);

/// Reference readout chain: lossless input, 17.5 dB FSA
/// adding 1.45 quanta in each sideband (2.9 in total at r = 1), 40 dB HEMT
/// adding 10 quanta, 40 dB WAMP.
ReadoutChain example_chain();

}  // namespace kitamp
