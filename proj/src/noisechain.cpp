#include "kitamp/noisechain.hpp"

#include <cmath>
#include <string>

#include "kitamp/errors.hpp"
#include "kitamp/units.hpp"

namespace kitamp {

namespace {

using constants::boltzmann;
using constants::elementary_charge;
using constants::planck;

// x coth(x / 2kT), continuous through x = 0 and T = 0.
double x_coth(double x, double temperature) {
    if (temperature <= 0.0) return std::abs(x);
    const double a = x / (2.0 * boltzmann * temperature);
    if (std::abs(a) < 1e-8) return 2.0 * boltzmann * temperature * (1.0 + a * a / 3.0);
    return x / std::tanh(a);
}

void check_spectrum(const Spectrum& s, const char* what, double lo, double hi, bool lo_open) {
    for (double v : s.values()) {
        bool ok = (lo_open ? v > lo : v >= lo) && v <= hi && std::isfinite(v);
        if (!ok) throw ValidationError(std::string(what) + " value " + std::to_string(v) + " out of range");
    }
}

}  // namespace

double thermal_occupancy(double frequency, double temperature) {
    if (!(frequency > 0.0)) throw DomainError("thermal_occupancy: frequency must be > 0");
    if (temperature < 0.0) throw DomainError("thermal_occupancy: temperature must be >= 0");
    if (temperature == 0.0) return 0.5;
    const double a = planck * frequency / (2.0 * boltzmann * temperature);
    return 0.5 / std::tanh(a);
}

double sntj_noise(double voltage, double frequency, double temperature) {
    if (!(frequency > 0.0)) throw DomainError("sntj_noise: frequency must be > 0");
    if (temperature < 0.0) throw DomainError("sntj_noise: temperature must be >= 0");
    const double ev = elementary_charge * voltage;
    const double hf = planck * frequency;
    return (x_coth(ev + hf, temperature) + x_coth(ev - hf, temperature)) / (4.0 * hf);
}

double sntj_asymptote(double voltage, double frequency) {
    return elementary_charge * std::abs(voltage) / (2.0 * planck * frequency);
}

void Efficiency::validate() const {
    check_spectrum(eta, "efficiency eta", 0.0, 1.0, true);
    if (bath_temperature < 0.0) throw ValidationError("efficiency bath temperature must be >= 0");
}

void AmplifierStage::validate() const {
    check_spectrum(gain, "amplifier gain", 0.0, INFINITY, true);
    check_spectrum(added_noise, "amplifier added noise", 0.0, INFINITY, false);
    check_spectrum(internal_transmission, "amplifier internal transmission", 0.0, 1.0, true);
}

double beamsplit(double n_in, const Efficiency& eff, double frequency) {
    const double eta = eff.eta(frequency);
    return n_in * eta + thermal_occupancy(frequency, eff.bath_temperature) * (1.0 - eta);
}

double effective_excess_noise(const Efficiency& input_loss, double f_signal, double f_idler, double n_ex_signal,
                              double n_ex_idler, double asymmetry) {
    if (!(asymmetry > 0.0)) throw DomainError("effective_excess_noise: asymmetry must be > 0");
    const double eta_s = input_loss.eta(f_signal);
    const double eta_i = input_loss.eta(f_idler);
    if (!(eta_s > 0.0) || !(eta_i > 0.0)) throw DomainError("effective_excess_noise: degenerate efficiency eta = 0");
    const double nt_s = thermal_occupancy(f_signal, input_loss.bath_temperature);
    const double nt_i = thermal_occupancy(f_idler, input_loss.bath_temperature);
    return (n_ex_signal + nt_s * (1.0 - eta_s)) / eta_s + asymmetry * (n_ex_idler + nt_i * (1.0 - eta_i)) / eta_i;
}

ReadoutChain ReadoutChain::from_entries(const std::vector<ChainEntry>& e) {
    auto eff = [&](std::size_t k) -> const Efficiency& {
        if (k >= e.size() || !std::holds_alternative<Efficiency>(e[k]))
            throw StructureError("readout chain: entry " + std::to_string(k) + " must be an efficiency");
        return std::get<Efficiency>(e[k]);
    };
    auto amp = [&](std::size_t k) -> const AmplifierStage& {
        if (k >= e.size() || !std::holds_alternative<AmplifierStage>(e[k]))
            throw StructureError("readout chain: entry " + std::to_string(k) + " must be an amplifier stage");
        return std::get<AmplifierStage>(e[k]);
    };
    ReadoutChain c{eff(0), amp(1), eff(2), amp(3), {}};
    if (e.size() == 5) {
        c.wamp = amp(4);
    } else if (e.size() == 6) {
        const Efficiency& eta3 = eff(4);
        if (eta3.eta.min() != 1.0 || eta3.eta.max() != 1.0)
            throw StructureError("readout chain: loss ahead of the third stage must be unity");
        c.wamp = amp(5);
    } else {
        throw StructureError("readout chain: expected 5 or 6 entries, got " + std::to_string(e.size()));
    }
    c.validate();
    return c;
}

void ReadoutChain::validate() const {
    input_loss.validate();
    fsa.validate();
    interstage_loss.validate();
    hemt.validate();
    wamp.validate();
}

ChainOutput chain_output(const ReadoutChain& c, double n_in_signal, double n_in_idler, double f_signal,
                         double f_idler) {
    ChainOutput o;
    const double g1s = c.fsa.true_gain(f_signal);
    const double g1i = c.fsa.true_gain(f_idler);
    const double eta2 = c.interstage_loss.eta(f_signal);
    const double g2 = c.hemt.true_gain(f_signal) * eta2;
    const double g3 = c.wamp.true_gain(f_signal);
    o.asymmetry = g1i / g1s;
    o.n_in_signal = beamsplit(n_in_signal, c.input_loss, f_signal);
    o.n_in_idler = beamsplit(n_in_idler, c.input_loss, f_idler);
    o.excess_noise = effective_excess_noise(c.input_loss, f_signal, f_idler, c.fsa.added_noise(f_signal),
                                            c.fsa.added_noise(f_idler), o.asymmetry);
    o.hemt_noise = (c.hemt.added_noise(f_signal) +
                    thermal_occupancy(f_signal, c.interstage_loss.bath_temperature) * (1.0 - eta2)) /
                   eta2;
    o.system_gain = g3 * g2 * g1s;
    o.hemt_term = g3 * g2 * o.hemt_noise;
    o.n_out = o.system_gain * (o.n_in_signal + o.asymmetry * o.n_in_idler + o.excess_noise) + o.hemt_term;
    return o;
}

double chain_output_high_gain(const ReadoutChain& c, double n_in_signal, double n_in_idler, double f_signal,
                              double f_idler) {
    ChainOutput o = chain_output(c, n_in_signal, n_in_idler, f_signal, f_idler);
    return o.n_out - o.hemt_term;
}

double high_gain_discrepancy(const ReadoutChain& c, double n_in_signal, double n_in_idler, double f_signal,
                             double f_idler) {
    ChainOutput o = chain_output(c, n_in_signal, n_in_idler, f_signal, f_idler);
    return o.hemt_term / o.n_out;
}

SystemNoise system_noise(const ReadoutChain& c, double f_signal, double f_idler, double threshold_db) {
    SystemNoise s;
    const double g1s = c.fsa.true_gain(f_signal);
    ChainOutput o = chain_output(c, 0.5, 0.5, f_signal, f_idler);
    s.limit = o.excess_noise + 0.5;
    s.hemt_input_referred = o.hemt_noise / g1s;
    s.exact = s.limit + s.hemt_input_referred;
    s.fsa_true_gain_db = power_to_db(g1s);
    s.limit_valid = s.fsa_true_gain_db >= threshold_db;
    return s;
}

ReadoutChain example_chain() {
    ReadoutChain c;
    c.input_loss = {1.0, 0.05};
    c.fsa = {db_to_power(17.5), 1.45, 1.0};
    c.interstage_loss = {1.0, 4.5};
    c.hemt = {db_to_power(40.0), 10.0, 1.0};
    c.wamp = {db_to_power(40.0), 0.0, 1.0};
    return c;
}

}  // namespace kitamp
