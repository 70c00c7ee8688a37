#pragma once

#include <cmath>
#include <numbers>

namespace kitamp {

namespace constants {
// Exact SI values (2019 redefinition).
inline constexpr double planck = 6.62607015e-34;           // J s
inline constexpr double boltzmann = 1.380649e-23;          // J/K
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double pi = std::numbers::pi;
}  // namespace constants

inline double angular(double frequency_hz) { return 2.0 * constants::pi * frequency_hz; }

inline double power_to_db(double ratio) { return 10.0 * std::log10(ratio); }
inline double db_to_power(double db) { return std::pow(10.0, db / 10.0); }
inline double amplitude_to_db(double magnitude) { return 20.0 * std::log10(magnitude); }

/// Peak current of a sinusoid carrying `power_w` into a matched `z0` load.
inline double power_to_current(double power_w, double z0 = 50.0) {
    return std::sqrt(2.0 * power_w / z0);
}
inline double current_to_power(double current_a, double z0 = 50.0) {
    return current_a * current_a * z0 / 2.0;
}
inline double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w / 1e-3); }

}  // namespace kitamp
