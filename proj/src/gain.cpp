#include "kitamp/gain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kitamp/detail/parallel.hpp"
#include "kitamp/errors.hpp"
#include "kitamp/ode.hpp"
#include "kitamp/units.hpp"

namespace kitamp {

using detail::median;
using detail::parallel_for;

PumpSpec PumpSpec::from_power_dbm(double frequency, double dbm, double z0) {
    return {frequency, power_to_current(dbm_to_watts(dbm), z0)};
}

double PumpSpec::power_dbm(double z0) const { return watts_to_dbm(current_to_power(current_amplitude, z0)); }

MediumModel::MediumModel(const Medium& medium, double f_max, std::size_t points) {
    medium.supercell.validate();
    medium.film.validate();
    if (points < 2) throw ValidationError("MediumModel: need at least 2 dispersion points");
    mixing_ = mixing_coefficients(medium.film, medium.i_dc);
    i_dc_ = medium.i_dc;
    i_critical_ = medium.film.i_critical;
    length_ = medium.supercell.total_length();
    output_points_ = medium.supercell.n_supercells + 1;
    double scale = kinetic_inductance(medium.film, medium.i_dc) / medium.film.sheet_inductance;
    FrequencyGrid grid = FrequencyGrid::linear(f_max / static_cast<double>(points), f_max, points);
    auto chains = supercell_chain(medium.supercell, medium.film, grid, scale);
    dispersion_ = bloch_dispersion(chains.supercell, medium.supercell.supercell_length());
}

MediumModel MediumModel::dispersionless(double length, double phase_velocity, MixingCoefficients mixing,
                                        double f_max, std::size_t output_points) {
    if (!(length > 0.0) || !(phase_velocity > 0.0)) throw ValidationError("dispersionless medium: bad length/velocity");
    MediumModel m;
    FrequencyGrid grid = FrequencyGrid::linear(f_max * 1e-3, f_max, 3);
    m.dispersion_ = BlochDispersion::linear(grid, phase_velocity, length);
    m.length_ = length;
    m.mixing_ = mixing;
    m.output_points_ = std::max<std::size_t>(output_points, 2);
    return m;
}

MediumModel MediumModel::with_length(double length, std::size_t output_points) const {
    MediumModel m = *this;
    m.length_ = length;
    m.output_points_ = std::max<std::size_t>(output_points, 2);
    return m;
}

double phase_mismatch(const BlochDispersion& dispersion, double f_pump, double f_signal) {
    if (!(f_signal > 0.0) || !(f_signal < f_pump)) {
        std::ostringstream os;
        os << "phase_mismatch: need 0 < f_signal < f_pump (got " << f_signal << ", " << f_pump << ")";
        throw DomainError(os.str());
    }
    const double f_idler = f_pump - f_signal;
    return dispersion.wavenumber_at(f_pump) - dispersion.wavenumber_at(f_signal) - dispersion.wavenumber_at(f_idler);
}

double CmeSolution::gain() const { return std::norm(signal.back()) / std::norm(signal.front()); }

double CmeSolution::gain_db() const { return power_to_db(gain()); }

double CmeSolution::manley_rowe_drift() const {
    const double ns0 = std::norm(signal.front()) / k_signal;
    const double ni0 = std::norm(idler.front()) / k_idler;
    const double np0 = std::norm(pump.front()) / k_pump;
    double worst = 0.0;
    for (std::size_t j = 0; j < positions.size(); ++j) {
        double ns = std::norm(signal[j]) / k_signal;
        double ni = std::norm(idler[j]) / k_idler;
        worst = std::max(worst, std::abs((ns - ni) - (ns0 - ni0)) / std::max(ns, ns0));
    }
    // With a depleted pump the pump flux must balance the signal flux too.
    bool pump_moves = std::abs(std::norm(pump.back()) - std::norm(pump.front())) > 0.0;
    if (pump_moves && np0 > 0.0) {
        for (std::size_t j = 0; j < positions.size(); ++j) {
            double ns = std::norm(signal[j]) / k_signal;
            double np = std::norm(pump[j]) / k_pump;
            worst = std::max(worst, std::abs((np + ns) - (np0 + ns0)) / np0);
        }
    }
    return worst;
}

CmeSolution solve_3wm(const MediumModel& medium, const PumpSpec& pump, double f_signal, const CmeOptions& options) {
    if (!(pump.frequency > 0.0)) throw ValidationError("pump frequency must be > 0");
    if (!(pump.current_amplitude >= 0.0)) throw ValidationError("pump amplitude must be >= 0");
    if (std::isfinite(medium.i_critical()) &&
        !(std::abs(medium.i_dc()) + pump.current_amplitude < medium.i_critical())) {
        std::ostringstream os;
        os << "solve_3wm: |i_dc| + i_p = " << std::abs(medium.i_dc()) + pump.current_amplitude
           << " A exceeds i_critical = " << medium.i_critical() << " A";
        throw OperatingPointError(os.str());
    }

    CmeSolution sol;
    sol.f_pump = pump.frequency;
    sol.f_signal = f_signal;
    sol.f_idler = pump.frequency - f_signal;
    const auto& disp = medium.dispersion();
    sol.phase_mismatch = phase_mismatch(disp, pump.frequency, f_signal);
    sol.k_pump = disp.wavenumber_at(sol.f_pump);
    sol.k_signal = disp.wavenumber_at(sol.f_signal);
    sol.k_idler = disp.wavenumber_at(sol.f_idler);

    const double eps = medium.mixing().epsilon;
    const double xi = options.phase_modulation ? medium.mixing().xi : 0.0;
    const double kp = sol.k_pump, ks = sol.k_signal, ki = sol.k_idler, dk = sol.phase_mismatch;
    const bool depleted = options.depleted_pump;
    const cdouble I(0.0, 1.0);

    auto rhs = [=](double x, const Eigen::VectorXcd& y) {
        const cdouble ap = y[0], as = y[1], ai = y[2];
        const double pp = std::norm(ap), ps = std::norm(as), pi = std::norm(ai);
        const cdouble rot = std::polar(1.0, dk * x);
        Eigen::VectorXcd d(3);
        d[0] = I * kp * xi / 8.0 * (pp + 2.0 * ps + 2.0 * pi) * ap;
        if (depleted) d[0] += I * kp * eps / 4.0 * as * ai * std::conj(rot);
        d[1] = I * ks * eps / 4.0 * ap * std::conj(ai) * rot + I * ks * xi / 8.0 * (ps + 2.0 * pp + 2.0 * pi) * as;
        d[2] = I * ki * eps / 4.0 * ap * std::conj(as) * rot + I * ki * xi / 8.0 * (pi + 2.0 * pp + 2.0 * ps) * ai;
        return d;
    };

    const double ip = pump.current_amplitude;
    const double a_s0 = ip > 0.0 ? options.signal_fraction * ip : options.signal_fraction;
    Eigen::VectorXcd y0(3);
    y0 << cdouble(ip, 0.0), cdouble(a_s0, 0.0), cdouble(0.0, 0.0);

    const std::size_t n_out = medium.output_points();
    sol.positions.resize(n_out);
    for (std::size_t j = 0; j < n_out; ++j)
        sol.positions[j] = medium.length() * static_cast<double>(j) / static_cast<double>(n_out - 1);

    if (ip == 0.0) {
        // Pump off: nothing drives the idler, and the probe's self-phase
        // term is second order in its (vanishing) amplitude, so the exact
        // small-signal solution is constant.
        sol.pump.assign(n_out, cdouble(0.0, 0.0));
        sol.signal.assign(n_out, y0[1]);
        sol.idler.assign(n_out, cdouble(0.0, 0.0));
        return sol;
    }

    OdeOptions ode;
    ode.rtol = options.rtol;
    ode.max_step = options.max_step;
    // The idler starts at zero; measure it on the signal's scale.
    ode.atol = {options.rtol * 1e-3 * std::max(ip, a_s0), options.rtol * 1e-3 * a_s0, options.rtol * 1e-3 * a_s0};

    DormandPrince<decltype(rhs)> integrator(rhs, ode);
    std::vector<Eigen::VectorXcd> states;
    try {
        states = integrator.integrate(y0, sol.positions);
    } catch (const NumericalError& e) {
        std::ostringstream os;
        os << e.what() << "; f_signal = " << f_signal << " Hz, f_pump = " << pump.frequency << " Hz";
        throw NumericalError(os.str());
    }
    sol.steps = integrator.stats().accepted;
    sol.pump.reserve(n_out);
    sol.signal.reserve(n_out);
    sol.idler.reserve(n_out);
    for (const auto& s : states) {
        sol.pump.push_back(s[0]);
        sol.signal.push_back(s[1]);
        sol.idler.push_back(s[2]);
    }
    return sol;
}

GainProfile GainProfile::from_on_off(FrequencyGrid grid, std::vector<double> on_off_db,
                                     std::vector<double> off_transmission_db) {
    if (on_off_db.size() != grid.size() || off_transmission_db.size() != grid.size())
        throw AlignmentError("GainProfile: column lengths differ from grid");
    GainProfile p;
    p.grid = std::move(grid);
    p.on_off_gain = std::move(on_off_db);
    p.off_transmission = std::move(off_transmission_db);
    p.true_gain.resize(p.grid.size());
    p.valid.resize(p.grid.size());
    for (std::size_t k = 0; k < p.grid.size(); ++k) {
        if (p.off_transmission[k] > 0.0) throw ValidationError("GainProfile: off-state transmission must be <= 0 dB");
        p.true_gain[k] = p.on_off_gain[k] + p.off_transmission[k];
        p.valid[k] = std::isfinite(p.true_gain[k]);
    }
    return p;
}

GainProfile gain_profile(const MediumModel& medium, const PumpSpec& pump, const FrequencyGrid& grid,
                         const std::vector<double>& off_transmission_db, const CmeOptions& options) {
    grid.validate();
    if (off_transmission_db.size() != grid.size())
        throw AlignmentError("gain_profile: off_transmission length differs from grid");
    std::vector<double> on_off(grid.size(), std::nan(""));
    std::vector<std::exception_ptr> errors(grid.size());
    parallel_for(grid.size(), [&](std::size_t k) {
        try {
            on_off[k] = solve_3wm(medium, pump, grid[k], options).gain_db();
        } catch (const DomainError&) {
            // stopband or f_signal >= f_pump: reported as absent
        } catch (...) {
            errors[k] = std::current_exception();
        }
    });
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return GainProfile::from_on_off(grid, std::move(on_off), off_transmission_db);
}

BandSummary bandwidth_3db(const GainProfile& p) {
    const std::size_t n = p.grid.size();
    if (n == 0) throw ShapeError("bandwidth_3db: empty profile");
    double peak = -std::numeric_limits<double>::infinity();
    std::size_t peak_k = 0;
    for (std::size_t k = 0; k < n; ++k)
        if (p.valid[k] && p.true_gain[k] > peak) {
            peak = p.true_gain[k];
            peak_k = k;
        }
    if (!std::isfinite(peak)) throw ShapeError("bandwidth_3db: profile has no valid points");
    bool interior = false;
    for (std::size_t k = 1; k + 1 < n; ++k)
        if (p.valid[k] && p.true_gain[k] == peak) interior = true;
    if (!interior) throw ShapeError("bandwidth_3db: gain maximum lies on the grid boundary");

    const double threshold = peak - 3.0;
    auto above = [&](std::size_t k) { return p.valid[k] && p.true_gain[k] >= threshold; };
    auto crossing = [&](std::size_t inside, std::size_t outside) {
        if (!p.valid[outside]) return p.grid[inside];
        double g0 = p.true_gain[inside], g1 = p.true_gain[outside];
        double t = (g0 - threshold) / (g0 - g1);
        return p.grid[inside] + t * (p.grid[outside] - p.grid[inside]);
    };

    BandSummary best;
    double best_width = -1.0;
    std::size_t best_first = 0, best_last = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (!above(k)) continue;
        std::size_t j = k;
        while (j + 1 < n && above(j + 1)) ++j;
        double lo = k > 0 ? crossing(k, k - 1) : p.grid[k];
        double hi = j + 1 < n ? crossing(j, j + 1) : p.grid[j];
        if (hi - lo > best_width) {
            best_width = hi - lo;
            best.lower = lo;
            best.upper = hi;
            best_first = k;
            best_last = j;
        }
        k = j;
    }
    std::vector<double> tg, oo;
    for (std::size_t k = best_first; k <= best_last; ++k) {
        tg.push_back(p.true_gain[k]);
        oo.push_back(p.on_off_gain[k]);
    }
    best.peak_db = peak;
    best.peak_frequency = p.grid[peak_k];
    best.median_true_gain_db = median(tg);
    best.median_on_off_gain_db = median(oo);
    best.points_in_band = tg.size();
    return best;
}

double peak_gain_db(const MediumModel& medium, double f_pump, double i_p, const FrequencyGrid& grid,
                    const CmeOptions& options) {
    std::vector<double> zeros(grid.size(), 0.0);
    GainProfile p = gain_profile(medium, PumpSpec{f_pump, i_p}, grid, zeros, options);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < p.grid.size(); ++k)
        if (p.valid[k]) peak = std::max(peak, p.on_off_gain[k]);
    return peak;
}

double tune_pump_amplitude(const MediumModel& medium, double f_pump, const FrequencyGrid& grid, double target_db,
                           double i_max, const CmeOptions& options, double tolerance_db) {
    if (!(i_max > 0.0)) throw DomainError("tune_pump_amplitude: i_max must be > 0");
    double hi_gain = peak_gain_db(medium, f_pump, i_max, grid, options);
    if (hi_gain < target_db) {
        std::ostringstream os;
        os << "tune_pump_amplitude: peak gain " << hi_gain << " dB at the largest allowed pump (" << i_max
           << " A) is below the " << target_db << " dB target";
        throw DomainError(os.str());
    }
    double lo = 0.0, hi = i_max;
    for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        double g = peak_gain_db(medium, f_pump, mid, grid, options);
        if (std::abs(g - target_db) <= tolerance_db) return mid;
        (g < target_db ? lo : hi) = mid;
    }
    return hi;
}

std::vector<double> parabolic_gain_db(const FrequencyGrid& grid, double center, double width_3db, double peak_db) {
    std::vector<double> out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        double u = (grid[k] - center) / (0.5 * width_3db);
        out[k] = peak_db - 3.0 * u * u;
    }
    return out;
}

CsvTable gain_profile_to_csv(const GainProfile& p) {
    CsvTable t;
    t.header = {"frequency_hz", "on_off_db", "off_transmission_db", "true_gain_db"};
    for (std::size_t k = 0; k < p.grid.size(); ++k)
        t.rows.push_back({format_double(p.grid[k]), format_double(p.on_off_gain[k]),
                          format_double(p.off_transmission[k]), format_double(p.true_gain[k])});
    return t;
}

GainProfile gain_profile_from_csv(const CsvTable& t) {
    FrequencyGrid grid{t.numeric_column("frequency_hz")};
    grid.validate();
    GainProfile p = GainProfile::from_on_off(grid, t.numeric_column("on_off_db"), t.numeric_column("off_transmission_db"));
    auto tg = t.numeric_column("true_gain_db");
    for (std::size_t k = 0; k < tg.size(); ++k) {
        bool both_nan = std::isnan(tg[k]) && std::isnan(p.true_gain[k]);
        if (!both_nan && std::abs(tg[k] - p.true_gain[k]) > 1e-9 * std::max(1.0, std::abs(tg[k])))
            throw ParseError("true_gain_db disagrees with on_off_db + off_transmission_db", k + 2);
    }
    return p;
}

nlohmann::json band_summary_json(const BandSummary& b) {
    return {{"peak_db", b.peak_db},
            {"peak_frequency_hz", b.peak_frequency},
            {"band", {{"lower_hz", b.lower}, {"upper_hz", b.upper}, {"width_hz", b.width()}}},
            {"median_true_gain_db", b.median_true_gain_db},
            {"median_on_off_gain_db", b.median_on_off_gain_db},
            {"points_in_band", b.points_in_band}};
}

}  // namespace kitamp
