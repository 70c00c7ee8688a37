#include "kitamp/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "kitamp/errors.hpp"
#include "kitamp/units.hpp"

namespace kitamp {

namespace {

std::size_t line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? static_cast<std::size_t>(n.Mark().line) + 1 : 0; }

YAML::Node need(const YAML::Node& parent, const char* key, const std::string& where) {
    YAML::Node n = parent[key];
    if (!n) throw ParseError("config: missing key '" + where + "." + key + "'", line_of(parent));
    return n;
}

template <class T>
T get(const YAML::Node& parent, const char* key, const std::string& where) {
    YAML::Node n = need(parent, key, where);
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw ParseError("config: bad value for '" + where + "." + key + "'", line_of(n));
    }
}

template <class T>
T get_or(const YAML::Node& parent, const char* key, T fallback, const std::string& where) {
    return parent[key] ? get<T>(parent, key, where) : fallback;
}

GridSpec read_grid(const YAML::Node& n, const std::string& where) {
    return {get<double>(n, "start", where), get<double>(n, "stop", where), get<std::size_t>(n, "points", where)};
}

// A scalar, or a {frequencies: [...], values: [...]} table. `convert` maps the
// stored unit (e.g. dB) onto the linear value.
Spectrum read_spectrum(const YAML::Node& parent, const char* key, const std::string& where,
                       const std::function<double(double)>& convert, std::optional<double> fallback = {}) {
    YAML::Node n = parent[key];
    if (!n) {
        if (fallback) return *fallback;
        throw ParseError("config: missing key '" + where + "." + key + "'", line_of(parent));
    }
    try {
        if (n.IsScalar()) return convert(n.as<double>());
        auto f = n["frequencies"].as<std::vector<double>>();
        auto v = n["values"].as<std::vector<double>>();
        for (double& x : v) x = convert(x);
        return Spectrum(std::move(f), std::move(v));
    } catch (const YAML::Exception&) {
        throw ParseError("config: bad spectrum for '" + where + "." + key + "'", line_of(n));
    } catch (const ValidationError& e) {
        throw ParseError("config: '" + where + "." + key + "': " + e.what(), line_of(n));
    }
}

double identity(double x) { return x; }

Efficiency read_efficiency(const YAML::Node& n, const std::string& where) {
    return {read_spectrum(n, "eta_db", where, db_to_power), get<double>(n, "bath_temperature", where)};
}

AmplifierStage read_amplifier(const YAML::Node& n, const std::string& where) {
    return {read_spectrum(n, "gain_db", where, db_to_power), read_spectrum(n, "added_noise", where, identity),
            read_spectrum(n, "internal_transmission_db", where, db_to_power, 1.0)};
}

}  // namespace

ProjectConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ParseError(std::string("config: ") + e.msg, static_cast<std::size_t>(e.mark.line) + 1);
    }
    if (!root.IsMap()) throw ParseError("config: top level must be a mapping", 1);

    ProjectConfig c;
    {
        auto n = need(root, "film", "");
        c.film = {get<double>(n, "sheet_inductance", "film"), get<double>(n, "thickness", "film"),
                  get<double>(n, "line_width", "film"), get<double>(n, "i_star", "film"),
                  get<double>(n, "i_critical", "film")};
    }
    {
        auto n = need(root, "supercell", "");
        const std::string w = "supercell";
        c.supercell = {get<std::size_t>(n, "n_unloaded", w), get<std::size_t>(n, "n_loaded", w),
                       get<double>(n, "unloaded_z0", w),     get<double>(n, "loaded_z0", w),
                       get<double>(n, "unit_cell_length", w), get<std::size_t>(n, "n_supercells", w)};
    }
    {
        auto n = need(root, "pump", "");
        c.pump.frequency = get<double>(n, "frequency", "pump");
        if (n["power_dbm"])
            c.pump = PumpSpec::from_power_dbm(c.pump.frequency, get<double>(n, "power_dbm", "pump"));
        else
            c.pump.current_amplitude = get<double>(n, "current_amplitude", "pump");
    }
    c.bias = {get<double>(need(root, "bias", ""), "i_dc", "bias"), c.pump.current_amplitude};
    {
        auto n = need(root, "coupler", "");
        const std::string w = "coupler";
        c.coupler = {get<double>(n, "coupled_length", w), get<double>(n, "even_impedance", w),
                     get<double>(n, "odd_impedance", w), get<double>(n, "phase_velocity_even", w),
                     get<double>(n, "phase_velocity_odd", w)};
    }
    {
        auto n = need(root, "bias_tee", "");
        const std::string w = "bias_tee";
        c.bias_tee = {get<double>(n, "series_capacitance", w), get<double>(n, "dc_branch_squares", w),
                      get<double>(n, "dc_branch_width", w), get<double>(n, "dc_branch_impedance", w),
                      get<double>(n, "sheet_inductance", w)};
        const auto term = get_or<std::string>(n, "dc_termination", "matched", w);
        if (term == "matched")
            c.dc_termination = DcTermination::Matched;
        else if (term == "open")
            c.dc_termination = DcTermination::Open;
        else
            throw ParseError("config: bias_tee.dc_termination must be 'matched' or 'open'", line_of(n["dc_termination"]));
    }
    c.component_grid = read_grid(need(root, "component_grid", ""), "component_grid");
    {
        auto n = need(root, "chain", "");
        c.chain.input_loss = read_efficiency(need(n, "input_loss", "chain"), "chain.input_loss");
        c.chain.fsa = read_amplifier(need(n, "fsa", "chain"), "chain.fsa");
        c.chain.interstage_loss = read_efficiency(need(n, "interstage_loss", "chain"), "chain.interstage_loss");
        c.chain.hemt = read_amplifier(need(n, "hemt", "chain"), "chain.hemt");
        c.chain.wamp = read_amplifier(need(n, "wamp", "chain"), "chain.wamp");
    }
    {
        auto n = need(root, "gain", "");
        c.gain.grid = read_grid(need(n, "grid", "gain"), "gain.grid");
        c.gain.off_transmission_db = get_or<double>(n, "off_transmission_db", 0.0, "gain");
        if (n["target_peak_db"]) c.gain.target_peak_db = get<double>(n, "target_peak_db", "gain");
        c.gain.dispersion_points = get_or<std::size_t>(n, "dispersion_points", 20001, "gain");
    }
    {
        auto n = need(root, "noise", "");
        c.noise.grid = read_grid(need(n, "grid", "noise"), "noise.grid");
        c.noise.pump_frequency = get<double>(n, "pump_frequency", "noise");
    }
    {
        auto n = need(root, "calibration", "");
        const std::string w = "calibration";
        auto& k = c.calibration;
        k.pump_frequency = get<double>(n, "pump_frequency", w);
        k.band_center = get<double>(n, "band_center", w);
        k.band_width = get<double>(n, "band_width", w);
        k.fsa_peak_gain_db = get<double>(n, "fsa_peak_gain_db", w);
        k.backend_gain_db = get<double>(n, "backend_gain_db", w);
        k.n_ex = get<double>(n, "n_ex", w);
        k.grid = read_grid(need(n, "grid", w), w + ".grid");
        k.voltage_max = get<double>(n, "voltage_max", w);
        k.voltage_points = get<std::size_t>(n, "voltage_points", w);
        k.noise_fraction = get<double>(n, "noise_fraction", w);
        k.temperature = get<double>(n, "temperature", w);
        k.rbw = get<double>(n, "rbw", w);
        if (auto b = n["asymmetry_bounds"]) {
            auto v = get<std::vector<double>>(n, "asymmetry_bounds", w);
            if (v.size() != 2) throw ParseError("config: calibration.asymmetry_bounds needs two values", line_of(b));
            k.bounds.asymmetry = {v[0], v[1]};
        }
    }
    c.output_dir = get_or<std::string>(root, "output_dir", "out", "");
    return c;
}

ProjectConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void ProjectConfig::validate() const {
    std::vector<std::string> failures;
    auto check = [&](const char* section, auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            failures.push_back(std::string(section) + ": " + e.what());
        }
    };
    check("film", [&] { film.validate(); });
    check("supercell", [&] { supercell.validate(); });
    check("bias", [&] { BiasState{bias.i_dc, pump.current_amplitude}.validate(film); });
    check("pump", [&] {
        if (!(pump.frequency > 0.0)) throw ValidationError("frequency must be > 0");
        if (!(pump.current_amplitude >= 0.0)) throw ValidationError("current amplitude must be >= 0");
    });
    check("coupler", [&] { coupler.validate(); });
    check("bias_tee", [&] { bias_tee.validate(); });
    check("component_grid", [&] { component_grid.grid().validate(); });
    check("chain", [&] { chain.validate(); });
    check("gain.grid", [&] { gain.grid.grid().validate(); });
    check("gain", [&] {
        if (gain.off_transmission_db > 0.0) throw ValidationError("off_transmission_db must be <= 0");
        if (gain.dispersion_points < 2) throw ValidationError("dispersion_points must be >= 2");
        if (gain.grid.stop >= pump.frequency) throw ValidationError("signal grid must lie below the pump");
    });
    check("noise.grid", [&] { noise.grid.grid().validate(); });
    check("noise", [&] {
        if (noise.grid.stop >= noise.pump_frequency) throw ValidationError("signal grid must lie below the pump");
    });
    check("calibration", [&] {
        const auto& k = calibration;
        std::ostringstream e;
        if (k.grid.stop >= k.pump_frequency) e << "; signal grid must lie below the pump";
        if (!(k.band_width > 0.0)) e << "; band_width must be > 0";
        if (!(k.n_ex >= 0.0)) e << "; n_ex must be >= 0";
        if (k.voltage_points < 7) e << "; voltage_points must be >= 7";
        if (!(k.voltage_max > 0.0)) e << "; voltage_max must be > 0";
        if (!(k.noise_fraction >= 0.0)) e << "; noise_fraction must be >= 0";
        if (!(k.temperature >= 0.0)) e << "; temperature must be >= 0";
        if (!(k.rbw > 0.0)) e << "; rbw must be > 0";
        if (!e.str().empty()) throw ValidationError(e.str().substr(2));
        k.grid.grid().validate();
        k.bounds.validate();
    });
    if (output_dir.empty()) failures.push_back("output_dir: must not be empty");
    if (!failures.empty()) {
        std::ostringstream os;
        os << "invalid configuration (" << failures.size() << " problem" << (failures.size() > 1 ? "s" : "") << ")";
        for (const auto& f : failures) os << "\n  - " << f;
        throw ValidationError(os.str());
    }
}

ProjectConfig reference_config() {
    ProjectConfig c;
    c.film = reference_film();
    c.supercell = reference_supercell();
    c.pump = {8.0e9, 75e-6};
    c.bias = {0.6e-3, c.pump.current_amplitude};
    c.coupler = reference_coupler();
    c.bias_tee = reference_bias_tee();
    c.dc_termination = DcTermination::Matched;
    c.component_grid = {0.01e9, 30e9, 3000};
    c.chain = example_chain();
    c.gain = {{1e9, 7e9, 61}, -2.5, 21.0, 20001};
    c.noise = {{5.6e9, 8.4e9, 29}, 14e9};
    c.calibration.pump_frequency = 14e9;
    c.calibration.band_center = 7e9;
    c.calibration.band_width = 2.8e9;
    c.calibration.fsa_peak_gain_db = 18.0;
    c.calibration.backend_gain_db = 80.0;
    c.calibration.n_ex = 2.9;
    c.calibration.grid = {5.0e9, 9.0e9, 40};
    c.calibration.voltage_max = 600e-6;
    c.calibration.voltage_points = 25;
    c.calibration.noise_fraction = 0.0;
    c.calibration.temperature = 0.03;
    c.calibration.rbw = 1e6;
    return c;
}

}  // namespace kitamp
