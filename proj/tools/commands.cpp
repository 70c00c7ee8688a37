#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "kitamp/csv.hpp"
#include "kitamp/dispersion.hpp"
#include "kitamp/errors.hpp"
#include "kitamp/touchstone.hpp"
#include "kitamp/units.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace kitamp::cli {
namespace {

fs::path prepare_dir(const Options& opt, const char* command) {
    const fs::path dir = opt.out_dir / command;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + upto, '\n'));
        throw ParseError(path.string() + ": " + e.what(), line);
    }
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct Plot {
    std::string id, title, data, x;
    std::vector<std::string> y;
    std::string x_label, y_label;
};

void write_manifest(const fs::path& dir, const char* command, const std::vector<Plot>& plots) {
    json list = json::array();
    for (const auto& p : plots)
        list.push_back({{"id", p.id},
                        {"title", p.title},
                        {"data", p.data},
                        {"x", p.x},
                        {"y", p.y},
                        {"x_label", p.x_label},
                        {"y_label", p.y_label}});
    write_json(dir / "manifest.json", {{"command", command}, {"format", "csv"}, {"plots", list}});
}

FrequencyGrid grid_or(const Options& opt, const GridSpec& fallback) {
    const auto g = (opt.grid ? *opt.grid : fallback).grid();
    g.validate();
    return g;
}

double inductance_scale(const ProjectConfig& c) {
    return kinetic_inductance(c.film, c.bias.i_dc) / c.film.sheet_inductance;
}

json section_json(const LineSection& s) {
    return {{"z0_ohm", s.char_impedance},
            {"length_m", s.length},
            {"inductance_per_length_h_per_m", s.inductance_per_length},
            {"capacitance_per_length_f_per_m", s.capacitance_per_length},
            {"phase_velocity_m_per_s", s.phase_velocity()}};
}

// Parabolic FSA true gain (dB) at one frequency.
double fsa_gain_db(const CalibrationSettings& k, double f) {
    return parabolic_gain_db(FrequencyGrid{{f}}, k.band_center, k.band_width, k.fsa_peak_gain_db).front();
}

}  // namespace

GridSpec parse_grid(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    if (parts.size() != 3) throw ValidationError("--grid expects START:STOP:POINTS, got '" + text + "'");
    GridSpec g;
    try {
        g.start = parse_double(parts[0], 1);
        g.stop = parse_double(parts[1], 1);
        const double n = parse_double(parts[2], 1);
        if (!(n >= 1.0) || n != std::floor(n)) throw ValidationError("");
        g.points = static_cast<std::size_t>(n);
    } catch (const Error&) {
        throw ValidationError("--grid expects START:STOP:POINTS with a whole number of points, got '" + text + "'");
    }
    g.grid().validate();
    return g;
}

Interval parse_bounds(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw ValidationError("--bounds expects lo,hi, got '" + text + "'");
    Interval b{};
    try {
        b.lo = parse_double(text.substr(0, comma), 1);
        b.hi = parse_double(text.substr(comma + 1), 1);
    } catch (const Error&) {
        throw ValidationError("--bounds expects two numbers lo,hi, got '" + text + "'");
    }
    if (!(b.lo < b.hi)) throw ValidationError("--bounds requires lo < hi");
    return b;
}

int cmd_design(const Options& opt) {
    const auto& c = opt.config;
    const auto dir = prepare_dir(opt, "design");
    const auto grid = grid_or(opt, {1e6, 30e9, 30000});
    const double scale = inductance_scale(c);

    const auto sections = supercell_sections(c.supercell, c.film, scale);
    const auto chain = supercell_chain(c.supercell, c.film, grid, scale);
    const auto disp = bloch_dispersion(chain.supercell, c.supercell.supercell_length());
    const auto bands = disp.stopbands();

    CsvTable t;
    t.header = {"frequency_hz", "wavenumber_rad_per_m", "attenuation_np_per_m", "in_stopband"};
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto& p = disp.points()[k];
        t.rows.push_back({format_double(grid[k]), format_double(p.wavenumber), format_double(p.attenuation),
                          p.in_stopband ? "1" : "0"});
    }
    write_csv_file((dir / "dispersion.csv").string(), t);

    json sb = json::array();
    for (std::size_t k = 0; k < std::min<std::size_t>(2, bands.size()); ++k)
        sb.push_back({{"lower_hz", bands[k].lower}, {"upper_hz", bands[k].upper}, {"center_hz", bands[k].center()}});
    const json report = {
        {"total_length_m", c.supercell.total_length()},
        {"supercell_length_m", c.supercell.supercell_length()},
        {"unit_cell_length_m", c.supercell.unit_cell_length},
        {"n_supercells", c.supercell.n_supercells},
        {"cells_per_supercell", {{"unloaded", c.supercell.n_unloaded}, {"loaded", c.supercell.n_loaded}}},
        {"total_cells", c.supercell.n_supercells * (c.supercell.n_unloaded + c.supercell.n_loaded)},
        {"i_dc_a", c.bias.i_dc},
        {"inductance_scale", scale},
        {"sections", {{"unloaded", section_json(sections.unloaded)}, {"loaded", section_json(sections.loaded)}}},
        {"stopbands", sb}};
    write_json(dir / "design.json", report);
    write_manifest(dir, "design",
                   {{"dispersion", "Bloch wavenumber", "dispersion.csv", "frequency_hz", {"wavenumber_rad_per_m"},
                     "Frequency (Hz)", "k (rad/m)"},
                    {"attenuation", "Stopband attenuation", "dispersion.csv", "frequency_hz",
                     {"attenuation_np_per_m"}, "Frequency (Hz)", "alpha (Np/m)"}});

    std::cout << "total length: " << c.supercell.total_length() * 100.0 << " cm ("
              << c.supercell.n_supercells << " supercells)\n";
    for (std::size_t k = 0; k < std::min<std::size_t>(2, bands.size()); ++k)
        std::cout << "stopband " << k + 1 << ": " << bands[k].lower / 1e9 << " - " << bands[k].upper / 1e9
                  << " GHz\n";
    return 0;
}

int cmd_gain(const Options& opt) {
    const auto& c = opt.config;
    const auto dir = prepare_dir(opt, "gain");
    const auto grid = grid_or(opt, c.gain.grid);
    if (grid.points.back() >= c.pump.frequency) throw ValidationError("gain grid must lie below the pump");

    const MediumModel medium(Medium{c.supercell, c.film, c.bias.i_dc}, 3.0 * c.pump.frequency,
                             c.gain.dispersion_points);
    PumpSpec pump = c.pump;
    bool tuned = false;
    if (c.gain.target_peak_db) {
        const double i_max = 0.95 * (c.film.i_critical - std::abs(c.bias.i_dc));
        pump.current_amplitude = tune_pump_amplitude(medium, pump.frequency, grid, *c.gain.target_peak_db, i_max);
        tuned = true;
    }
    const std::vector<double> off(grid.size(), c.gain.off_transmission_db);
    const auto profile = gain_profile(medium, pump, grid, off);
    write_csv_file((dir / "gain.csv").string(), gain_profile_to_csv(profile));

    CsvTable dk;
    dk.header = {"frequency_hz", "phase_mismatch_rad_per_m"};
    for (std::size_t k = 0; k < grid.size(); ++k) {
        try {
            dk.rows.push_back({format_double(grid[k]),
                               format_double(phase_mismatch(medium.dispersion(), pump.frequency, grid[k]))});
        } catch (const StopbandError&) {
            // Signal or idler in a stopband: no real wavenumber to report.
        }
    }
    write_csv_file((dir / "phase_mismatch.csv").string(), dk);

    json summary = {{"pump_frequency_hz", pump.frequency},
                    {"pump_current_a", pump.current_amplitude},
                    {"pump_power_dbm", pump.power_dbm()},
                    {"pump_tuned", tuned},
                    {"i_dc_a", c.bias.i_dc},
                    {"medium_length_m", medium.length()},
                    {"off_transmission_db", c.gain.off_transmission_db}};
    int status = 0;
    try {
        const auto band = bandwidth_3db(profile);
        summary["band"] = band_summary_json(band);
        std::cout << "peak on/off gain " << band.peak_db - c.gain.off_transmission_db << " dB at "
                  << band.peak_frequency / 1e9 << " GHz; 3 dB band " << band.lower / 1e9 << " - "
                  << band.upper / 1e9 << " GHz; median true gain " << band.median_true_gain_db << " dB\n";
    } catch (const ShapeError& e) {
        summary["band"] = nullptr;
        summary["band_error"] = e.what();
        std::cerr << "gain: " << e.what() << '\n';
        status = 2;
    }
    write_json(dir / "summary.json", summary);
    write_manifest(dir, "gain",
                   {{"gain", "On/off and true gain", "gain.csv", "frequency_hz", {"on_off_db", "true_gain_db"},
                     "Frequency (Hz)", "Gain (dB)"},
                    {"phase_mismatch", "Linear phase mismatch", "phase_mismatch.csv", "frequency_hz",
                     {"phase_mismatch_rad_per_m"}, "Frequency (Hz)", "dk (rad/m)"}});
    return status;
}

int cmd_components(const Options& opt) {
    const auto& c = opt.config;
    const auto dir = prepare_dir(opt, "components");
    const auto grid = grid_or(opt, c.component_grid);

    const auto coupler = coupler_sparams(c.coupler, grid);
    const auto m = coupler_metrics(coupler);
    write_touchstone_file((dir / "coupler.s4p").string(), coupler, {"coupled-line directional coupler"});
    CsvTable ct;
    ct.header = {"frequency_hz", "through_db", "forward_db", "reverse_db", "directivity_db"};
    for (std::size_t k = 0; k < grid.size(); ++k)
        ct.rows.push_back({format_double(grid[k]), format_double(m.through_db[k]), format_double(m.forward_db[k]),
                           format_double(m.reverse_db[k]), format_double(m.directivity_db[k])});
    write_csv_file((dir / "coupler.csv").string(), ct);

    const auto tee = bias_tee_sparams(c.bias_tee, grid);
    const auto through = bias_tee_through(c.bias_tee, grid, c.dc_termination);
    write_touchstone_file((dir / "bias_tee.s3p").string(), tee,
                          {"bias tee: 1 rf in, 2 rf+dc, 3 dc"});
    write_touchstone_file((dir / "bias_tee_through.s2p").string(), through,
                          {"bias tee rf path with the dc port terminated"});
    CsvTable bt;
    bt.header = {"frequency_hz", "rf_through_db", "dc_leak_db", "terminated_through_db"};
    for (std::size_t k = 0; k < grid.size(); ++k)
        bt.rows.push_back({format_double(grid[k]), format_double(tee.magnitude_db(k, 2, 1)),
                           format_double(tee.magnitude_db(k, 3, 2)), format_double(through.magnitude_db(k, 2, 1))});
    write_csv_file((dir / "bias_tee.csv").string(), bt);

    const double f_max = grid.points.back();
    const auto res_matched = dc_branch_resonances(c.bias_tee, f_max, DcTermination::Matched);
    const auto res_open = dc_branch_resonances(c.bias_tee, f_max, DcTermination::Open);

    // Forward coupling at the grid point closest to the quarter-wave centre.
    const double f_center = 0.25 * c.coupler.effective_phase_velocity_even / c.coupler.coupled_length;
    std::size_t kc = 0;
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (std::abs(grid[k] - f_center) < std::abs(grid[kc] - f_center)) kc = k;

    json dm = json::array();
    for (double d : m.directivity_db) dm.push_back(num(d));
    const json report = {
        {"coupler",
         {{"coupling_coefficient", c.coupler.coupling_coefficient()},
          {"even_impedance_ohm", c.coupler.even_impedance},
          {"odd_impedance_ohm", c.coupler.odd_impedance},
          {"quarter_wave_frequency_hz", f_center},
          {"forward_db_near_center", num(m.forward_db[kc])},
          {"forward_db_near_center_frequency_hz", grid[kc]},
          {"min_directivity_db", num(*std::min_element(m.directivity_db.begin(), m.directivity_db.end()))}}},
        {"bias_tee",
         {{"series_capacitance_f", c.bias_tee.series_capacitance},
          {"corner_hz", series_capacitor_corner(c.bias_tee.series_capacitance)},
          {"corner_numeric_hz", series_capacitor_corner_numeric(c.bias_tee.series_capacitance)},
          {"branch_length_m", c.bias_tee.branch_length()},
          {"branch_inductance_h", c.bias_tee.branch_total_inductance()},
          {"dc_termination", c.dc_termination == DcTermination::Open ? "open" : "matched"},
          {"resonances_matched_hz", res_matched},
          {"resonances_open_hz", res_open}}}};
    write_json(dir / "components.json", report);
    write_manifest(dir, "components",
                   {{"coupler", "Coupler response", "coupler.csv", "frequency_hz",
                     {"through_db", "forward_db", "reverse_db"}, "Frequency (Hz)", "|S| (dB)"},
                    {"bias_tee", "Bias tee response", "bias_tee.csv", "frequency_hz",
                     {"rf_through_db", "dc_leak_db", "terminated_through_db"}, "Frequency (Hz)", "|S| (dB)"}});

    std::cout << "coupler forward coupling at " << grid[kc] / 1e9 << " GHz: " << m.forward_db[kc] << " dB\n"
              << "bias tee corner: " << series_capacitor_corner(c.bias_tee.series_capacitance) / 1e6 << " MHz\n";
    if (!res_matched.empty())
        std::cout << "dc branch fundamental (matched): " << res_matched.front() / 1e9 << " GHz\n";
    return 0;
}

int cmd_noise_budget(const Options& opt) {
    const auto& c = opt.config;
    const auto dir = prepare_dir(opt, "noise-budget");
    const auto grid = grid_or(opt, c.noise.grid);
    const double fp = c.noise.pump_frequency;
    if (grid.points.back() >= fp) throw ValidationError("noise grid must lie below the pump");

    CsvTable t;
    t.header = {"frequency_hz", "idler_frequency_hz", "fsa_true_gain_db", "asymmetry", "input_loss_noise",
                "fsa_excess_noise", "hemt_input_referred", "n_sys_limit", "n_sys_exact", "high_gain_discrepancy",
                "limit_valid"};
    std::vector<double> limits, exacts;
    std::size_t invalid = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double fs = grid[k], fi = fp - fs;
        const auto s = system_noise(c.chain, fs, fi);
        const double vac_s = 0.5, vac_i = 0.5;
        const auto out = chain_output(c.chain, vac_s, vac_i, fs, fi);
        const double loss_part =
            effective_excess_noise(c.chain.input_loss, fs, fi, 0.0, 0.0, out.asymmetry);
        limits.push_back(s.limit);
        exacts.push_back(s.exact);
        if (!s.limit_valid) ++invalid;
        t.rows.push_back({format_double(fs), format_double(fi), format_double(s.fsa_true_gain_db),
                          format_double(out.asymmetry), format_double(loss_part),
                          format_double(out.excess_noise - loss_part), format_double(s.hemt_input_referred),
                          format_double(s.limit), format_double(s.exact),
                          format_double(high_gain_discrepancy(c.chain, vac_s, vac_i, fs, fi)),
                          s.limit_valid ? "1" : "0"});
    }
    write_csv_file((dir / "noise_budget.csv").string(), t);

    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    const json summary = {{"pump_frequency_hz", fp},
                          {"median_n_sys_limit", median(limits)},
                          {"median_n_sys_exact", median(exacts)},
                          {"points", grid.size()},
                          {"points_below_gain_threshold", invalid}};
    write_json(dir / "summary.json", summary);
    write_manifest(dir, "noise-budget",
                   {{"n_sys", "System noise", "noise_budget.csv", "frequency_hz", {"n_sys_limit", "n_sys_exact"},
                     "Frequency (Hz)", "N_sys (quanta)"},
                    {"contributions", "Input-referred contributions", "noise_budget.csv", "frequency_hz",
                     {"input_loss_noise", "fsa_excess_noise", "hemt_input_referred"}, "Frequency (Hz)",
                     "quanta"}});
    std::cout << "median system noise: " << median(limits) << " quanta (high-gain limit), " << median(exacts)
              << " quanta (full cascade)\n";
    if (invalid) std::cout << invalid << " point(s) have FSA true gain below 16 dB\n";
    return 0;
}

int cmd_synth(const Options& opt) {
    const auto& k = opt.config.calibration;
    const auto dir = prepare_dir(opt, "synth");
    const auto grid = grid_or(opt, k.grid);
    if (grid.points.back() >= k.pump_frequency) throw ValidationError("calibration grid must lie below the pump");
    const auto volts = symmetric_voltages(k.voltage_max, k.voltage_points);

    json truth = json::array();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double fs = grid[i], fi = k.pump_frequency - fs;
        const double g1s = fsa_gain_db(k, fs), g1i = fsa_gain_db(k, fi);
        const FitParams p{db_to_power(k.backend_gain_db + g1s), db_to_power(g1i - g1s), k.n_ex};
        const SyntheticSpec spec{p, volts, k.noise_fraction, opt.seed + i};
        const auto sweep = synthesize_sweep(spec, fs, fi, k.temperature, k.rbw);

        char stem[32];
        std::snprintf(stem, sizeof stem, "sweep_%03zu", i);
        write_csv_file((dir / (std::string(stem) + ".csv")).string(), sweep_to_csv(sweep));
        write_json(dir / (std::string(stem) + ".json"), sweep_sidecar(sweep));
        truth.push_back({{"file", std::string(stem) + ".csv"},
                         {"frequency_hz", fs},
                         {"idler_frequency_hz", fi},
                         {"g_sys", p.g_sys},
                         {"asymmetry", p.asymmetry},
                         {"n_ex", p.n_ex},
                         {"fsa_true_gain_db", g1s},
                         {"seed", spec.seed}});
    }
    write_json(dir / "truth.json", {{"noise_fraction", k.noise_fraction}, {"sweeps", truth}});
    write_manifest(dir, "synth",
                   {{"sweep_000", "First synthetic sweep", "sweep_000.csv", "voltage_v", {"power_w"},
                     "Junction bias (V)", "Output power (W)"}});
    std::cout << "wrote " << grid.size() << " sweeps to " << dir.string() << '\n';
    return 0;
}

int cmd_fit(const Options& opt, const std::vector<std::string>& inputs) {
    const auto& k = opt.config.calibration;
    std::vector<fs::path> files;
    std::vector<fs::path> roots;
    for (const auto& s : inputs) roots.emplace_back(s);
    if (roots.empty()) roots.push_back(opt.out_dir / "synth");
    for (const auto& r : roots) {
        if (fs::is_directory(r)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::directory_iterator(r)) {
                const auto name = e.path().filename().string();
                if (e.path().extension() == ".csv" && name.rfind("sweep_", 0) == 0) found.push_back(e.path());
            }
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else if (fs::exists(r)) {
            files.push_back(r);
        } else {
            throw IoError("no such sweep file or directory: " + r.string());
        }
    }
    if (files.empty()) throw IoError("no sweep files found");

    std::vector<NoiseSweep> sweeps;
    for (const auto& f : files) {
        auto sidecar = f;
        sidecar.replace_extension(".json");
        sweeps.push_back(sweep_from_files(read_csv_file(f.string()), read_json(sidecar)));
    }

    // True FSA gains, when the sweeps come with a synth truth table.
    std::vector<double> gains;
    std::map<std::string, double> by_file;
    for (const auto& r : roots) {
        const auto truth = (fs::is_directory(r) ? r : r.parent_path()) / "truth.json";
        if (!fs::exists(truth)) continue;
        const json table = read_json(truth);
        for (const auto& e : table.at("sweeps"))
            by_file[fs::weakly_canonical(truth.parent_path() / e.at("file").get<std::string>()).string()] =
                e.at("fsa_true_gain_db").get<double>();
    }
    for (const auto& f : files) {
        const auto it = by_file.find(fs::weakly_canonical(f).string());
        if (it == by_file.end()) {
            gains.clear();
            break;
        }
        gains.push_back(it->second);
    }

    FitBounds bounds = k.bounds;
    if (opt.asymmetry) bounds.asymmetry = *opt.asymmetry;
    bounds.validate();
    const double lo = k.band_center - 0.5 * k.band_width, hi = k.band_center + 0.5 * k.band_width;
    const auto band = fit_band(sweeps, bounds, lo, hi, gains);

    const auto dir = prepare_dir(opt, "fit");
    CsvTable t;
    t.header = {"frequency_hz", "g_sys_db", "asymmetry", "n_ex", "n_sys", "residual_rms_w", "at_bound", "error"};
    for (std::size_t i = 0; i < files.size(); ++i) {
        const auto stem = files[i].stem().string();
        if (const auto& r = band.results[i]) {
            write_json(dir / ("fit_" + stem + ".json"), fit_result_json(*r));
            const bool edge = r->at_bound[0] || r->at_bound[1] || r->at_bound[2];
            t.rows.push_back({format_double(r->frequency), format_double(r->g_sys_db), format_double(r->asymmetry),
                              format_double(r->n_ex), format_double(r->n_sys), format_double(r->residual_rms),
                              edge ? "1" : "0", ""});
        } else {
            t.rows.push_back({format_double(band.frequencies[i]), "nan", "nan", "nan", "nan", "nan", "0",
                              band.errors[i]});
        }
    }
    write_csv_file((dir / "fits.csv").string(), t);
    auto summary = band_fit_json(band);
    summary["asymmetry_bounds"] = {bounds.asymmetry.lo, bounds.asymmetry.hi};
    write_json(dir / "band.json", summary);
    write_manifest(dir, "fit",
                   {{"n_sys", "Extracted system noise", "fits.csv", "frequency_hz", {"n_sys"}, "Frequency (Hz)",
                     "N_sys (quanta)"},
                    {"g_sys", "Extracted system gain", "fits.csv", "frequency_hz", {"g_sys_db"}, "Frequency (Hz)",
                     "G_sys (dB)"}});

    std::cout << "band " << lo / 1e9 << " - " << hi / 1e9 << " GHz: median N_sys " << band.median_n_sys
              << " quanta over " << band.points_in_band << " points";
    if (std::isfinite(band.median_true_gain_db)) std::cout << ", median FSA gain " << band.median_true_gain_db << " dB";
    std::cout << '\n';
    const auto failed = static_cast<std::size_t>(
        std::count_if(band.errors.begin(), band.errors.end(), [](const std::string& e) { return !e.empty(); }));
    if (failed) {
        std::cerr << failed << " fit(s) failed\n";
        for (std::size_t i = 0; i < files.size(); ++i)
            if (!band.errors[i].empty()) std::cerr << "  " << files[i].string() << ": " << band.errors[i] << '\n';
        return 2;
    }
    return 0;
}

}  // namespace kitamp::cli
