#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kitamp/config.hpp"

namespace kitamp::cli {

/// Flags shared by every command, already parsed.
struct Options {
    ProjectConfig config;
    std::filesystem::path out_dir;
    std::uint64_t seed = 0;
    std::optional<GridSpec> grid;       // replaces the command's own grid
    std::optional<Interval> asymmetry;  // replaces calibration.bounds.asymmetry
};

/// Parses "START:STOP:POINTS" (Hz). Throws ValidationError.
GridSpec parse_grid(const std::string& text);
/// Parses "lo,hi". Throws ValidationError.
Interval parse_bounds(const std::string& text);

// Each command writes its files under out_dir/<command>/ together with a
// plot manifest, prints a short report, and returns the process exit code.
int cmd_design(const Options& opt);
int cmd_gain(const Options& opt);
int cmd_components(const Options& opt);
int cmd_noise_budget(const Options& opt);
int cmd_synth(const Options& opt);
/// `inputs` holds sweep CSV files or directories of them; empty means the
/// synth output directory.
int cmd_fit(const Options& opt, const std::vector<std::string>& inputs);

}  // namespace kitamp::cli
