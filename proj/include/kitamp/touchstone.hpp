#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "kitamp/csv.hpp"
#include "kitamp/network.hpp"

namespace kitamp {

/// Touchstone v1 writer: "# Hz S RI R <z_ref>", full precision. 2-port data
/// uses the v1 column order S11 S21 S12 S22; larger networks are written
/// row by row, four pairs per line.
void write_touchstone(std::ostream& out, const NPortSParams& s, const std::vector<std::string>& comments = {});
void write_touchstone_file(const std::string& path, const NPortSParams& s,
                           const std::vector<std::string>& comments = {});

/// Reads v1 data in RI, MA or DB format with Hz/kHz/MHz/GHz units. The port
/// count must be given; the file variant takes it from the .sNp extension.
NPortSParams read_touchstone(std::istream& in, std::size_t n_ports);
NPortSParams read_touchstone_file(const std::string& path);

/// Columns: frequency_hz, then S<i><j>_re, S<i><j>_im in row-major order.
CsvTable sparams_to_csv(const NPortSParams& s);
NPortSParams sparams_from_csv(const CsvTable& table, double z_ref = 50.0);

}  // namespace kitamp
