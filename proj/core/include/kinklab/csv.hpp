#pragma once

#include "kinklab/grid.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace kinklab {

/// Shortest representation that round-trips (17 significant digits).
std::string format_real(double v);

/// Writes a header line `# a,b,...` followed by one row per entry of the columns.
void write_columns(const std::filesystem::path& path, const std::vector<std::string>& names,
                   const std::vector<std::vector<double>>& columns);

/// Reads a file produced by write_columns; returns the columns in order.
std::vector<std::vector<double>> read_columns(const std::filesystem::path& path,
                                              std::vector<std::string>* names = nullptr);

void write_csv(const std::filesystem::path& path, const GridFunction& f);
void write_csv(const std::filesystem::path& path, const LatticeSeq& a);

} // namespace kinklab
