#include "kinklab/csv.hpp"

#include "kinklab/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace kinklab {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_columns(const std::filesystem::path& path, const std::vector<std::string>& names,
                   const std::vector<std::vector<double>>& columns) {
  if (names.size() != columns.size()) throw ConfigError("write_columns: name/column mismatch");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw ConfigError("write_columns: ragged columns");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "# ";
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  out << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < columns.size(); ++j)
      out << (j ? "," : "") << format_real(columns[j][r]);
    out << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<std::vector<double>> read_columns(const std::filesystem::path& path,
                                              std::vector<std::string>* names) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::vector<std::vector<double>> cols;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (!header && names) {
        names->clear();
        std::stringstream ss(line.substr(line.find_first_not_of("# ")));
        std::string tok;
        while (std::getline(ss, tok, ',')) names->push_back(tok);
      }
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string tok;
    std::size_t j = 0;
    while (std::getline(ss, tok, ',')) {
      if (cols.size() <= j) cols.emplace_back();
      cols[j++].push_back(std::stod(tok));
    }
  }
  return cols;
}

void write_csv(const std::filesystem::path& path, const GridFunction& f) {
  std::vector<double> x(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) x[j] = f.grid().x(j);
  write_columns(path, {"x", "value"}, {x, std::vector<double>(f.values().begin(), f.values().end())});
}

void write_csv(const std::filesystem::path& path, const LatticeSeq& a) {
  std::vector<double> n(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) n[j] = static_cast<double>(a.n_min() + static_cast<long>(j));
  write_columns(path, {"n", "value"}, {n, std::vector<double>(a.values().begin(), a.values().end())});
}

} // namespace kinklab
