#include "shearlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "shearlab/errors.hpp"

namespace shearlab {

std::string format_double(Real v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17e", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<Real>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NumericalError("cannot write " + path);
  for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << "\n";
  }
}

void write_trajectory_csv(const std::string& path, const TrajectoryRecord& rec) {
  std::vector<std::vector<Real>> rows;
  rows.reserve(rec.size());
  for (size_t i = 0; i < rec.size(); ++i)
    rows.push_back({rec.t[i], rec.l2sq[i], rec.h1sq[i], rec.cross[i], rec.functional[i],
                    rec.certificate_margin[i], rec.boundary_mass[i]});
  write_csv(path, {"t", "l2sq", "h1sq", "cross_term", "functional", "certificate_margin",
                   "boundary_mass"},
            rows);
}

TrajectoryRecord read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trajectory " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty trajectory " + path);
  TrajectoryRecord rec;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Real vals[7];
    for (int c = 0; c < 7; ++c) {
      if (!std::getline(ss, cell, ',')) throw ConfigError("short row in " + path);
      vals[c] = std::stod(cell);
    }
    rec.t.push_back(vals[0]);
    rec.l2sq.push_back(vals[1]);
    rec.h1sq.push_back(vals[2]);
    rec.cross.push_back(vals[3]);
    rec.functional.push_back(vals[4]);
    rec.certificate_margin.push_back(vals[5]);
    rec.boundary_mass.push_back(vals[6]);
  }
  if (!rec.t.empty()) rec.initial_l2 = std::sqrt(std::max(rec.l2sq.front(), Real(0)));
  return rec;
}

void write_key_value(const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& items) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NumericalError("cannot write " + path);
  for (const auto& [k, v] : items) out << k << " = " << v << "\n";
}

std::map<std::string, std::string> read_key_value(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw NumericalError("cannot create directory " + path + ": " + ec.message());
}

}  // namespace shearlab
