#pragma once

#include <map>
#include <string>
#include <vector>

#include "shearlab/solver.hpp"
#include "shearlab/types.hpp"

namespace shearlab {

/// Full-precision scientific formatting used in every CSV ("%.17e");
/// identical inputs reproduce identical bytes.
std::string format_double(Real v);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<Real>>& rows);

/// Fixed schema: t,l2sq,h1sq,cross_term,functional,certificate_margin,boundary_mass
void write_trajectory_csv(const std::string& path, const TrajectoryRecord& rec);
TrajectoryRecord read_trajectory_csv(const std::string& path);

/// Ordered key = value text block (manifest / summary files).
void write_key_value(const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& items);
std::map<std::string, std::string> read_key_value(const std::string& path);

void ensure_directory(const std::string& path);

}  // namespace shearlab
