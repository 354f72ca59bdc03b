#pragma once

#include <string>
#include <vector>

#include "shearlab/types.hpp"

namespace shearlab {

struct SvgSeries {
  std::string label;
  std::vector<Real> x, y;
};

/// Minimal polyline chart; log10 axes on request (nonpositive values are
/// skipped). No external plotting dependency.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<SvgSeries>& series, bool logx = false, bool logy = false);

}  // namespace shearlab
