#include "shearlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "shearlab/errors.hpp"

namespace shearlab {
namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<SvgSeries>& series, bool logx, bool logy) {
  const Real width = 720, height = 480;
  const Real ml = 70, mr = 20, mt = 40, mb = 50;

  auto tx = [&](Real v) { return logx ? std::log10(v) : v; };
  auto ty = [&](Real v) { return logy ? std::log10(v) : v; };

  Real xmin = std::numeric_limits<Real>::infinity(), xmax = -xmin;
  Real ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      if ((logx && s.x[i] <= 0) || (logy && s.y[i] <= 0)) continue;
      xmin = std::min(xmin, tx(s.x[i]));
      xmax = std::max(xmax, tx(s.x[i]));
      ymin = std::min(ymin, ty(s.y[i]));
      ymax = std::max(ymax, ty(s.y[i]));
    }
  }
  if (!(xmin < xmax)) xmax = xmin + 1;
  if (!(ymin < ymax)) ymax = ymin + 1;

  auto px = [&](Real v) { return ml + (tx(v) - xmin) / (xmax - xmin) * (width - ml - mr); };
  auto py = [&](Real v) { return height - mb - (ty(v) - ymin) / (ymax - ymin) * (height - mt - mb); };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw NumericalError("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
      << title << "</text>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel << (logx ? " (log10)" : "")
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << height / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " << height / 2
      << ")\">" << ylabel << (logy ? " (log10)" : "") << "</text>\n";
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << width - ml - mr
      << "\" height=\"" << height - mt - mb << "\" fill=\"none\" stroke=\"#444\"/>\n";

  for (int tick = 0; tick <= 4; ++tick) {
    const Real fx = xmin + (xmax - xmin) * tick / 4;
    const Real fy = ymin + (ymax - ymin) * tick / 4;
    const Real gx = ml + (width - ml - mr) * tick / 4;
    const Real gy = height - mb - (height - mt - mb) * tick / 4;
    out << "<text x=\"" << gx << "\" y=\"" << height - mb + 16
        << "\" text-anchor=\"middle\" font-size=\"10\">" << fx << "</text>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << gy + 3
        << "\" text-anchor=\"end\" font-size=\"10\">" << fy << "</text>\n";
  }

  int color = 0;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << kPalette[color % 6]
        << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i) {
      if ((logx && s.x[i] <= 0) || (logy && s.y[i] <= 0)) continue;
      out << px(s.x[i]) << "," << py(s.y[i]) << " ";
    }
    out << "\"/>\n";
    out << "<text x=\"" << width - mr - 8 << "\" y=\"" << mt + 16 + 14 * color
        << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << kPalette[color % 6] << "\">"
        << s.label << "</text>\n";
    ++color;
  }
  out << "</svg>\n";
}

}  // namespace shearlab
