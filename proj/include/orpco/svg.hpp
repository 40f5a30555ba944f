#ifndef ORPCO_SVG_HPP
#define ORPCO_SVG_HPP

#include <string>
#include <vector>

namespace orpco {

/// Minimal batch plotter: line curves with optional error band and overlaid
/// histograms, written as standalone SVG files.
struct SvgSeries {
    std::string label;
    std::vector<double> x, y;
    std::vector<double> band; // optional +- band around y
    std::string color = "#1f77b4";
};

void write_svg_curves(const std::string& path, const std::string& title,
                      const std::vector<SvgSeries>& series);

struct SvgHistogram {
    std::string label;
    std::vector<double> values;
    std::string color = "#1f77b4";
};

void write_svg_histograms(const std::string& path, const std::string& title,
                          const std::vector<SvgHistogram>& hists, int bins = 40);

} // namespace orpco

#endif
