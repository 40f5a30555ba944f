#include "orpco/svg.hpp"

#include "orpco/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace orpco {

namespace {

constexpr double kw = 640, kh = 420, kpad = 56;

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void grow(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (!(hi > lo)) {
            lo -= 1.0;
            hi += 1.0;
        }
        const double m = 0.05 * (hi - lo);
        lo -= m;
        hi += m;
    }
};

double sx(double v, const Range& r) { return kpad + (v - r.lo) / (r.hi - r.lo) * (kw - 2 * kpad); }
double sy(double v, const Range& r) {
    return kh - kpad - (v - r.lo) / (r.hi - r.lo) * (kh - 2 * kpad);
}

void open_svg(std::ofstream& out, const std::string& path, const std::string& title) {
    out.open(path);
    if (!out) throw DataError("cannot write plot file: " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kw << "' height='" << kh << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << "<text x='" << kw / 2 << "' y='24' text-anchor='middle' font-size='15'>" << title
        << "</text>\n";
}

void axes(std::ofstream& out, const Range& rx, const Range& ry) {
    out << "<line x1='" << kpad << "' y1='" << kh - kpad << "' x2='" << kw - kpad << "' y2='"
        << kh - kpad << "' stroke='black'/>\n"
        << "<line x1='" << kpad << "' y1='" << kpad << "' x2='" << kpad << "' y2='" << kh - kpad
        << "' stroke='black'/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = rx.lo + (rx.hi - rx.lo) * i / 4.0;
        const double fy = ry.lo + (ry.hi - ry.lo) * i / 4.0;
        out << "<text x='" << sx(fx, rx) << "' y='" << kh - kpad + 18
            << "' text-anchor='middle' font-size='11'>" << std::round(fx * 1000) / 1000
            << "</text>\n"
            << "<text x='" << kpad - 6 << "' y='" << sy(fy, ry) + 4
            << "' text-anchor='end' font-size='11'>" << std::round(fy * 1000) / 1000 << "</text>\n";
    }
}

} // namespace

void write_svg_curves(const std::string& path, const std::string& title,
                      const std::vector<SvgSeries>& series) {
    Range rx, ry;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            rx.grow(s.x[i]);
            const double band = i < s.band.size() ? s.band[i] : 0.0;
            ry.grow(s.y[i] - band);
            ry.grow(s.y[i] + band);
        }
    rx.pad();
    ry.pad();
    std::ofstream out;
    open_svg(out, path, title);
    axes(out, rx, ry);
    int li = 0;
    for (const auto& s : series) {
        if (!s.band.empty()) {
            std::ostringstream poly;
            for (std::size_t i = 0; i < s.x.size(); ++i)
                poly << sx(s.x[i], rx) << "," << sy(s.y[i] + s.band[i], ry) << " ";
            for (std::size_t i = s.x.size(); i-- > 0;)
                poly << sx(s.x[i], rx) << "," << sy(s.y[i] - s.band[i], ry) << " ";
            out << "<polygon points='" << poly.str() << "' fill='" << s.color
                << "' fill-opacity='0.15' stroke='none'/>\n";
        }
        std::ostringstream pts;
        for (std::size_t i = 0; i < s.x.size(); ++i)
            pts << sx(s.x[i], rx) << "," << sy(s.y[i], ry) << " ";
        out << "<polyline points='" << pts.str() << "' fill='none' stroke='" << s.color
            << "' stroke-width='2'/>\n";
        out << "<text x='" << kw - kpad - 4 << "' y='" << kpad + 16 * li++
            << "' text-anchor='end' font-size='12' fill='" << s.color << "'>" << s.label
            << "</text>\n";
    }
    out << "</svg>\n";
}

void write_svg_histograms(const std::string& path, const std::string& title,
                          const std::vector<SvgHistogram>& hists, int bins) {
    Range rv;
    for (const auto& h : hists)
        for (double v : h.values) rv.grow(v);
    rv.pad();
    std::vector<std::vector<double>> counts(hists.size(), std::vector<double>(static_cast<std::size_t>(bins), 0.0));
    double max_count = 0.0;
    for (std::size_t h = 0; h < hists.size(); ++h) {
        for (double v : hists[h].values) {
            int b = static_cast<int>((v - rv.lo) / (rv.hi - rv.lo) * bins);
            b = std::clamp(b, 0, bins - 1);
            counts[h][static_cast<std::size_t>(b)] += 1.0;
        }
        for (double c : counts[h]) max_count = std::max(max_count, c);
    }
    Range ry;
    ry.grow(0.0);
    ry.grow(max_count);
    ry.pad();
    std::ofstream out;
    open_svg(out, path, title);
    axes(out, rv, ry);
    const double bw = (kw - 2 * kpad) / bins;
    for (std::size_t h = 0; h < hists.size(); ++h) {
        for (int b = 0; b < bins; ++b) {
            const double c = counts[h][static_cast<std::size_t>(b)];
            if (c == 0.0) continue;
            const double x0 = kpad + b * bw;
            const double y0 = sy(c, ry);
            out << "<rect x='" << x0 << "' y='" << y0 << "' width='" << bw << "' height='"
                << (kh - kpad - y0) << "' fill='" << hists[h].color
                << "' fill-opacity='0.45' stroke='none'/>\n";
        }
        out << "<text x='" << kw - kpad - 4 << "' y='" << kpad + 16 * static_cast<int>(h)
            << "' text-anchor='end' font-size='12' fill='" << hists[h].color << "'>"
            << hists[h].label << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace orpco
