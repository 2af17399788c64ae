#include "jamsig/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "jamsig/binio.hpp"

namespace jamsig {

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(2);
    os << std::fixed << v;
    return os.str();
}

struct Range {
    double lo, hi;
    double span() const { return hi - lo; }
};

Range padded_range(double lo, double hi) {
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = (hi - lo) * 0.05;
    return {lo - pad, hi + pad};
}

}  // namespace

void write_scatter_svg(const std::filesystem::path& path,
                       const std::vector<ScatterPoint>& points,
                       const std::vector<std::string>& class_names, const std::string& title) {
    if (points.empty()) throw std::invalid_argument("write_scatter_svg: no points");

    constexpr double kW = 720, kH = 560, kPlotX = 60, kPlotY = 50, kPlotW = 480, kPlotH = 460;

    double x_lo = points[0].x, x_hi = points[0].x, y_lo = points[0].y, y_hi = points[0].y;
    for (const auto& p : points) {
        x_lo = std::min(x_lo, p.x);
        x_hi = std::max(x_hi, p.x);
        y_lo = std::min(y_lo, p.y);
        y_hi = std::max(y_hi, p.y);
    }
    const Range xr = padded_range(x_lo, x_hi), yr = padded_range(y_lo, y_hi);

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kW / 2 << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\""
        << " font-size=\"16\">" << title << "</text>\n"
        << "<rect x=\"" << kPlotX << "\" y=\"" << kPlotY << "\" width=\"" << kPlotW
        << "\" height=\"" << kPlotH << "\" fill=\"none\" stroke=\"#444\"/>\n";

    for (const auto& p : points) {
        const double px = kPlotX + (p.x - xr.lo) / xr.span() * kPlotW;
        const double py = kPlotY + kPlotH - (p.y - yr.lo) / yr.span() * kPlotH;
        const char* color = kPalette[p.class_id % kPaletteSize];
        if (p.synthetic) {
            svg << "<circle cx=\"" << fmt(px) << "\" cy=\"" << fmt(py)
                << "\" r=\"3.5\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.3\"/>\n";
        } else {
            svg << "<circle cx=\"" << fmt(px) << "\" cy=\"" << fmt(py) << "\" r=\"3\" fill=\""
                << color << "\"/>\n";
        }
    }

    const double legend_x = kPlotX + kPlotW + 20;
    double legend_y = kPlotY + 10;
    for (std::size_t c = 0; c < class_names.size(); ++c) {
        svg << "<circle cx=\"" << legend_x << "\" cy=\"" << legend_y << "\" r=\"4\" fill=\""
            << kPalette[c % kPaletteSize] << "\"/>\n"
            << "<text x=\"" << legend_x + 12 << "\" y=\"" << legend_y + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << class_names[c] << "</text>\n";
        legend_y += 20;
    }
    bool any_synth = std::any_of(points.begin(), points.end(),
                                 [](const ScatterPoint& p) { return p.synthetic; });
    if (any_synth) {
        legend_y += 8;
        svg << "<circle cx=\"" << legend_x << "\" cy=\"" << legend_y
            << "\" r=\"4\" fill=\"#555\"/>\n<text x=\"" << legend_x + 12 << "\" y=\""
            << legend_y + 4 << "\" font-family=\"sans-serif\" font-size=\"12\">real</text>\n";
        legend_y += 20;
        svg << "<circle cx=\"" << legend_x << "\" cy=\"" << legend_y
            << "\" r=\"4\" fill=\"none\" stroke=\"#555\"/>\n<text x=\"" << legend_x + 12
            << "\" y=\"" << legend_y + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">synthetic</text>\n";
    }
    svg << "</svg>\n";

    AtomicFileWriter writer(path);
    writer.stream() << svg.str();
    writer.commit();
}

void write_confusion_svg(const std::filesystem::path& path,
                         const std::vector<std::vector<double>>& matrix,
                         const std::vector<std::string>& class_names, const std::string& title) {
    const std::size_t n = matrix.size();
    if (n == 0 || class_names.size() != n) {
        throw std::invalid_argument("write_confusion_svg: matrix/name size mismatch");
    }
    for (const auto& row : matrix) {
        if (row.size() != n) throw std::invalid_argument("write_confusion_svg: ragged matrix");
    }

    constexpr double kCell = 52, kLeft = 110, kTop = 80;
    const double plot = kCell * static_cast<double>(n);
    const double width = kLeft + plot + 30, height = kTop + plot + 70;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << width / 2 << "\" y=\"26\" text-anchor=\"middle\""
        << " font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t p = 0; p < n; ++p) {
            const double v = std::clamp(matrix[t][p], 0.0, 1.0);
            const int shade = static_cast<int>(std::lround(255.0 * (1.0 - v)));
            const double x = kLeft + kCell * static_cast<double>(p);
            const double y = kTop + kCell * static_cast<double>(t);
            svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCell << "\" height=\""
                << kCell << "\" fill=\"rgb(" << shade << "," << shade << ",255)\""
                << " stroke=\"#888\" stroke-width=\"0.5\"/>\n";
            svg << "<text x=\"" << x + kCell / 2 << "\" y=\"" << y + kCell / 2 + 4
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\""
                << " fill=\"" << (v > 0.6 ? "white" : "#222") << "\">" << fmt(v) << "</text>\n";
        }
    }

    for (std::size_t c = 0; c < n; ++c) {
        svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << kTop + kCell * (c + 0.5) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << class_names[c] << "</text>\n";
        svg << "<text x=\"" << kLeft + kCell * (c + 0.5) << "\" y=\"" << kTop + plot + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << class_names[c] << "</text>\n";
    }
    svg << "<text x=\"" << kLeft - 70 << "\" y=\"" << kTop + plot / 2
        << "\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 " << kLeft - 70
        << " " << kTop + plot / 2 << ")\" text-anchor=\"middle\">true</text>\n"
        << "<text x=\"" << kLeft + plot / 2 << "\" y=\"" << kTop + plot + 44
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\""
        << " font-size=\"12\">predicted</text>\n</svg>\n";

    AtomicFileWriter writer(path);
    writer.stream() << svg.str();
    writer.commit();
}

void write_curves_svg(const std::filesystem::path& path, const std::vector<CurveSeries>& series,
                      const std::string& title, const std::string& x_label,
                      const std::string& y_label) {
    if (series.empty()) throw std::invalid_argument("write_curves_svg: no series");
    std::size_t longest = 0;
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& s : series) {
        longest = std::max(longest, s.values.size());
        for (double v : s.values) {
            if (first) {
                lo = hi = v;
                first = false;
            }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (longest < 1) throw std::invalid_argument("write_curves_svg: series have no points");
    const Range yr = padded_range(lo, hi);

    constexpr double kW = 720, kH = 420, kPlotX = 70, kPlotY = 50, kPlotW = 540, kPlotH = 310;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kW / 2 << "\" y=\"26\" text-anchor=\"middle\""
        << " font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n"
        << "<rect x=\"" << kPlotX << "\" y=\"" << kPlotY << "\" width=\"" << kPlotW
        << "\" height=\"" << kPlotH << "\" fill=\"none\" stroke=\"#444\"/>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        if (s.values.empty()) continue;
        // A single x position centers its point; otherwise spread over the axis.
        auto point_x = [&](std::size_t k) {
            if (longest < 2) return kPlotX + kPlotW / 2;
            return kPlotX + static_cast<double>(k) / static_cast<double>(longest - 1) * kPlotW;
        };
        auto point_y = [&](double v) { return kPlotY + kPlotH - (v - yr.lo) / yr.span() * kPlotH; };
        if (s.values.size() >= 2) {
            svg << "<polyline fill=\"none\" stroke=\"" << kPalette[si % kPaletteSize]
                << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t k = 0; k < s.values.size(); ++k) {
                svg << fmt(point_x(k)) << "," << fmt(point_y(s.values[k])) << " ";
            }
            svg << "\"/>\n";
        }
        for (std::size_t k = 0; k < s.values.size(); ++k) {
            svg << "<circle cx=\"" << fmt(point_x(k)) << "\" cy=\"" << fmt(point_y(s.values[k]))
                << "\" r=\"2.5\" fill=\"" << kPalette[si % kPaletteSize] << "\"/>\n";
        }
        svg << "<text x=\"" << kPlotX + kPlotW + 6 << "\" y=\"" << kPlotY + 16 + 18 * si
            << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
            << kPalette[si % kPaletteSize] << "\">" << s.name << "</text>\n";
    }

    svg << "<text x=\"" << fmt(kPlotX - 46) << "\" y=\"" << fmt(kPlotY + kPlotH / 2)
        << "\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 "
        << fmt(kPlotX - 46) << " " << fmt(kPlotY + kPlotH / 2) << ")\" text-anchor=\"middle\">"
        << y_label << "</text>\n"
        << "<text x=\"" << kPlotX + kPlotW / 2 << "\" y=\"" << kPlotY + kPlotH + 34
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label
        << "</text>\n"
        << "<text x=\"" << kPlotX - 8 << "\" y=\"" << kPlotY + kPlotH + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << fmt(yr.lo)
        << "</text>\n"
        << "<text x=\"" << kPlotX - 8 << "\" y=\"" << kPlotY + 10
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << fmt(yr.hi)
        << "</text>\n</svg>\n";

    AtomicFileWriter writer(path);
    writer.stream() << svg.str();
    writer.commit();
}

}  // namespace jamsig
