#include "mixqa/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace mixqa {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 52.0;
constexpr double kPlotWidth = kWidth - kMarginLeft - kMarginRight;
constexpr double kPlotHeight = kHeight - kMarginTop - kMarginBottom;

const char* kPalette[] = {"#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

void open_svg(std::ostringstream& out, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth) << "\" height=\""
        << fmt(kHeight) << "\" viewBox=\"0 0 " << fmt(kWidth) << " " << fmt(kHeight) << "\">\n";
    out << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << escape(title) << "</text>\n";
}

void draw_axes(std::ostringstream& out, const std::string& x_label, const std::string& y_label) {
    const double x0 = kMarginLeft, y0 = kMarginTop + kPlotHeight;
    out << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\""
        << fmt(x0 + kPlotWidth) << "\" y2=\"" << fmt(y0) << "\" stroke=\"#333333\"/>\n";
    out << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(kMarginTop) << "\" x2=\"" << fmt(x0)
        << "\" y2=\"" << fmt(y0) << "\" stroke=\"#333333\"/>\n";
    out << "<text x=\"" << fmt(x0 + kPlotWidth / 2) << "\" y=\"" << fmt(kHeight - 10)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << escape(x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << fmt(kMarginTop + kPlotHeight / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 16 " << fmt(kMarginTop + kPlotHeight / 2) << ")\">"
        << escape(y_label) << "</text>\n";
}

void draw_y_ticks(std::ostringstream& out, double y_max) {
    const int ticks = 5;
    for (int i = 0; i <= ticks; ++i) {
        const double v = y_max * i / ticks;
        const double y = kMarginTop + kPlotHeight * (1.0 - static_cast<double>(i) / ticks);
        out << "<line x1=\"" << fmt(kMarginLeft - 4) << "\" y1=\"" << fmt(y) << "\" x2=\""
            << fmt(kMarginLeft) << "\" y2=\"" << fmt(y) << "\" stroke=\"#333333\"/>\n";
        out << "<text x=\"" << fmt(kMarginLeft - 8) << "\" y=\"" << fmt(y + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
            << fmt_tick(v) << "</text>\n";
    }
}

void draw_legend(std::ostringstream& out, const std::vector<SvgSeries>& series) {
    if (series.size() < 2) return;
    double x = kMarginLeft + 8;
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % kPaletteSize];
        // legend swatches are circles so bars stay the only rect elements
        out << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(kMarginTop - 8)
            << "\" r=\"5\" fill=\"" << color << "\"/>\n";
        out << "<text x=\"" << fmt(x + 9) << "\" y=\"" << fmt(kMarginTop - 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(series[s].label)
            << "</text>\n";
        x += 22 + 7.0 * static_cast<double>(series[s].label.size());
    }
}

double max_value(const std::vector<SvgSeries>& series) {
    double m = 0.0;
    for (const auto& s : series)
        for (double v : s.values) m = std::max(m, v);
    return m > 0.0 ? m : 1.0;
}

} // namespace

std::string render_histogram_svg(const std::vector<double>& edges,
                                 const std::vector<SvgSeries>& series, const std::string& title,
                                 const std::string& x_label, const std::string& y_label) {
    if (series.empty()) throw EmptySeries("histogram needs at least one series");
    if (edges.size() < 2) throw EmptySeries("histogram needs at least one bin");
    const std::size_t bins = edges.size() - 1;
    for (const auto& s : series)
        if (s.values.size() != bins)
            throw Error("series '" + s.label + "' has " + std::to_string(s.values.size()) +
                        " values for " + std::to_string(bins) + " bins");

    const double x_lo = edges.front(), x_hi = edges.back();
    const double y_max = max_value(series) * 1.05;
    auto sx = [&](double v) { return kMarginLeft + (v - x_lo) / (x_hi - x_lo) * kPlotWidth; };
    auto sy = [&](double v) { return kMarginTop + (1.0 - v / y_max) * kPlotHeight; };

    std::ostringstream out;
    open_svg(out, title);
    const double opacity = series.size() > 1 ? 0.6 : 0.9;
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % kPaletteSize];
        for (std::size_t i = 0; i < bins; ++i) {
            const double v = std::max(series[s].values[i], 0.0);
            const double x = sx(edges[i]);
            const double w = sx(edges[i + 1]) - x;
            const double y = sy(v);
            out << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w)
                << "\" height=\"" << fmt(kMarginTop + kPlotHeight - y) << "\" fill=\"" << color
                << "\" fill-opacity=\"" << fmt(opacity) << "\"/>\n";
        }
    }
    draw_axes(out, x_label, y_label);
    draw_y_ticks(out, y_max);
    for (int i = 0; i <= 6; ++i) {
        const double v = x_lo + (x_hi - x_lo) * i / 6.0;
        out << "<text x=\"" << fmt(sx(v)) << "\" y=\"" << fmt(kMarginTop + kPlotHeight + 16)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
            << fmt_tick(v) << "</text>\n";
    }
    draw_legend(out, series);
    out << "</svg>\n";
    return out.str();
}

std::string render_histogram_svg(const Histogram& histogram, const std::string& series_label,
                                 const std::string& title, const std::string& x_label,
                                 const std::string& y_label) {
    return render_histogram_svg(histogram.edges, {SvgSeries{series_label, histogram.densities}},
                                title, x_label, y_label);
}

std::string render_grouped_bars_svg(const std::vector<std::string>& categories,
                                    const std::vector<SvgSeries>& series,
                                    const std::string& title, const std::string& x_label,
                                    const std::string& y_label) {
    if (series.empty()) throw EmptySeries("grouped bars need at least one series");
    if (categories.empty()) throw EmptySeries("grouped bars need at least one category");
    for (const auto& s : series)
        if (s.values.size() != categories.size())
            throw Error("series '" + s.label + "' has " + std::to_string(s.values.size()) +
                        " values for " + std::to_string(categories.size()) + " categories");

    const double y_max = max_value(series) * 1.05;
    const double group_width = kPlotWidth / static_cast<double>(categories.size());
    const double bar_width = group_width * 0.8 / static_cast<double>(series.size());
    auto sy = [&](double v) { return kMarginTop + (1.0 - v / y_max) * kPlotHeight; };

    std::ostringstream out;
    open_svg(out, title);
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % kPaletteSize];
        for (std::size_t c = 0; c < categories.size(); ++c) {
            const double v = std::max(series[s].values[c], 0.0);
            const double x = kMarginLeft + group_width * static_cast<double>(c) +
                             group_width * 0.1 + bar_width * static_cast<double>(s);
            const double y = sy(v);
            out << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\""
                << fmt(bar_width) << "\" height=\"" << fmt(kMarginTop + kPlotHeight - y)
                << "\" fill=\"" << color << "\"/>\n";
        }
    }
    draw_axes(out, x_label, y_label);
    draw_y_ticks(out, y_max);
    for (std::size_t c = 0; c < categories.size(); ++c) {
        const double x = kMarginLeft + group_width * (static_cast<double>(c) + 0.5);
        out << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(kMarginTop + kPlotHeight + 16)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
            << escape(categories[c]) << "</text>\n";
    }
    draw_legend(out, series);
    out << "</svg>\n";
    return out.str();
}

} // namespace mixqa
