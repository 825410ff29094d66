#pragma once

#include <string>
#include <vector>

#include "mixqa/errors.hpp"
#include "mixqa/stats.hpp"

namespace mixqa {

struct SvgSeries {
    std::string label;
    std::vector<double> values;
};

/// Histogram figure: one rect per bin per series, overlaid with partial
/// opacity. Deterministic bytes for identical input. Throws EmptySeries.
std::string render_histogram_svg(const std::vector<double>& edges,
                                 const std::vector<SvgSeries>& series,
                                 const std::string& title, const std::string& x_label,
                                 const std::string& y_label);

std::string render_histogram_svg(const Histogram& histogram, const std::string& series_label,
                                 const std::string& title, const std::string& x_label,
                                 const std::string& y_label);

/// Grouped bar chart: categories on the x axis, one rect per category per
/// series, side by side. Throws EmptySeries.
std::string render_grouped_bars_svg(const std::vector<std::string>& categories,
                                    const std::vector<SvgSeries>& series,
                                    const std::string& title, const std::string& x_label,
                                    const std::string& y_label);

} // namespace mixqa
