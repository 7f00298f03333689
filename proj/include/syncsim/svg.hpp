#pragma once

// Minimal deterministic SVG 1.1 line-plot renderer: axes with tick labels,
// unit-carrying axis titles, a legend, and optional multi-panel layout.

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace syncsim {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (x, y); non-finite points break the line
};

struct PlotSpec {
    std::string title;
    std::string x_label;  ///< include the unit, e.g. "t [s]"
    std::string y_label;
    std::vector<Series> series;
};

/// Standalone single-panel SVG document. `description` (when non-empty) is
/// embedded verbatim-escaped in a <desc> element so artifacts carry their
/// own provenance. Throws EmptySeriesError when there is no series or a
/// series has fewer than two points.
std::string render_svg_plot(const PlotSpec& spec, const std::string& description = "");

/// Standalone SVG with one panel per PlotSpec, laid out row-major in
/// `columns` columns.
std::string render_svg_grid(std::span<const PlotSpec> panels, int columns,
                            const std::string& description = "");

}  // namespace syncsim
