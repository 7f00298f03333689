#include "syncsim/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "syncsim/errors.hpp"

namespace syncsim {

namespace {

constexpr int kPanelWidth = 640;
constexpr int kPanelHeight = 400;
constexpr int kMarginLeft = 78;
constexpr int kMarginRight = 18;
constexpr int kMarginTop = 34;
constexpr int kMarginBottom = 52;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#17becf", "#8c564b", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v == 0.0 ? 0.0 : v);  // normalize -0
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void include(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    void finalize() {
        if (lo > hi) {  // no finite data
            lo = 0.0;
            hi = 1.0;
        }
        if (lo == hi) {
            const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
            lo -= pad;
            hi += pad;
        } else {
            const double pad = (hi - lo) * 0.05;
            lo -= pad;
            hi += pad;
        }
    }
};

// 1-2-5 tick spacing aiming for ~6 intervals.
std::vector<double> ticks(const Range& r) {
    const double raw = (r.hi - r.lo) / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    double step = 10.0 * mag;
    if (norm <= 1.0)
        step = mag;
    else if (norm <= 2.0)
        step = 2.0 * mag;
    else if (norm <= 5.0)
        step = 5.0 * mag;
    std::vector<double> out;
    for (double v = std::ceil(r.lo / step) * step; v <= r.hi + step * 1e-9; v += step)
        out.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
    return out;
}

void render_panel(std::string& svg, const PlotSpec& spec, int x0, int y0) {
    for (const auto& s : spec.series)
        if (s.points.size() < 2) throw EmptySeriesError();
    if (spec.series.empty()) throw EmptySeriesError();

    Range xr;
    Range yr;
    for (const auto& s : spec.series) {
        for (const auto& [x, y] : s.points) {
            xr.include(x);
            yr.include(y);
        }
    }
    xr.finalize();
    yr.finalize();

    const double plot_x = x0 + kMarginLeft;
    const double plot_y = y0 + kMarginTop;
    const double plot_w = kPanelWidth - kMarginLeft - kMarginRight;
    const double plot_h = kPanelHeight - kMarginTop - kMarginBottom;
    auto map_x = [&](double v) { return plot_x + (v - xr.lo) / (xr.hi - xr.lo) * plot_w; };
    auto map_y = [&](double v) { return plot_y + plot_h - (v - yr.lo) / (yr.hi - yr.lo) * plot_h; };

    svg += "<g class=\"panel\">\n";
    svg += "<rect x=\"" + fmt(plot_x) + "\" y=\"" + fmt(plot_y) + "\" width=\"" + fmt(plot_w) +
           "\" height=\"" + fmt(plot_h) + "\" fill=\"white\" stroke=\"#333333\"/>\n";

    for (double v : ticks(xr)) {
        const double px = map_x(v);
        svg += "<line x1=\"" + fmt(px) + "\" y1=\"" + fmt(plot_y) + "\" x2=\"" + fmt(px) +
               "\" y2=\"" + fmt(plot_y + plot_h) + "\" stroke=\"#dddddd\"/>\n";
        svg += "<line x1=\"" + fmt(px) + "\" y1=\"" + fmt(plot_y + plot_h) + "\" x2=\"" + fmt(px) +
               "\" y2=\"" + fmt(plot_y + plot_h + 5) + "\" stroke=\"#333333\"/>\n";
        svg += "<text x=\"" + fmt(px) + "\" y=\"" + fmt(plot_y + plot_h + 18) +
               "\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">" +
               fmt_tick(v) + "</text>\n";
    }
    for (double v : ticks(yr)) {
        const double py = map_y(v);
        svg += "<line x1=\"" + fmt(plot_x) + "\" y1=\"" + fmt(py) + "\" x2=\"" +
               fmt(plot_x + plot_w) + "\" y2=\"" + fmt(py) + "\" stroke=\"#dddddd\"/>\n";
        svg += "<line x1=\"" + fmt(plot_x - 5) + "\" y1=\"" + fmt(py) + "\" x2=\"" + fmt(plot_x) +
               "\" y2=\"" + fmt(py) + "\" stroke=\"#333333\"/>\n";
        svg += "<text x=\"" + fmt(plot_x - 8) + "\" y=\"" + fmt(py + 4) +
               "\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">" +
               fmt_tick(v) + "</text>\n";
    }

    if (!spec.title.empty())
        svg += "<text x=\"" + fmt(plot_x + plot_w / 2) + "\" y=\"" + fmt(y0 + 22.0) +
               "\" font-size=\"14\" text-anchor=\"middle\" font-family=\"sans-serif\">" +
               escape_xml(spec.title) + "</text>\n";
    svg += "<text x=\"" + fmt(plot_x + plot_w / 2) + "\" y=\"" + fmt(y0 + kPanelHeight - 14.0) +
           "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">" +
           escape_xml(spec.x_label) + "</text>\n";
    svg += "<text x=\"" + fmt(x0 + 18.0) + "\" y=\"" + fmt(plot_y + plot_h / 2) +
           "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\" transform=\"rotate(-90 " +
           fmt(x0 + 18.0) + " " + fmt(plot_y + plot_h / 2) + ")\">" + escape_xml(spec.y_label) +
           "</text>\n";

    int color_idx = 0;
    for (const auto& s : spec.series) {
        const char* color = kPalette[color_idx % kPaletteSize];
        std::string points;
        bool open = false;
        auto flush = [&]() {
            if (open && !points.empty())
                svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                       "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
            points.clear();
            open = false;
        };
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) {
                flush();
                continue;
            }
            points += fmt(map_x(x)) + "," + fmt(map_y(y)) + " ";
            open = true;
        }
        flush();
        ++color_idx;
    }

    // Legend, top-right corner of the plot area.
    double ly = plot_y + 14.0;
    color_idx = 0;
    for (const auto& s : spec.series) {
        const char* color = kPalette[color_idx % kPaletteSize];
        const double lx = plot_x + plot_w - 150.0;
        svg += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(ly - 4) + "\" x2=\"" + fmt(lx + 24) +
               "\" y2=\"" + fmt(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + fmt(lx + 30) + "\" y=\"" + fmt(ly) +
               "\" font-size=\"11\" font-family=\"sans-serif\">" + escape_xml(s.label) +
               "</text>\n";
        ly += 16.0;
        ++color_idx;
    }
    svg += "</g>\n";
}

std::string document(int width, int height, const std::string& description,
                     const std::string& body) {
    std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           std::to_string(width) + "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
           std::to_string(width) + " " + std::to_string(height) + "\">\n";
    if (!description.empty()) svg += "<desc>" + escape_xml(description) + "</desc>\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += body;
    svg += "</svg>\n";
    return svg;
}

}  // namespace

std::string render_svg_plot(const PlotSpec& spec, const std::string& description) {
    std::string body;
    render_panel(body, spec, 0, 0);
    return document(kPanelWidth, kPanelHeight, description, body);
}

std::string render_svg_grid(std::span<const PlotSpec> panels, int columns,
                            const std::string& description) {
    if (panels.empty()) throw EmptySeriesError();
    columns = std::max(1, columns);
    const int rows = (static_cast<int>(panels.size()) + columns - 1) / columns;
    std::string body;
    for (std::size_t i = 0; i < panels.size(); ++i) {
        const int col = static_cast<int>(i) % columns;
        const int row = static_cast<int>(i) / columns;
        render_panel(body, panels[i], col * kPanelWidth, row * kPanelHeight);
    }
    return document(columns * kPanelWidth, rows * kPanelHeight, description, body);
}

}  // namespace syncsim
