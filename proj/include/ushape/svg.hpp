#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ushape::svg {

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;  // (x, y)
};

struct ChartOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::optional<std::pair<double, double>> y_range;  // autoscale when absent
    std::vector<std::pair<double, std::string>> x_ticks;
    int width = 900;
    int height = 540;
};

/// Self-contained SVG document: one polyline per series plus a legend.
std::string line_chart(const std::vector<Series>& series, const ChartOptions& options);

std::string escape(const std::string& text);

}  // namespace ushape::svg
