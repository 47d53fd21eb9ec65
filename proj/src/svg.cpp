#include "ushape/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace ushape::svg {

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
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

std::string line_chart(const std::vector<Series>& series, const ChartOptions& opt) {
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                                    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    constexpr double left = 70, right = 190, top = 50, bottom = 60;
    const double plot_w = opt.width - left - right;
    const double plot_h = opt.height - top - bottom;

    double x_lo = std::numeric_limits<double>::max(), x_hi = std::numeric_limits<double>::lowest();
    double y_lo = x_lo, y_hi = x_hi;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
    for (const auto& [x, label] : opt.x_ticks) {
        x_lo = std::min(x_lo, x);
        x_hi = std::max(x_hi, x);
    }
    if (x_lo > x_hi) x_lo = 0, x_hi = 1;
    if (opt.y_range) {
        y_lo = opt.y_range->first;
        y_hi = opt.y_range->second;
    } else if (y_lo > y_hi) {
        y_lo = 0, y_hi = 1;
    } else {
        const double pad = std::max(0.05 * (y_hi - y_lo), 0.05);
        y_lo -= pad;
        y_hi += pad;
    }
    if (x_hi == x_lo) x_hi = x_lo + 1;
    if (y_hi == y_lo) y_hi = y_lo + 1;

    auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * plot_w; };
    auto py = [&](double y) { return top + (y_hi - y) / (y_hi - y_lo) * plot_h; };

    std::string out = fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        opt.width, opt.height, opt.width, opt.height);
    out += fmt::format("<text x=\"{:.1f}\" y=\"25\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
                       left + plot_w / 2, escape(opt.title));
    out += fmt::format(
        "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"#333\"/>\n", left,
        top, plot_w, plot_h);

    constexpr int y_ticks = 5;
    for (int i = 0; i <= y_ticks; ++i) {
        const double v = y_lo + (y_hi - y_lo) * i / y_ticks;
        out += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#ddd\"/>\n", left,
                           py(v), left + plot_w, py(v));
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.2f}</text>\n", left - 6, py(v) + 4,
                           v);
    }
    for (const auto& [x, label] : opt.x_ticks)
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", px(x),
                           top + plot_h + 18, escape(label));
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", left + plot_w / 2,
                       top + plot_h + 45, escape(opt.x_label));
    out += fmt::format(
        "<text x=\"18\" y=\"{:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1f})\">{}</text>\n",
        top + plot_h / 2, top + plot_h / 2, escape(opt.y_label));

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* colour = palette[i % std::size(palette)];
        std::string pts;
        for (const auto& [x, y] : s.points) pts += fmt::format("{}{:.2f},{:.2f}", pts.empty() ? "" : " ", px(x), py(y));
        out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"><title>{}</title></polyline>\n",
                           colour, pts, escape(s.name));
        const double ly = top + 14.0 + 16.0 * static_cast<double>(i);
        out += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                           left + plot_w + 12, ly - 4, left + plot_w + 32, ly - 4, colour);
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", left + plot_w + 38, ly, escape(s.name));
    }
    out += "</svg>\n";
    return out;
}

}  // namespace ushape::svg
