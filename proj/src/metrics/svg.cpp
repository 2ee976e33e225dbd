#include "hsprobe/metrics/svg.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace hsprobe {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
    std::string out;
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

}  // namespace

std::string risk_coverage_svg(const std::vector<NamedCurve>& curves) {
    const double w = 480;
    const double h = 360;
    const double left = 60;
    const double right = 20;
    const double top = 20;
    const double bottom = 50;
    const double pw = w - left - right;
    const double ph = h - top - bottom;

    double max_risk = 0.0;
    for (const auto& c : curves) {
        for (const auto& p : c.points) {
            max_risk = std::max(max_risk, p.risk);
        }
    }
    max_risk = max_risk > 0.0 ? max_risk : 1.0;

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
        "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        w, h);
    svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                       left, top, pw, ph);
    for (int i = 0; i <= 4; ++i) {
        const double f = i / 4.0;
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.2f}</text>\n",
                           left + f * pw, top + ph + 16, f);
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3f}</text>\n", left - 6,
                           top + ph - f * ph + 4, f * max_risk);
    }
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">coverage</text>\n", left + pw / 2,
                       h - 12);
    svg += fmt::format(
        "<text x=\"14\" y=\"{:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.1f})\">generalized "
        "risk</text>\n",
        top + ph / 2, top + ph / 2);

    for (std::size_t c = 0; c < curves.size(); ++c) {
        const char* colour = kPalette[c % std::size(kPalette)];
        std::string pts;
        for (const auto& p : curves[c].points) {
            pts += fmt::format("{:.2f},{:.2f} ", left + p.coverage * pw, top + ph - p.risk / max_risk * ph);
        }
        svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", colour,
                           pts);
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" fill=\"{}\">{}</text>\n", left + 10,
                           top + 16 + 14.0 * static_cast<double>(c), colour, escape(curves[c].name));
    }
    svg += "</svg>\n";
    return svg;
}

std::string attention_heatmap_svg(const std::vector<HeatmapRow>& rows) {
    const double cell = 18;
    const double label_w = 180;
    std::size_t max_tokens = 1;
    for (const auto& r : rows) {
        max_tokens = std::max(max_tokens, r.weights.size());
    }
    const double w = label_w + cell * static_cast<double>(max_tokens) + 10;
    const double h = cell * static_cast<double>(rows.size()) + 10;
    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"monospace\" "
        "font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        w, h);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double y = 5 + cell * static_cast<double>(i);
        svg += fmt::format("<text x=\"4\" y=\"{:.1f}\">{}</text>\n", y + 13, escape(rows[i].label));
        const double peak = rows[i].weights.empty()
                                ? 1.0
                                : *std::max_element(rows[i].weights.begin(), rows[i].weights.end());
        for (std::size_t t = 0; t < rows[i].weights.size(); ++t) {
            const double f = peak > 0.0 ? std::clamp(rows[i].weights[t] / peak, 0.0, 1.0) : 0.0;
            const int shade = static_cast<int>(255.0 * (1.0 - f));
            svg += fmt::format(
                "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{}\" height=\"{}\" fill=\"rgb(255,{},{})\" "
                "stroke=\"#ccc\"><title>{:.4f}</title></rect>\n",
                label_w + cell * static_cast<double>(t), y, cell, cell, shade, shade, rows[i].weights[t]);
        }
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace hsprobe
