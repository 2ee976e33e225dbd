#pragma once

#include <string>
#include <vector>

#include "hsprobe/metrics/metrics.hpp"

namespace hsprobe {

struct NamedCurve {
    std::string name;
    std::vector<CurvePoint> points;
};

// Generalized risk against coverage for one or more detectors, as a
// standalone SVG document.
std::string risk_coverage_svg(const std::vector<NamedCurve>& curves);

struct HeatmapRow {
    std::string label;
    std::vector<double> weights;  // one cell per token, shaded relative to the row maximum
};

// One row of token cells per finding, darker for larger weight.
std::string attention_heatmap_svg(const std::vector<HeatmapRow>& rows);

}  // namespace hsprobe
