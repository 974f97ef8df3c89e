#pragma once

#include <string>
#include <vector>

#include "weakal/harness.hpp"

namespace weakal {

// Renders an accuracy-vs-round line chart as a standalone SVG file: one
// polyline per method, shaded +/- one standard deviation band, no external
// renderer involved. Output is byte-deterministic for a given table.
// Empty table -> DomainError.
void render_chart(const std::vector<AggregateRow>& table, const std::string& path);

// Y range used by the chart: [min - std, max + std] padded by 5%.
std::pair<double, double> chart_y_range(const std::vector<AggregateRow>& table);

}  // namespace weakal
