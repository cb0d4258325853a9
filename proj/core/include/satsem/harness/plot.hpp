// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace satsem::harness {

struct PlotSeries {
    std::string name;
    std::vector<double> x, y;
};

// Minimal deterministic SVG line chart (fixed formatting, no timestamps).
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<PlotSeries>& series);

}  // namespace satsem::harness
