#pragma once

#include "bridgelab/report.hpp"

#include <string>
#include <vector>

namespace bridgelab {

/// Self-contained SVG with one log-scale polyline per metric; non-positive values are skipped.
std::string render_log_plot(const Report& report, const std::vector<std::string>& metrics, const std::string& title);

}  // namespace bridgelab
