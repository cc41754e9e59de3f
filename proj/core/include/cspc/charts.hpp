#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cspc/engine.hpp"

namespace cspc {

/// Price trajectories per provider with dashed fair-price reference lines.
std::string price_chart_svg(const SimTrace& trace);
/// Sum of absolute error per cycle.
std::string error_chart_svg(const SimTrace& trace);

/// Writes prices.svg and error.svg into `dir`. IoError on failure.
std::vector<std::filesystem::path> render_charts(const SimTrace& trace, const std::filesystem::path& dir);

}  // namespace cspc
