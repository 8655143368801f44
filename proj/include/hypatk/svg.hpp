#pragma once

// SVG renderings derived from the CSV artifacts.

#include "hypatk/analysis.hpp"

#include <string>

namespace hypatk::svg {

// Class regions as filled cells, hyperplane traces in black, ball outline.
std::string raster_svg(const analysis::Raster& raster, int cell_px = 4);

// Accuracy against epsilon, one polyline per (attack, objective).
std::string sweep_chart_svg(const analysis::SweepResult& sweep);

}  // namespace hypatk::svg
