#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tabsynth/trainer.hpp"

namespace tabsynth {

// Training curves (utility and risk per epoch) as a standalone SVG.
std::string render_curves_svg(const std::vector<CurveRow>& curves);

struct PopulationPoint {
    double f_u = 0.0;
    double f_r = 0.0;
    int rank = 0;
    double improvement = 0.0;
};

// Objective-space scatter of the final population; rank-1 points are ringed.
std::string render_population_svg(const std::vector<PopulationPoint>& points);

// Reads curves.csv / population.json from a run directory and writes
// curves.svg and population.svg next to them.
void emit_run_plots(const std::filesystem::path& run_dir);

}  // namespace tabsynth
