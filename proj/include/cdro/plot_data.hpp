#pragma once

#include <string>
#include <vector>

namespace cdro {

/**
 * Collects every results.csv under results_dir and writes plot-ready files into it:
 * cost_vs_theta1.csv, cost_vs_theta2.csv, time_vs_n.csv, time_vs_farms.csv, reserve_bars.csv.
 * Rows are sorted on the figure's grouping columns then its x column. Returns the written paths.
 */
std::vector<std::string> emit_plot_data(const std::string& results_dir);

}  // namespace cdro
