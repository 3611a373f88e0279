// trajectory.hpp — Observable time series and their CSV form

#pragma once

#include <string>
#include <vector>

namespace fewmode {

struct Trajectory {
    std::vector<double> times;
    std::vector<double> emitter_population;
    std::vector<std::vector<double>> mode_populations; // one series per model mode
    std::vector<double> trace_drift;                   // |Tr rho - 1| (or norm drift)
    std::vector<double> min_eigenvalue;                // empty unless recorded
    std::vector<std::string> warnings;

    std::size_t n_points() const { return times.size(); }
};

// Columns: t, pop_emitter, pop_mode_1..N, trace_drift[, min_eig]. `metadata`
// lines are emitted first, prefixed with "# ".
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const std::vector<std::string>& metadata);

Trajectory read_trajectory_csv(const std::string& path);

} // namespace fewmode
