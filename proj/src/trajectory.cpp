// trajectory.cpp

#include "fewmode/trajectory.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fewmode/errors.hpp"

namespace fewmode {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const std::vector<std::string>& metadata) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file '" + path + "'");
    for (const auto& line : metadata) out << "# " << line << "\n";
    for (const auto& w : traj.warnings) out << "# warning: " << w << "\n";

    const std::size_t n_modes = traj.mode_populations.size();
    const bool has_eig = !traj.min_eigenvalue.empty();
    out << "t,pop_emitter";
    for (std::size_t m = 0; m < n_modes; ++m) out << ",pop_mode_" << (m + 1);
    out << ",trace_drift";
    if (has_eig) out << ",min_eig";
    out << "\n";

    for (std::size_t k = 0; k < traj.n_points(); ++k) {
        out << format_double(traj.times[k]) << ',' << format_double(traj.emitter_population[k]);
        for (std::size_t m = 0; m < n_modes; ++m) out << ',' << format_double(traj.mode_populations[m][k]);
        out << ',' << format_double(traj.trace_drift[k]);
        if (has_eig) out << ',' << format_double(traj.min_eigenvalue[k]);
        out << "\n";
    }
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open trajectory file '" + path + "'");

    Trajectory traj;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    int n_modes = 0;
    bool has_eig = false;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            std::stringstream ss(line);
            std::string col;
            std::vector<std::string> cols;
            while (std::getline(ss, col, ',')) cols.push_back(col);
            if (cols.size() < 3 || cols[0] != "t" || cols[1] != "pop_emitter") {
                throw ParseError(path + ": line " + std::to_string(line_no) +
                                 ": unexpected trajectory header");
            }
            for (std::size_t i = 2; i < cols.size(); ++i) {
                if (cols[i].rfind("pop_mode_", 0) == 0) ++n_modes;
            }
            has_eig = cols.back() == "min_eig";
            header_seen = true;
            traj.mode_populations.resize(n_modes);
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ParseError(path + ": line " + std::to_string(line_no) +
                                 ": non-numeric cell '" + cell + "'");
            }
        }
        const std::size_t expected = 3 + n_modes + (has_eig ? 1 : 0);
        if (row.size() != expected) {
            throw ParseError(path + ": line " + std::to_string(line_no) + ": expected " +
                             std::to_string(expected) + " columns, got " + std::to_string(row.size()));
        }
        traj.times.push_back(row[0]);
        traj.emitter_population.push_back(row[1]);
        for (int m = 0; m < n_modes; ++m) traj.mode_populations[m].push_back(row[2 + m]);
        traj.trace_drift.push_back(row[2 + n_modes]);
        if (has_eig) traj.min_eigenvalue.push_back(row[3 + n_modes]);
    }
    if (!header_seen || traj.times.empty()) {
        throw ParseError(path + ": no trajectory data found");
    }
    return traj;
}

} // namespace fewmode
