// constants.hpp — Physical constants and unit helpers

#pragma once

#include <string>

#include "fewmode/errors.hpp"

namespace fewmode::constants {

// CODATA 2018
inline constexpr double hbar_ev_fs = 0.6582119569;        // eV fs
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double hbar_si = 1.054571817e-34;        // J s
inline constexpr double epsilon0_si = 8.8541878128e-12;   // F / m
inline constexpr double speed_of_light_si = 2.99792458e8; // m / s

// Value of the scenario energy unit in eV.
inline double energy_unit_in_ev(const std::string& unit) {
    if (unit == "eV") return 1.0;
    if (unit == "meV") return 1e-3;
    throw InvalidInputError("unknown energy unit '" + unit + "' (expected eV or meV)");
}

// Value of the scenario time unit in fs.
inline double time_unit_in_fs(const std::string& unit) {
    if (unit == "fs") return 1.0;
    if (unit == "ps") return 1e3;
    throw InvalidInputError("unknown time unit '" + unit + "' (expected fs or ps)");
}

// hbar expressed in (energy unit) * (time unit), e.g. 0.6582... for eV*fs and meV*ps.
inline double hbar_in(const std::string& energy_unit, const std::string& time_unit) {
    return hbar_ev_fs / energy_unit_in_ev(energy_unit) / time_unit_in_fs(time_unit);
}

} // namespace fewmode::constants
