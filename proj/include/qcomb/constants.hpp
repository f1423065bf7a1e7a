#pragma once

#include <cmath>

namespace qcomb {

/// SI defining constants (2019 revision, exact).
namespace constants {
inline constexpr double planck = 6.62607015e-34;       // J s
inline constexpr double speed_of_light = 299792458.0;  // m / s
inline constexpr double boltzmann = 1.380649e-23;      // J / K
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double hbar = planck / (2.0 * pi);
}  // namespace constants

/// Angular carrier frequency (rad/s) of a vacuum wavelength (m).
inline double carrier_from_wavelength(double wavelength_m) {
    return 2.0 * constants::pi * constants::speed_of_light / wavelength_m;
}

/// Photon energy hbar * Omega_c (J) at angular frequency Omega_c (rad/s).
inline double photon_energy(double carrier) {
    return constants::hbar * carrier;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace qcomb
