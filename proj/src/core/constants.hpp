#pragma once

// CODATA 2018 values, SI units.
namespace combraman::consts {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

inline constexpr double c_light = 299792458.0;            // m/s
inline constexpr double hbar = 1.054571817e-34;            // J s
inline constexpr double h_planck = 6.62607015e-34;         // J s
inline constexpr double eps0 = 8.8541878128e-12;           // F/m
inline constexpr double mu_bohr = 9.2740100783e-24;        // J/T
inline constexpr double e_charge = 1.602176634e-19;        // C
inline constexpr double bohr_radius = 5.29177210903e-11;   // m
inline constexpr double atomic_mass = 1.66053906660e-27;   // kg

// mu_B/h, Hz per tesla
inline constexpr double mu_bohr_hz_per_t = mu_bohr / h_planck;

// atomic unit of polarizability, C m^2 / V
inline constexpr double polarizability_au = 1.64877727436e-41;

// RMS black-body field at 300 K, V/m
inline constexpr double bbr_field_300k = 831.9;

}  // namespace combraman::consts
