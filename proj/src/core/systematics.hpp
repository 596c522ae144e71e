#pragma once

#include <string>
#include <vector>

#include "core/atomic.hpp"

namespace combraman::systematics {

struct ShiftEntry {
  std::string name;
  double shift_hz = 0.0;
  double sigma_hz = 0.0;
};

struct ShiftBudget {
  std::vector<ShiftEntry> entries;
  double total_hz = 0.0;
  double sigma_hz = 0.0;  // quadrature sum

  void add(ShiftEntry e);  // duplicate names are configuration errors
};

struct TrapConfig {
  double axial_freq_hz = 0.0;   // secular frequency along z
  double radial_freq_hz = 0.0;
  double ion_mass_kg = 0.0;
  double ion_charge_c = 0.0;
  // Electric quadrupole moments, e*m^2; zero means "not supplied".
  double theta_d32_em2 = 0.0;
  double theta_d52_em2 = 0.0;
  double quad_angle_factor = 0.0;  // B-to-trap-axis geometry, dimensionless
  double temperature_k = 300.0;
  double temperature_sigma_k = 0.0;
  double diff_polarizability_au = 0.0;  // D5/2 - D3/2, atomic units

  void validate() const;
};

struct ZeemanQuadratic {
  double shift_hz = 0.0;   // quadratic part of the pair-averaged splitting
  double sigma_hz = 0.0;   // propagated from the field uncertainty
};

// Second-order Zeeman shift of the pair-averaged D5/2(m) - D3/2(m')
// splitting. Both fine-structure doublet members (D3/2 and D5/2 share the
// L = 2 manifold) are diagonalized exactly in the |mL, mS> product basis;
// averaging the pair with (-m, -m') cancels the linear part. `spin_g`
// defaults to the free-electron value.
ZeemanQuadratic second_order_zeeman(const atomic::LevelScheme& levels,
                                    const atomic::MagneticField& field,
                                    double m_upper, double m_lower,
                                    double spin_g = 2.00231930436);

// Electric-quadrupole shift of one Zeeman state from the static trapping
// gradient dEz/dz = m omega_z^2 / e (Hz):
// -(1/4h) Theta dEz/dz [J(J+1) - 3m^2]/[J(2J-1)] * angle_factor.
double quadrupole_shift(const atomic::ZeemanState& state,
                        const TrapConfig& trap);

// Differential quadrupole shift of the transition, upper minus lower.
double quadrupole_shift_differential(const atomic::ZeemanState& upper,
                                     const atomic::ZeemanState& lower,
                                     const TrapConfig& trap);

// Blackbody shift of the splitting:
// -(1/2h) d_alpha <E^2>_300K (T/300)^4 with <E>_300K = 831.9 V/m.
double bbr_shift(const TrapConfig& trap);
double bbr_shift_sigma(const TrapConfig& trap);

enum class EntryMode { declared, computed, fractional };

struct BudgetEntryConfig {
  std::string name;
  EntryMode mode = EntryMode::declared;
  double shift_hz = 0.0;     // declared mode
  double sigma_hz = 0.0;
  double fraction = 0.0;     // fractional mode: shift = fraction * nu_0
};

// Assembles a budget from declared/fractional entries plus any computed
// ones the caller appends. nu0_hz scales fractional entries.
ShiftBudget build_budget(const std::vector<BudgetEntryConfig>& entries,
                         double nu0_hz);

}  // namespace combraman::systematics
