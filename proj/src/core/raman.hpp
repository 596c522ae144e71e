#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/atomic.hpp"
#include "core/comb.hpp"

namespace combraman::raman {

// A Raman transition between Zeeman sublevels of D5/2 (initial) and
// D3/2 (final), driven at harmonic q of the repetition rate.
struct TransitionSpec {
  atomic::ZeemanState initial;
  atomic::ZeemanState final_;
  int harmonic_q = 0;
};

struct RamanResult {
  double omega_r = 0.0;                     // rad/s, |coherent sum|
  std::complex<double> complex_sum;         // with spectral phases applied
  std::complex<double> flat_sum;            // with pair phases forced equal
  double eta = 1.0;                         // non-dispersive efficiency
  double eta_eff = 1.0;                     // with GDD / residual phase
  std::map<std::string, std::complex<double>> per_level;
  std::optional<double> cw_equivalent;      // closed form, two-tooth case
  std::size_t pair_count = 0;
};

struct StarkResult {
  double shift_hz = 0.0;
  bool counter_rotating = true;
};

struct ResonanceCondition {
  long long q = 0;
  double required_rep_rate_hz = 0.0;
  double residual_hz = 0.0;
};

ResonanceCondition resonance_condition(double transition_freq_hz,
                                       double rep_rate_hz);

// Coherent two-photon sum over tooth pairs (n-q, n) and intermediate
// Zeeman sublevels. The pair detuning is referenced to the higher tooth
// and the initial state: Delta_{n,i} = omega_n - (E_i - E_initial)/hbar.
// Zeeman splittings are neglected inside the detuning. Summation runs in
// ascending tooth index with a fixed sequential reduction.
RamanResult raman_rabi(const comb::CombModel& comb,
                       const atomic::LevelScheme& levels,
                       const TransitionSpec& transition,
                       const atomic::PolarizationState& pol);

// Same sum evaluated on an explicit tooth list (used for CW references
// and bandwidth scans).
RamanResult raman_rabi_teeth(const std::vector<comb::Tooth>& teeth, int q,
                             const atomic::LevelScheme& levels,
                             const TransitionSpec& transition,
                             const atomic::PolarizationState& pol);

double eta_eff_ratio(const comb::CombModel& comb,
                     const atomic::LevelScheme& levels,
                     const TransitionSpec& transition,
                     const atomic::PolarizationState& pol);

struct StarkOptions {
  bool include_counter_rotating = true;
  double resonance_guard = 0.0;  // rad/s; 0 selects the default 2pi*100 GHz
};

// AC-Stark shift of one Zeeman state from all dipole links it sits below,
// summed over comb teeth, in Hz. Counter-rotating terms contribute
// |Omega|^2 / (4 (omega_n + omega_gi)); the flag drops them for
// diagnostics.
StarkResult ac_stark_shift(const comb::CombModel& comb,
                           const atomic::LevelScheme& levels,
                           const atomic::ZeemanState& state,
                           const atomic::PolarizationState& pol,
                           const StarkOptions& opts = {});

StarkResult ac_stark_shift_teeth(const std::vector<comb::Tooth>& teeth,
                                 const atomic::LevelScheme& levels,
                                 const atomic::ZeemanState& state,
                                 const atomic::PolarizationState& pol,
                                 const StarkOptions& opts = {});

// shift(initial in D5/2) - shift(final in D3/2); positive means the
// fine-structure splitting grows.
double differential_ac_stark(const comb::CombModel& comb,
                             const atomic::LevelScheme& levels,
                             const TransitionSpec& transition,
                             const atomic::PolarizationState& pol,
                             const StarkOptions& opts = {});

struct MagicPolarization {
  std::optional<double> theta;  // rad
  double shift_at_zero = 0.0;   // Hz, endpoint values when no root exists
  double shift_at_ninety = 0.0;
};

// Bracketing + bisection root of theta -> differential AC-Stark shift on
// [0, pi/2]; tolerance 1e-4 rad. Absence of a sign change is a valid
// result.
MagicPolarization find_magic_polarization(const comb::CombModel& comb,
                                          const atomic::LevelScheme& levels,
                                          const TransitionSpec& transition,
                                          const StarkOptions& opts = {});

struct BandwidthPoint {
  double ratio = 0.0;      // delta_omega_fs / omega_0
  double rabi_ratio = 0.0; // Omega_fs / Omega_cw
};

// Raman Rabi frequency of a gaussian comb versus spectral bandwidth,
// normalized to the two-tooth CW value at the same total intensity and
// the same mean Raman detuning.
std::vector<BandwidthPoint> bandwidth_scan(
    const atomic::LevelScheme& levels, const TransitionSpec& transition,
    const std::vector<double>& bandwidth_ratios, double total_intensity,
    double mean_detuning, const atomic::PolarizationState& pol);

}  // namespace combraman::raman
