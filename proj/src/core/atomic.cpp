#include "core/atomic.hpp"

#include <algorithm>
#include <cmath>

#include "core/angular.hpp"
#include "core/constants.hpp"
#include "core/errors.hpp"

namespace combraman::atomic {

using namespace consts;

PolarizationState PolarizationState::linear(double theta) {
  PolarizationState p;
  p.theta = theta;
  p.e[0] = std::sin(theta) / std::sqrt(2.0);   // e_{-1}
  p.e[1] = std::cos(theta);                    // e_0
  p.e[2] = -std::sin(theta) / std::sqrt(2.0);  // e_{+1}
  return p;
}

double lande_g_factor(double J, double L, double S, double g_s) {
  const double jj = J * (J + 1.0), ll = L * (L + 1.0), ss = S * (S + 1.0);
  return (jj + ll - ss) / (2.0 * jj) + g_s * (jj + ss - ll) / (2.0 * jj);
}

const FineState& LevelScheme::manifold(const std::string& label) const {
  for (const auto& s : states_)
    if (s.label == label) return s;
  throw ConfigError("unknown manifold: " + label);
}

bool LevelScheme::has_manifold(const std::string& label) const {
  return std::any_of(states_.begin(), states_.end(),
                     [&](const FineState& s) { return s.label == label; });
}

const DipoleLink* LevelScheme::find_link(const std::string& upper,
                                         const std::string& lower) const {
  for (const auto& l : links_)
    if (l.upper == upper && l.lower == lower) return &l;
  return nullptr;
}

double LevelScheme::fine_gap_hz(const std::string& a,
                                const std::string& b) const {
  return std::abs(manifold(a).energy - manifold(b).energy) / two_pi;
}

ZeemanState LevelScheme::zeeman(const std::string& label, double mJ) const {
  const FineState& f = manifold(label);
  if (std::abs(mJ) > f.J + 1e-9 ||
      !angular::is_half_integer(f.J - mJ) ||
      std::abs(std::remainder(f.J - mJ, 1.0)) > 1e-9)
    throw ConfigError("invalid mJ for " + label);
  return ZeemanState{f, mJ};
}

std::vector<ZeemanState> LevelScheme::zeeman_states(
    const std::string& label) const {
  const FineState& f = manifold(label);
  std::vector<ZeemanState> out;
  for (double m = -f.J; m <= f.J + 1e-9; m += 1.0)
    out.push_back(ZeemanState{f, m});
  return out;
}

LevelScheme build_level_scheme(const LevelSchemeConfig& config) {
  LevelScheme scheme;
  for (const auto& m : config.manifolds) {
    if (!angular::is_half_integer(m.J) || !angular::is_half_integer(m.S))
      throw ConfigError("J and S must be integer or half-integer: " + m.label);
    if (m.J < std::abs(m.L - m.S) - 1e-9 || m.J > m.L + m.S + 1e-9)
      throw ConfigError("J outside |L-S|..L+S for manifold " + m.label);
    if (!std::isfinite(m.g_factor))
      throw ConfigError("non-finite g factor for " + m.label);
    if (m.pure_ls &&
        std::abs(m.g_factor - lande_g_factor(m.J, m.L, m.S)) > 1e-12)
      throw ConfigError("g factor of LS-flagged manifold " + m.label +
                        " does not match the Lande formula");
    if (scheme.has_manifold(m.label))
      throw ConfigError("duplicate manifold: " + m.label);
    scheme.states_.push_back(FineState{m.label, m.L, m.S, m.J,
                                       two_pi * m.energy_hz, m.g_factor,
                                       m.pure_ls});
  }

  for (const char* required : {"S1/2", "P1/2", "P3/2", "D3/2", "D5/2"})
    if (!scheme.has_manifold(required))
      throw ConfigError(std::string("missing manifold: ") + required);

  for (const auto& l : config.links) {
    const FineState& up = scheme.manifold(l.upper);
    const FineState& lo = scheme.manifold(l.lower);
    if (l.a_per_s <= 0.0)
      throw ConfigError("non-positive Einstein A for link " + l.upper + "->" +
                        l.lower);
    if (std::abs(up.J - lo.J) > 1.0 + 1e-9)
      throw ConfigError("dipole selection rule |dJ|<=1 violated: " + l.upper +
                        "->" + l.lower);
    if (up.energy <= lo.energy)
      throw ConfigError("link upper state below lower state: " + l.upper +
                        "->" + l.lower);
    DipoleLink link;
    link.upper = l.upper;
    link.lower = l.lower;
    link.einstein_a = l.a_per_s;
    link.einstein_a_sigma = l.a_sigma_per_s;
    link.omega = up.energy - lo.energy;
    // A = omega^3 R^2 / (3 pi eps0 hbar c^3 (2J_u+1)); the stored element
    // additionally folds in 1/sqrt(2J_l+1), see the header.
    const double r2 = 3.0 * pi * eps0 * hbar * c_light * c_light * c_light *
                      (2.0 * up.J + 1.0) * l.a_per_s /
                      (link.omega * link.omega * link.omega);
    link.reduced_element = std::sqrt(r2 / (2.0 * lo.J + 1.0));
    scheme.links_.push_back(link);
  }

  for (auto [u, l] : {std::pair<const char*, const char*>{"P3/2", "D5/2"},
                      {"P3/2", "D3/2"},
                      {"P1/2", "D3/2"}})
    if (!scheme.find_link(u, l))
      throw ConfigError(std::string("missing dipole link ") + u + "->" + l);

  return scheme;
}

double linear_zeeman_shift(const ZeemanState& state, const MagneticField& B) {
  if (B.tesla < 0.0) throw ConfigError("negative magnetic field magnitude");
  return state.fine.lande_g * state.mJ * mu_bohr_hz_per_t * B.tesla;
}

double clebsch_gordan_coupling(const ZeemanState& lower,
                               const ZeemanState& upper, int component) {
  if (std::abs(upper.mJ - lower.mJ - component) > 1e-9) return 0.0;
  const double ju = upper.fine.J, jl = lower.fine.J;
  const int phase = static_cast<int>(std::lround(ju - upper.mJ));
  return ((phase % 2) ? -1.0 : 1.0) * std::sqrt(2.0 * jl + 1.0) *
         angular::wigner3j(ju, 1.0, jl, -upper.mJ, component, lower.mJ);
}

std::complex<double> one_photon_rabi(double tooth_field, const DipoleLink& link,
                                     const ZeemanState& lower,
                                     const ZeemanState& upper,
                                     const PolarizationState& pol) {
  if (tooth_field < 0.0) throw ConfigError("negative field amplitude");
  if (link.upper != upper.fine.label || link.lower != lower.fine.label)
    throw ConfigError("states do not belong to the dipole link " + link.upper +
                      "->" + link.lower);
  std::complex<double> sum = 0.0;
  for (int q = -1; q <= 1; ++q)
    sum += pol.component(q) * clebsch_gordan_coupling(lower, upper, q);
  return link.reduced_element / hbar * sum * tooth_field;
}

}  // namespace combraman::atomic
