#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace combraman::atomic {

// One fine-structure manifold. `energy` is an angular frequency (rad/s)
// relative to the scheme's declared zero (the S_1/2 centroid in the
// bundled configs).
struct FineState {
  std::string label;
  int L = 0;
  double S = 0.0;
  double J = 0.0;
  double energy = 0.0;   // rad/s
  double lande_g = 0.0;
  bool pure_ls = false;  // when set, lande_g must match the LS formula
};

struct ZeemanState {
  FineState fine;
  double mJ = 0.0;
};

// Dipole-allowed link between two manifolds, parameterized by the
// Einstein A coefficient of the upper state's decay into the lower.
//
// Convention: reduced_element pairs with the unit-normalized angular
// factor of clebsch_gordan_coupling() below, i.e. it is the full
// (2J_upper+1)-convention reduced matrix element divided by
// sqrt(2J_lower+1). The product reduced_element * coupling * E / hbar is
// the one-photon Rabi frequency.
struct DipoleLink {
  std::string upper;
  std::string lower;
  double einstein_a = 0.0;        // 1/s
  double einstein_a_sigma = 0.0;  // 1/s
  double reduced_element = 0.0;   // C m, derived
  double omega = 0.0;             // transition angular frequency, rad/s
};

// Linear polarization at angle theta from the quantization axis,
// propagating perpendicular to it. Spherical components follow
// Condon-Shortley: e_0 = cos(theta), e_{+-1} = -+ sin(theta)/sqrt(2).
struct PolarizationState {
  double theta = 0.0;
  bool perpendicular_geometry = true;
  std::complex<double> e[3];  // e_{-1}, e_0, e_{+1}

  static PolarizationState linear(double theta);
  std::complex<double> component(int q) const { return e[q + 1]; }
};

struct MagneticField {
  double tesla = 0.0;
  double sigma = 0.0;  // tesla
};

struct ManifoldConfig {
  std::string label;
  int L = 0;
  double S = 0.0;
  double J = 0.0;
  double energy_hz = 0.0;
  double g_factor = 0.0;
  bool pure_ls = false;
};

struct LinkConfig {
  std::string upper;
  std::string lower;
  double a_per_s = 0.0;
  double a_sigma_per_s = 0.0;
};

struct LevelSchemeConfig {
  std::vector<ManifoldConfig> manifolds;
  std::vector<LinkConfig> links;
};

class LevelScheme {
 public:
  const FineState& manifold(const std::string& label) const;
  bool has_manifold(const std::string& label) const;
  const DipoleLink* find_link(const std::string& upper,
                              const std::string& lower) const;
  const std::vector<DipoleLink>& links() const { return links_; }
  const std::vector<FineState>& manifolds() const { return states_; }

  // Bare fine-structure splitting |E_a - E_b| / h, in Hz.
  double fine_gap_hz(const std::string& a, const std::string& b) const;

  ZeemanState zeeman(const std::string& label, double mJ) const;
  std::vector<ZeemanState> zeeman_states(const std::string& label) const;

  friend LevelScheme build_level_scheme(const LevelSchemeConfig& config);

 private:
  std::vector<FineState> states_;
  std::vector<DipoleLink> links_;
};

// Validates the configuration and computes reduced dipole elements.
// Requires the five Ca+-style manifolds S1/2, P1/2, P3/2, D3/2, D5/2 and
// the three P-D links that feed the Raman and Stark sums.
LevelScheme build_level_scheme(const LevelSchemeConfig& config);

// Lande g-factor with electron spin g, orbital g = 1.
double lande_g_factor(double J, double L, double S, double g_s = 2.0);

// First-order Zeeman shift g_J * mJ * mu_B * B / h, in Hz.
double linear_zeeman_shift(const ZeemanState& state, const MagneticField& B);

// Unit-normalized angular coupling factor for lower -> upper absorption of
// spherical component q: sqrt(2J_l+1) * (-1)^(J_u-m_u) *
// 3j(J_u 1 J_l; -m_u q m_l). Zero unless m_u = m_l + q. For every lower
// state the squares sum to one over (upper, q).
double clebsch_gordan_coupling(const ZeemanState& lower,
                               const ZeemanState& upper, int component);

// One-photon Rabi frequency of a single comb tooth, rad/s (complex; the
// phase carries only CG signs and the polarization phase).
std::complex<double> one_photon_rabi(double tooth_field, const DipoleLink& link,
                                     const ZeemanState& lower,
                                     const ZeemanState& upper,
                                     const PolarizationState& pol);

}  // namespace combraman::atomic
