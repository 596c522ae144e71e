#pragma once

// Shared fixtures for the unit tests: the five-manifold Ca+ level scheme
// and a gaussian comb sized like the bundled configs.

#include "core/atomic.hpp"
#include "core/comb.hpp"

namespace testsupport {

inline combraman::atomic::LevelSchemeConfig scheme_config() {
  using combraman::atomic::LinkConfig;
  using combraman::atomic::ManifoldConfig;
  combraman::atomic::LevelSchemeConfig cfg;
  cfg.manifolds = {
      {"S1/2", 0, 0.5, 0.5, 0.0, 2.00231930436, false},
      {"D3/2", 2, 0.5, 1.5, 409222401226702.0, 0.8, true},
      {"D5/2", 2, 0.5, 2.5, 411042000248236.0, 1.2, true},
      {"P1/2", 1, 0.5, 0.5, 755222766000000.0, 2.0 / 3.0, true},
      {"P3/2", 1, 0.5, 1.5, 761904475000000.0, 4.0 / 3.0, true},
  };
  cfg.links = {
      {"P3/2", "D5/2", 8.48e6, 1.0e5},
      {"P3/2", "D3/2", 0.955e6, 2.0e4},
      {"P1/2", "D3/2", 9.3e6, 1.5e5},
      {"P1/2", "S1/2", 1.32e8, 2.0e6},
      {"P3/2", "S1/2", 1.35e8, 2.0e6},
  };
  return cfg;
}

inline combraman::atomic::LevelScheme levels() {
  return combraman::atomic::build_level_scheme(scheme_config());
}

// D5/2 - D3/2 splitting of the fixture, Hz.
inline constexpr double fine_gap_hz = 411042000248236.0 - 409222401226702.0;

// Gaussian comb centered near 789 nm; fwhm_hz and d2_fs2 as given.
inline combraman::comb::CombModel gaussian_comb(double rep_rate_hz,
                                                double center_hz,
                                                double fwhm_hz,
                                                double d2_fs2 = 0.0,
                                                double power_w = 0.08534) {
  using namespace combraman;
  comb::CombModel c;
  c.rep_rate = 2.0 * M_PI * rep_rate_hz;
  c.ceo = 0.0;
  c.envelope = comb::SpectralEnvelope::gaussian(2.0 * M_PI * center_hz,
                                                2.0 * M_PI * fwhm_hz);
  c.phase.omega_c = 2.0 * M_PI * center_hz;
  c.phase.d2 = d2_fs2 * 1e-30;
  c.avg_power = power_w;
  c.beam_waist = 34e-6;
  c.truncation = 1e-6;
  return c;
}

}  // namespace testsupport
