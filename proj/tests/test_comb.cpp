#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "core/comb.hpp"
#include "core/constants.hpp"
#include "core/errors.hpp"
#include "support.hpp"

using namespace combraman;
using namespace combraman::comb;
using consts::two_pi;

namespace {
CombModel mira() {
  return testsupport::gaussian_comb(76000293.2727, 380e12, 9.5e12);
}
}  // namespace

TEST_CASE("teeth sit exactly on n * rep + ceo, ascending") {
  auto c = mira();
  c.ceo = two_pi * 1.23e6;
  const auto teeth = enumerate_teeth(c);
  REQUIRE(teeth.size() > 100);
  for (std::size_t i = 0; i < teeth.size(); ++i) {
    CHECK(teeth[i].omega ==
          static_cast<double>(teeth[i].index) * c.rep_rate + c.ceo);
    if (i > 0) CHECK(teeth[i].index == teeth[i - 1].index + 1);
  }
}

TEST_CASE("intensities renormalize to the on-axis peak") {
  for (double trunc : {1e-3, 1e-6, 1e-9}) {
    auto c = mira();
    c.truncation = trunc;
    const auto teeth = enumerate_teeth(c);
    double sum = 0.0;
    for (const auto& t : teeth) sum += t.intensity;
    CHECK(sum == doctest::Approx(c.peak_intensity()).epsilon(1e-12));
    for (const auto& t : teeth)
      CHECK(t.field == doctest::Approx(std::sqrt(2.0 * t.intensity /
                                                 (consts::eps0 *
                                                  consts::c_light))));
  }
}

TEST_CASE("gaussian support width matches the truncation cutoff") {
  const auto env = SpectralEnvelope::gaussian(two_pi * 380e12, two_pi * 9.5e12);
  const auto [lo, hi] = env.support(1e-6);
  // exp(-4 ln2 x^2/fwhm^2) = 1e-6 at x = fwhm sqrt(ln 1e6 / (4 ln 2))
  const double half = two_pi * 9.5e12 *
                      std::sqrt(std::log(1e6) / (4.0 * std::log(2.0)));
  CHECK(hi - lo == doctest::Approx(2.0 * half).epsilon(1e-12));
  CHECK(env.value(lo) == doctest::Approx(1e-6).epsilon(1e-9));
}

TEST_CASE("CEO offset translates the grid, not the envelope") {
  auto c = mira();
  const auto base = enumerate_teeth(c);
  c.ceo = two_pi * 20e6;
  const auto shifted = enumerate_teeth(c);
  // same index range (shift << rep rate)
  REQUIRE(shifted.size() == base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(shifted[i].index == base[i].index);
    // omega ~ 2.4e15 rad/s, so the difference carries ~1 rad/s rounding
    CHECK(shifted[i].omega - base[i].omega ==
          doctest::Approx(two_pi * 20e6).epsilon(1e-7));
  }
}

TEST_CASE("comb validation") {
  auto c = mira();
  c.rep_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = mira();
  c.ceo = c.rep_rate;  // must be < rep_rate
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = mira();
  c.beam_waist = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = mira();
  c.truncation = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("decimation conserves total intensity") {
  const auto teeth = enumerate_teeth(mira());
  const auto coarse = decimate_teeth(teeth, 7);
  double fine_sum = 0.0, coarse_sum = 0.0;
  for (std::size_t i = 0; i < (teeth.size() / 7) * 7; ++i)
    fine_sum += teeth[i].intensity;
  for (const auto& t : coarse) coarse_sum += t.intensity;
  CHECK(coarse_sum == doctest::Approx(fine_sum).epsilon(1e-12));
  CHECK_THROWS_AS(decimate_teeth(teeth, 0), ConfigError);
}

TEST_CASE("quadratic phase evaluation and residual interpolation") {
  SpectralPhase p;
  p.phi0 = 0.3;
  p.tau_g = 2e-15;
  p.d2 = 1.5e-27;
  p.omega_c = two_pi * 380e12;
  const double w = p.omega_c + two_pi * 1e12;
  const double x = w - p.omega_c;
  CHECK(p.at(w) == doctest::Approx(0.3 + 2e-15 * x + 0.75e-27 * x * x)
                       .epsilon(1e-12));
  p.residual = {{p.omega_c - 1.0, 0.1}, {p.omega_c + 1.0, 0.3}};
  CHECK(p.at(p.omega_c) == doctest::Approx(0.3 + 0.2).epsilon(1e-12));
}

TEST_CASE("spectral phase fit roundtrip") {
  const double wc = two_pi * 380e12;
  SpectralPhase truth;
  truth.phi0 = -0.7;
  truth.tau_g = 3.1e-15;
  truth.d2 = 2600e-30;
  truth.omega_c = wc;

  std::vector<PhaseSample> samples;
  for (int i = 0; i <= 40; ++i) {
    const double w = wc + two_pi * (-5e12 + 0.25e12 * i);
    samples.push_back({w, truth.at(w), 1.0});
  }
  const auto fit = fit_spectral_phase(samples, wc);
  CHECK(fit.phase.phi0 == doctest::Approx(truth.phi0).epsilon(1e-9));
  CHECK(fit.phase.tau_g == doctest::Approx(truth.tau_g).epsilon(1e-9));
  CHECK(fit.phase.d2 == doctest::Approx(truth.d2).epsilon(1e-9));
  CHECK(fit.chisq == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(fit.dof == 38);
  // covariance symmetric
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(fit.covariance[i][j] == doctest::Approx(fit.covariance[j][i]));
  CHECK_THROWS_AS(
      fit_spectral_phase({samples[0], samples[1]}, wc), ConfigError);
}

TEST_CASE("wavelength spectrum conversion applies the Jacobian") {
  // narrowband line at 789 nm: peak frequency within 0.1% of c/lambda
  std::vector<std::pair<double, double>> rows;
  for (int i = 0; i <= 200; ++i) {
    const double lam = 788.0 + 0.01 * i;
    const double x = (lam - 789.0) / 0.2;
    rows.emplace_back(lam, std::exp(-0.5 * x * x));
  }
  const auto env = spectrum_from_rows(rows);
  const double w0 = two_pi * consts::c_light / 789e-9;
  double best_w = 0.0, best_v = 0.0;
  for (const auto& [w, v] : env.samples)
    if (v > best_v) {
      best_v = v;
      best_w = w;
    }
  CHECK(best_w == doctest::Approx(w0).epsilon(1e-3));
  CHECK(env.peak() == doctest::Approx(1.0).epsilon(1e-12));
  // the Jacobian tilts a flat lambda spectrum as lambda^2
  const auto flat = spectrum_from_rows({{700.0, 1.0}, {900.0, 1.0}});
  const double lo_v = flat.value(two_pi * consts::c_light / 900e-9 + 1.0);
  const double hi_v = flat.value(two_pi * consts::c_light / 700e-9 - 1.0);
  CHECK(lo_v > hi_v);
}

TEST_CASE("bundled fiber spectrum loads and peaks near 789 nm") {
  const auto env = load_spectrum(std::string(DATA_DIR) +
                                 "/fiber_spectrum.csv");
  const double w0 = two_pi * consts::c_light / 789e-9;
  double best_w = 0.0, best_v = 0.0;
  for (const auto& [w, v] : env.samples)
    if (v > best_v) {
      best_v = v;
      best_w = w;
    }
  CHECK(best_w == doctest::Approx(w0).epsilon(2e-3));
  CHECK_THROWS_AS(load_spectrum("/nonexistent/file.csv"), ConfigError);
}

TEST_CASE("gaussian time-bandwidth limit") {
  // 63 fs transform-limited pulse spans about 7.0 THz FWHM
  const double bw = fourier_limited_bandwidth(63e-15);
  CHECK(bw / two_pi == doctest::Approx(7.004e12).epsilon(1e-3));
  CHECK(fourier_limited_duration(bw) == doctest::Approx(63e-15).epsilon(1e-12));
  CHECK_THROWS_AS(fourier_limited_bandwidth(0.0), ConfigError);
}

TEST_CASE("tabulated envelope validation") {
  CHECK_THROWS_AS(SpectralEnvelope::tabulated({{1.0, 1.0}}), ConfigError);
  CHECK_THROWS_AS(SpectralEnvelope::tabulated({{2.0, 1.0}, {1.0, 1.0}}),
                  ConfigError);
  CHECK_THROWS_AS(SpectralEnvelope::tabulated({{1.0, -1.0}, {2.0, 1.0}}),
                  ConfigError);
  CHECK_THROWS_AS(SpectralEnvelope::tabulated({{1.0, 0.0}, {2.0, 0.0}}),
                  ConfigError);
  const auto env = SpectralEnvelope::tabulated({{1.0, 0.0}, {2.0, 4.0},
                                                {3.0, 0.0}});
  CHECK(env.value(1.5) == doctest::Approx(0.5));  // peak-normalized
  CHECK(env.value(0.5) == 0.0);
  CHECK(env.value(3.5) == 0.0);
}
