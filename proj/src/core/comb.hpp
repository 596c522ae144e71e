#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace combraman::comb {

// Spectral intensity envelope, either analytic gaussian or a measured
// table. Tabulated samples are (angular frequency, relative intensity),
// strictly increasing in frequency, peak-normalized; interpolation is
// linear, zero outside the table.
struct SpectralEnvelope {
  enum class Kind { gaussian, tabulated };
  Kind kind = Kind::gaussian;
  double center = 0.0;  // rad/s
  double fwhm = 0.0;    // rad/s
  std::vector<std::pair<double, double>> samples;

  double value(double omega) const;
  double peak() const;
  // Frequency window containing all points with value >= cutoff * peak.
  std::pair<double, double> support(double cutoff) const;

  static SpectralEnvelope gaussian(double center, double fwhm);
  static SpectralEnvelope tabulated(std::vector<std::pair<double, double>> s);
};

// Quadratic spectral phase about omega_c plus an optional tabulated
// residual: phi0 + tau_g (w - w_c) + D2/2 (w - w_c)^2 + residual(w).
struct SpectralPhase {
  double phi0 = 0.0;   // rad
  double tau_g = 0.0;  // s
  double d2 = 0.0;     // s^2, group delay dispersion
  double omega_c = 0.0;
  std::vector<std::pair<double, double>> residual;  // (rad/s, rad)

  double at(double omega) const;
};

struct CombModel {
  double rep_rate = 0.0;  // rad/s
  double ceo = 0.0;       // rad/s, in [0, rep_rate)
  SpectralEnvelope envelope;
  SpectralPhase phase;
  double avg_power = 0.0;   // W
  double beam_waist = 0.0;  // m, 1/e^2 intensity radius
  double truncation = 1e-6;

  void validate() const;
  // On-axis peak intensity 2 P / (pi w^2), W/m^2.
  double peak_intensity() const;
};

struct Tooth {
  std::int64_t index = 0;
  double omega = 0.0;      // rad/s, index * rep_rate + ceo
  double intensity = 0.0;  // W/m^2
  double field = 0.0;      // V/m
  double phi = 0.0;        // rad
};

// All teeth whose envelope intensity exceeds truncation * max, ascending
// index, intensities renormalized so they sum to the peak intensity.
std::vector<Tooth> enumerate_teeth(const CombModel& comb);

// Bins b adjacent teeth into one super-tooth carrying the summed
// intensity; coarse approximation for fast scans only. b must be >= 1
// and divide the harmonic order of interest.
std::vector<Tooth> decimate_teeth(const std::vector<Tooth>& teeth, int b);

double spectral_phase_at(const SpectralPhase& phase, double omega);

struct PhaseSample {
  double omega = 0.0;   // rad/s
  double phase = 0.0;   // rad
  double weight = 1.0;
};

struct PhaseFit {
  SpectralPhase phase;
  double covariance[3][3] = {};  // (phi0, tau_g, d2)
  double chisq = 0.0;
  int dof = 0;
};

// Weighted least-squares quadratic fit of phase samples about omega_c.
PhaseFit fit_spectral_phase(const std::vector<PhaseSample>& samples,
                            double omega_c);

// Parses a wavelength_nm,intensity CSV into an envelope in angular
// frequency, applying the lambda->omega spectral-density Jacobian.
SpectralEnvelope load_spectrum(const std::string& path);
SpectralEnvelope spectrum_from_rows(
    const std::vector<std::pair<double, double>>& wavelength_nm_intensity);

// Gaussian time-bandwidth limit: FWHM angular bandwidth of a
// transform-limited pulse of the given intensity-FWHM duration.
double fourier_limited_bandwidth(double pulse_fwhm);
double fourier_limited_duration(double bandwidth_fwhm);

}  // namespace combraman::comb
