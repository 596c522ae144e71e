#pragma once

#include <cstdint>
#include <vector>

namespace combraman::dynamics {

// Distribution of two-photon detunings that the Rabi oscillation is
// averaged over (field noise, repetition-rate jitter). fwhm == 0 is the
// degenerate delta distribution.
struct DetuningDistribution {
  double center = 0.0;  // rad/s
  double fwhm = 0.0;    // rad/s, gaussian full width at half maximum

  double sigma() const;  // gaussian standard deviation
  static DetuningDistribution gaussian_fwhm_hz(double center_hz,
                                               double fwhm_hz);
};

struct RabiTrace {
  std::vector<double> t;  // s
  std::vector<double> p;  // transferred population, P(0) = 0
};

// Two-level transfer probability at fixed detuning:
// P(t) = Omega^2/(Omega^2+delta^2) * (1 - cos(sqrt(Omega^2+delta^2) t))/2.
double rabi_probability(double omega, double delta, double t);

RabiTrace rabi_trace(double omega, double delta,
                     const std::vector<double>& times);

struct QuadratureSpec {
  int nodes = 64;
  double convergence_tol = 1e-6;  // absolute in P, checked against 2x nodes
};

// Gauss-Hermite nodes/weights for integrals of f(x) exp(-x^2).
struct HermiteRule {
  std::vector<double> x;
  std::vector<double> w;
};
HermiteRule gauss_hermite(int n);

// Transfer probability averaged over the detuning distribution via
// Gauss-Hermite quadrature. Throws if doubling the node count moves any
// point by more than the tolerance.
double averaged_probability(double omega, const DetuningDistribution& g,
                            double t, const QuadratureSpec& quad = {});

RabiTrace averaged_trace(double omega, const DetuningDistribution& g,
                         const std::vector<double>& times,
                         const QuadratureSpec& quad = {});

// Phenomenological fiber-comb trace model:
// P(t) = (C/2) (1 - exp(-t/tau) cos(Omega t)).
double damped_rabi_model(double contrast, double tau, double omega, double t);

RabiTrace damped_rabi_trace(double contrast, double tau, double omega,
                            const std::vector<double>& times);

// Fourier-limited square-pulse lineshape:
// P(delta) = Omega^2/(Omega^2+delta^2) sin^2(sqrt(Omega^2+delta^2) T/2).
double sinc2_probability(double omega, double delta, double pulse_duration);

std::vector<double> lineshape(double omega, double pulse_duration,
                              const std::vector<double>& detunings);

// splitmix64; the per-point stream key makes every sample independent of
// evaluation order.
std::uint64_t splitmix64(std::uint64_t& state);

// Binomial draw of successes in `shots` Bernoulli trials with probability
// p, bit-reproducible for a given (seed, index).
int sample_shots(double p, int shots, std::uint64_t seed, std::uint64_t index);

// Counts for a whole trace/spectrum; point i uses substream (seed, i).
std::vector<int> sample_counts(const std::vector<double>& p, int shots,
                               std::uint64_t seed);

}  // namespace combraman::dynamics
