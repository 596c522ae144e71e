#include "core/dynamics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>

#include "core/constants.hpp"
#include "core/errors.hpp"

namespace combraman::dynamics {

using namespace consts;

double DetuningDistribution::sigma() const {
  return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
}

DetuningDistribution DetuningDistribution::gaussian_fwhm_hz(double center_hz,
                                                            double fwhm_hz) {
  if (fwhm_hz < 0.0) throw ConfigError("negative detuning FWHM");
  return {two_pi * center_hz, two_pi * fwhm_hz};
}

double rabi_probability(double omega, double delta, double t) {
  if (t < 0.0) throw ConfigError("negative interrogation time");
  if (omega < 0.0) throw ConfigError("negative Rabi frequency");
  const double w2 = omega * omega;
  const double g2 = w2 + delta * delta;
  if (g2 == 0.0) return 0.0;
  return w2 / g2 * (1.0 - std::cos(std::sqrt(g2) * t)) / 2.0;
}

RabiTrace rabi_trace(double omega, double delta,
                     const std::vector<double>& times) {
  RabiTrace tr;
  tr.t = times;
  tr.p.reserve(times.size());
  for (double t : times) tr.p.push_back(rabi_probability(omega, delta, t));
  return tr;
}

namespace {

HermiteRule compute_gauss_hermite(int n) {
  // Golub-Welsch: eigen-decomposition of the Jacobi matrix.
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(k / 2.0);
    j(k, k - 1) = b;
    j(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  HermiteRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  const double mu0 = std::sqrt(pi);  // integral of exp(-x^2)
  for (int k = 0; k < n; ++k) {
    rule.x[k] = es.eigenvalues()(k);
    const double v0 = es.eigenvectors()(0, k);
    rule.w[k] = mu0 * v0 * v0;
  }
  return rule;
}

}  // namespace

HermiteRule gauss_hermite(int n) {
  if (n < 1) throw ConfigError("quadrature order must be >= 1");
  // The eigen-decomposition is O(n^3); memoize per order.
  static std::mutex mutex;
  static std::map<int, HermiteRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_hermite(n)).first;
  return it->second;
}

namespace {

double averaged_once(double omega, const DetuningDistribution& g, double t,
                     const HermiteRule& rule) {
  // delta = center + sqrt(2) sigma x maps the gaussian onto exp(-x^2).
  const double s = g.sigma();
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.x.size(); ++k) {
    const double delta = g.center + std::sqrt(2.0) * s * rule.x[k];
    sum += rule.w[k] * rabi_probability(omega, delta, t);
  }
  return sum / std::sqrt(pi);
}

}  // namespace

double averaged_probability(double omega, const DetuningDistribution& g,
                            double t, const QuadratureSpec& quad) {
  if (g.fwhm < 0.0) throw ConfigError("negative detuning FWHM");
  if (g.fwhm == 0.0) return rabi_probability(omega, g.center, t);
  const double coarse = averaged_once(omega, g, t, gauss_hermite(quad.nodes));
  const double fine =
      averaged_once(omega, g, t, gauss_hermite(2 * quad.nodes));
  if (std::abs(fine - coarse) > quad.convergence_tol)
    throw ComputeError("detuning-average quadrature did not converge");
  return fine;
}

RabiTrace averaged_trace(double omega, const DetuningDistribution& g,
                         const std::vector<double>& times,
                         const QuadratureSpec& quad) {
  if (g.fwhm < 0.0) throw ConfigError("negative detuning FWHM");
  if (g.fwhm == 0.0) return rabi_trace(omega, g.center, times);
  RabiTrace tr;
  tr.t = times;
  tr.p.reserve(times.size());
  const HermiteRule coarse = gauss_hermite(quad.nodes);
  const HermiteRule fine = gauss_hermite(2 * quad.nodes);
  for (double t : times) {
    const double a = averaged_once(omega, g, t, coarse);
    const double b = averaged_once(omega, g, t, fine);
    if (std::abs(b - a) > quad.convergence_tol)
      throw ComputeError("detuning-average quadrature did not converge");
    tr.p.push_back(b);
  }
  return tr;
}

double damped_rabi_model(double contrast, double tau, double omega, double t) {
  if (tau <= 0.0) throw ConfigError("damping time must be > 0");
  return contrast / 2.0 * (1.0 - std::exp(-t / tau) * std::cos(omega * t));
}

RabiTrace damped_rabi_trace(double contrast, double tau, double omega,
                            const std::vector<double>& times) {
  RabiTrace tr;
  tr.t = times;
  tr.p.reserve(times.size());
  for (double t : times)
    tr.p.push_back(damped_rabi_model(contrast, tau, omega, t));
  return tr;
}

double sinc2_probability(double omega, double delta, double pulse_duration) {
  if (pulse_duration <= 0.0) throw ConfigError("pulse duration must be > 0");
  const double w2 = omega * omega;
  const double g2 = w2 + delta * delta;
  if (g2 == 0.0) return 0.0;
  const double s = std::sin(std::sqrt(g2) * pulse_duration / 2.0);
  return w2 / g2 * s * s;
}

std::vector<double> lineshape(double omega, double pulse_duration,
                              const std::vector<double>& detunings) {
  std::vector<double> out;
  out.reserve(detunings.size());
  for (double d : detunings)
    out.push_back(sinc2_probability(omega, d, pulse_duration));
  return out;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

int sample_shots(double p, int shots, std::uint64_t seed,
                 std::uint64_t index) {
  if (p < 0.0 || p > 1.0) throw ComputeError("probability outside [0, 1]");
  if (shots < 1) throw ConfigError("shot count must be >= 1");
  // One substream per data point, keyed on (seed, index).
  std::uint64_t mix = seed;
  (void)splitmix64(mix);
  mix ^= 0x6a09e667f3bcc909ull ^ index;
  int successes = 0;
  for (int s = 0; s < shots; ++s) {
    const std::uint64_t u = splitmix64(mix);
    const double x = (u >> 11) * 0x1.0p-53;
    if (x < p) ++successes;
  }
  return successes;
}

std::vector<int> sample_counts(const std::vector<double>& p, int shots,
                               std::uint64_t seed) {
  std::vector<int> out;
  out.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    out.push_back(sample_shots(p[i], shots, seed, i));
  return out;
}

}  // namespace combraman::dynamics
