#pragma once

#include <functional>
#include <string>
#include <vector>

#include "core/dynamics.hpp"

namespace combraman::fitting {

// Column data with optional per-point uncertainties. Empty sigma means
// unit weights.
struct DataSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> sigma;

  void validate() const;
  double weight(std::size_t i) const;  // 1/sigma_i^2
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> estimates;
  std::vector<std::vector<double>> covariance;
  double chisq = 0.0;
  int dof = 0;
  bool converged = false;
  int iterations = 0;

  double error(std::size_t i) const;  // sqrt of the diagonal
};

// Model value at x for parameter vector p.
using ModelFn = std::function<double(double x, const std::vector<double>& p)>;

struct SolverOptions {
  int max_iterations = 200;
  double relative_step_tol = 1e-10;
  int max_halvings = 30;
  // Inflate parameter errors by sqrt(chisq/dof) when chisq/dof > 1.
  bool inflate_errors = true;
};

// Damped Gauss-Newton least squares with a numeric forward-difference
// Jacobian and step halving on chi-square increase.
FitResult gauss_newton(const ModelFn& model, const DataSeries& data,
                       std::vector<double> init,
                       const std::vector<std::string>& names,
                       const SolverOptions& opts = {});

// Rabi spectroscopy line at fixed pulse time:
// p(x) = A * W^2/(W^2+d^2) * sin^2(sqrt(W^2+d^2) t/2), d = 2 pi (x - x0).
// x is in Hz; parameters are {center_hz, omega_rad_s, amplitude}.
FitResult fit_sinc2(const DataSeries& series, double pulse_time);

// p(t) = (C/2) (1 - e^{-t/tau} cos(W t)) over time-domain data;
// parameters {contrast, tau_s, omega_rad_s}. Initial frequency comes from
// a coarse periodogram.
FitResult fit_damped_rabi(const DataSeries& series);

// Gaussian-detuning-averaged oscillation with the flat-phase Rabi
// frequency fixed: W = eta_eff * omega_flat, zero mean detuning.
// Parameters {eta_eff, delta_nu_eff_hz} (gaussian FWHM, Hz).
FitResult fit_averaged_rabi(const DataSeries& series, double omega_flat,
                            const dynamics::QuadratureSpec& quad = {});

struct ValueWithError {
  double value = 0.0;
  double sigma = 0.0;
};

struct LinearExtrapolation {
  ValueWithError intercept;  // value at x = 0
  ValueWithError slope;
};

// Weighted straight-line fit; the intercept extrapolates to zero abscissa.
LinearExtrapolation extrapolate_zero_intensity(const DataSeries& series);

// Mean of a symmetric pair (e.g. equal and opposite Zeeman components);
// the first-order odd shift cancels.
ValueWithError pair_average(const ValueWithError& a, const ValueWithError& b);

struct WeightedMean {
  double value = 0.0;
  double sigma = 0.0;          // inverse-variance propagated
  double scatter_sigma = 0.0;  // standard deviation of the mean from scatter
  double quoted_sigma = 0.0;   // the larger of the two
  double chisq = 0.0;
  int dof = 0;
};

WeightedMean weighted_mean(const std::vector<ValueWithError>& values);

// Wilson-interval standard error for k successes in n trials, floored at
// 1/(2n) so zero/full counts keep a finite weight.
double binomial_sigma(int successes, int shots);

}  // namespace combraman::fitting
