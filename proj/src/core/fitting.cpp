#include "core/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/constants.hpp"
#include "core/errors.hpp"

namespace combraman::fitting {

using namespace consts;

void DataSeries::validate() const {
  if (x.size() != y.size())
    throw ConfigError("data series x/y length mismatch");
  if (!sigma.empty() && sigma.size() != x.size())
    throw ConfigError("data series sigma length mismatch");
  if (x.empty()) throw ConfigError("empty data series");
  for (double s : sigma)
    if (!(s > 0.0)) throw ConfigError("non-positive sigma in data series");
}

double DataSeries::weight(std::size_t i) const {
  if (sigma.empty()) return 1.0;
  return 1.0 / (sigma[i] * sigma[i]);
}

double FitResult::error(std::size_t i) const {
  return std::sqrt(std::max(0.0, covariance[i][i]));
}

namespace {

double chi_square(const ModelFn& model, const DataSeries& d,
                  const std::vector<double>& p) {
  double c = 0.0;
  for (std::size_t i = 0; i < d.x.size(); ++i) {
    const double r = d.y[i] - model(d.x[i], p);
    c += d.weight(i) * r * r;
  }
  return c;
}

}  // namespace

FitResult gauss_newton(const ModelFn& model, const DataSeries& data,
                       std::vector<double> init,
                       const std::vector<std::string>& names,
                       const SolverOptions& opts) {
  data.validate();
  if (init.size() != names.size())
    throw ConfigError("parameter name/initial-value count mismatch");
  const int np = static_cast<int>(init.size());
  const int nd = static_cast<int>(data.x.size());
  if (nd < np) throw ConfigError("fewer data points than fit parameters");

  std::vector<double> p = std::move(init);
  double chisq = chi_square(model, data, p);

  FitResult res;
  res.names = names;
  Eigen::MatrixXd jac(nd, np);
  Eigen::VectorXd resid(nd);

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    res.iterations = iter + 1;
    for (int i = 0; i < nd; ++i) {
      const double sw = std::sqrt(data.weight(i));
      resid(i) = sw * (data.y[i] - model(data.x[i], p));
      for (int j = 0; j < np; ++j) {
        const double h = 1e-7 * std::max(std::abs(p[j]), 1e-12);
        std::vector<double> ph = p;
        ph[j] += h;
        jac(i, j) = sw * (model(data.x[i], ph) - model(data.x[i], p)) / h;
      }
    }
    Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
    if (!lu.isInvertible())
      throw ComputeError("singular normal equations in least-squares fit");
    Eigen::VectorXd step = lu.solve(jac.transpose() * resid);

    double scale = 1.0;
    std::vector<double> trial(p.size());
    double trial_chisq = chisq;
    bool improved = false;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      for (int j = 0; j < np; ++j) trial[j] = p[j] + scale * step(j);
      trial_chisq = chi_square(model, data, trial);
      if (std::isfinite(trial_chisq) && trial_chisq <= chisq) {
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) {
      // No descent along the Gauss-Newton direction even at 2^-30 of the
      // step: the gradient is zero to numerical precision.
      res.converged = true;
      break;
    }

    double rel = 0.0;
    for (int j = 0; j < np; ++j)
      rel = std::max(rel, std::abs(scale * step(j)) /
                              std::max(std::abs(p[j]), 1e-12));
    p = trial;
    chisq = trial_chisq;
    if (rel < opts.relative_step_tol) {
      res.converged = true;
      break;
    }
  }

  // Covariance from the Jacobian at the solution.
  for (int i = 0; i < nd; ++i) {
    const double sw = std::sqrt(data.weight(i));
    for (int j = 0; j < np; ++j) {
      const double h = 1e-7 * std::max(std::abs(p[j]), 1e-12);
      std::vector<double> ph = p;
      ph[j] += h;
      jac(i, j) = sw * (model(data.x[i], ph) - model(data.x[i], p)) / h;
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jac.transpose() * jac);
  if (!lu.isInvertible())
    throw ComputeError("singular covariance in least-squares fit");
  Eigen::MatrixXd cov = lu.inverse();

  res.estimates = p;
  res.chisq = chisq;
  res.dof = nd - np;
  double inflate = 1.0;
  if (opts.inflate_errors && res.dof > 0 && chisq / res.dof > 1.0)
    inflate = chisq / res.dof;
  res.covariance.assign(np, std::vector<double>(np, 0.0));
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < np; ++j) res.covariance[i][j] = inflate * cov(i, j);
  return res;
}

FitResult fit_sinc2(const DataSeries& series, double pulse_time) {
  series.validate();
  if (pulse_time <= 0.0) throw ConfigError("pulse time must be > 0");

  // Seed the center from the weighted centroid of the top quartile.
  std::vector<double> sorted_y = series.y;
  std::sort(sorted_y.begin(), sorted_y.end());
  if (sorted_y.back() == sorted_y.front())
    throw ComputeError("constant data: lineshape is unidentifiable");
  const double thresh = sorted_y[sorted_y.size() * 3 / 4];
  double cw = 0.0, cx = 0.0;
  for (std::size_t i = 0; i < series.x.size(); ++i)
    if (series.y[i] >= thresh) {
      cw += series.y[i];
      cx += series.y[i] * series.x[i];
    }
  const double center0 = (cw > 0.0) ? cx / cw : series.x.front();
  const double amp0 =
      std::max(sorted_y.back(), 1e-3);  // keep the gradient alive
  const double omega0 = pi / pulse_time;

  ModelFn model = [pulse_time](double x, const std::vector<double>& p) {
    const double d = two_pi * (x - p[0]);
    return p[2] * dynamics::sinc2_probability(std::abs(p[1]), d, pulse_time);
  };
  return gauss_newton(model, series, {center0, omega0, amp0},
                      {"center_hz", "omega_rad_s", "amplitude"});
}

FitResult fit_damped_rabi(const DataSeries& series) {
  series.validate();
  const auto [mn_it, mx_it] =
      std::minmax_element(series.y.begin(), series.y.end());
  if (*mx_it <= *mn_it)
    throw ComputeError("no oscillation detected in Rabi trace");
  const double amp0 = std::max(*mx_it - *mn_it, 1e-3);
  const double ymean =
      std::accumulate(series.y.begin(), series.y.end(), 0.0) / series.y.size();
  const double span =
      *std::max_element(series.x.begin(), series.x.end()) -
      *std::min_element(series.x.begin(), series.x.end());
  if (span <= 0.0) throw ConfigError("degenerate time axis");

  // Coarse periodogram for the oscillation frequency.
  const int n = static_cast<int>(series.x.size());
  double best_w = two_pi / span, best_pow = -1.0;
  const int ngrid = 40 * n;
  for (int k = 1; k <= ngrid; ++k) {
    const double w = two_pi * (0.5 + 0.25 * (k - 1)) / span;
    if (w * span / two_pi > n / 2.0) break;  // Nyquist
    double cc = 0.0, ss = 0.0;
    for (int i = 0; i < n; ++i) {
      cc += (series.y[i] - ymean) * std::cos(w * series.x[i]);
      ss += (series.y[i] - ymean) * std::sin(w * series.x[i]);
    }
    const double pw = cc * cc + ss * ss;
    if (pw > best_pow) {
      best_pow = pw;
      best_w = w;
    }
  }

  ModelFn model = [](double t, const std::vector<double>& p) {
    return dynamics::damped_rabi_model(p[0], std::abs(p[1]), p[2], t);
  };
  FitResult res = gauss_newton(model, series, {amp0, span, best_w},
                               {"contrast", "tau_s", "omega_rad_s"});
  res.estimates[1] = std::abs(res.estimates[1]);
  return res;
}

FitResult fit_averaged_rabi(const DataSeries& series, double omega_flat,
                            const dynamics::QuadratureSpec& quad) {
  series.validate();
  if (omega_flat <= 0.0) throw ConfigError("flat-phase Rabi frequency must be > 0");

  dynamics::QuadratureSpec relaxed = quad;
  relaxed.convergence_tol = 1e300;  // enforced once at the solution
  ModelFn model = [&](double t, const std::vector<double>& p) {
    const auto g =
        dynamics::DetuningDistribution::gaussian_fwhm_hz(0.0, std::abs(p[1]));
    return dynamics::averaged_probability(std::abs(p[0]) * omega_flat, g, t,
                                          relaxed);
  };

  // Coarse grid seed: the likelihood has local minima in the spread, so
  // scan eta x spread before refining.
  std::vector<double> init = {0.8, 0.02 * omega_flat / two_pi};
  double best = chi_square(model, series, init);
  for (double eta0 : {0.5, 0.7, 0.85, 1.0}) {
    for (int k = 0; k <= 12; ++k) {
      const double dnu0 =
          omega_flat / two_pi * std::pow(10.0, -2.0 + 3.0 * k / 12.0);
      const std::vector<double> trial = {eta0, dnu0};
      const double c = chi_square(model, series, trial);
      if (c < best) {
        best = c;
        init = trial;
      }
    }
  }
  FitResult res =
      gauss_newton(model, series, init, {"eta_eff", "delta_nu_eff_hz"});
  res.estimates[0] = std::abs(res.estimates[0]);
  res.estimates[1] = std::abs(res.estimates[1]);
  // Re-evaluate with the real tolerance so non-convergent quadrature at the
  // fitted parameters surfaces as an error.
  dynamics::averaged_probability(
      res.estimates[0] * omega_flat,
      dynamics::DetuningDistribution::gaussian_fwhm_hz(0.0, res.estimates[1]),
      series.x.back(), quad);
  return res;
}

LinearExtrapolation extrapolate_zero_intensity(const DataSeries& series) {
  series.validate();
  if (series.x.size() < 2)
    throw ConfigError("extrapolation needs at least 2 points");
  double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < series.x.size(); ++i) {
    const double w = series.weight(i);
    sw += w;
    sx += w * series.x[i];
    sy += w * series.y[i];
    sxx += w * series.x[i] * series.x[i];
    sxy += w * series.x[i] * series.y[i];
  }
  const double det = sw * sxx - sx * sx;
  if (det <= 0.0) throw ComputeError("degenerate extrapolation abscissa");
  LinearExtrapolation out;
  out.intercept.value = (sxx * sy - sx * sxy) / det;
  out.slope.value = (sw * sxy - sx * sy) / det;
  out.intercept.sigma = std::sqrt(sxx / det);
  out.slope.sigma = std::sqrt(sw / det);
  if (series.sigma.empty()) {
    // Unit weights carry no scale: use the residual variance.
    double ss = 0.0;
    for (std::size_t i = 0; i < series.x.size(); ++i) {
      const double r =
          series.y[i] - out.intercept.value - out.slope.value * series.x[i];
      ss += r * r;
    }
    const int dof = static_cast<int>(series.x.size()) - 2;
    if (dof > 0) {
      const double scale = std::sqrt(ss / dof);
      out.intercept.sigma *= scale;
      out.slope.sigma *= scale;
    }
  }
  return out;
}

ValueWithError pair_average(const ValueWithError& a, const ValueWithError& b) {
  ValueWithError out;
  out.value = (a.value + b.value) / 2.0;
  out.sigma = std::sqrt(a.sigma * a.sigma + b.sigma * b.sigma) / 2.0;
  return out;
}

WeightedMean weighted_mean(const std::vector<ValueWithError>& values) {
  if (values.empty()) throw ConfigError("weighted mean of nothing");
  double sw = 0.0, swx = 0.0;
  for (const auto& v : values) {
    if (!(v.sigma > 0.0))
      throw ConfigError("weighted mean requires positive uncertainties");
    const double w = 1.0 / (v.sigma * v.sigma);
    sw += w;
    swx += w * v.value;
  }
  WeightedMean out;
  out.value = swx / sw;
  out.sigma = 1.0 / std::sqrt(sw);
  double wscatter = 0.0;
  for (const auto& v : values) {
    const double w = 1.0 / (v.sigma * v.sigma);
    const double r = (v.value - out.value) / v.sigma;
    out.chisq += r * r;
    wscatter += w * (v.value - out.value) * (v.value - out.value);
  }
  out.dof = static_cast<int>(values.size()) - 1;
  if (out.dof > 0)
    out.scatter_sigma = std::sqrt(wscatter / (out.dof * sw));
  out.quoted_sigma = std::max(out.sigma, out.scatter_sigma);
  return out;
}

double binomial_sigma(int successes, int shots) {
  if (shots < 1) throw ConfigError("shot count must be >= 1");
  if (successes < 0 || successes > shots)
    throw ConfigError("success count outside [0, shots]");
  const double n = shots, k = successes;
  // Wilson interval half-width with z = 1.
  const double sigma =
      std::sqrt(k * (n - k) / n + 0.25) / (n + 1.0);
  return std::max(sigma, 1.0 / (2.0 * n));
}

}  // namespace combraman::fitting
