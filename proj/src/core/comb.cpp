#include "core/comb.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "core/constants.hpp"
#include "core/errors.hpp"

namespace combraman::comb {

using namespace consts;

SpectralEnvelope SpectralEnvelope::gaussian(double center, double fwhm) {
  if (fwhm <= 0.0) throw ConfigError("gaussian envelope FWHM must be > 0");
  SpectralEnvelope e;
  e.kind = Kind::gaussian;
  e.center = center;
  e.fwhm = fwhm;
  return e;
}

SpectralEnvelope SpectralEnvelope::tabulated(
    std::vector<std::pair<double, double>> s) {
  if (s.size() < 2) throw ConfigError("tabulated envelope needs >= 2 samples");
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].second < 0.0)
      throw ConfigError("negative intensity in tabulated envelope");
    if (i > 0 && s[i].first <= s[i - 1].first)
      throw ConfigError("tabulated envelope frequencies must be increasing");
    total += s[i].second;
  }
  if (total <= 0.0) throw ConfigError("tabulated envelope has zero weight");
  SpectralEnvelope e;
  e.kind = Kind::tabulated;
  e.samples = std::move(s);
  double pk = 0.0;
  for (auto& [w, v] : e.samples) pk = std::max(pk, v);
  for (auto& [w, v] : e.samples) v /= pk;
  return e;
}

double SpectralEnvelope::value(double omega) const {
  if (kind == Kind::gaussian) {
    const double sig = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    const double x = (omega - center) / sig;
    return std::exp(-0.5 * x * x);
  }
  if (omega <= samples.front().first || omega >= samples.back().first) {
    if (omega == samples.front().first) return samples.front().second;
    if (omega == samples.back().first) return samples.back().second;
    return 0.0;
  }
  auto it = std::upper_bound(
      samples.begin(), samples.end(), omega,
      [](double w, const std::pair<double, double>& s) { return w < s.first; });
  const auto& [w1, v1] = *it;
  const auto& [w0, v0] = *(it - 1);
  return v0 + (v1 - v0) * (omega - w0) / (w1 - w0);
}

double SpectralEnvelope::peak() const {
  if (kind == Kind::gaussian) return 1.0;
  double pk = 0.0;
  for (const auto& [w, v] : samples) pk = std::max(pk, v);
  return pk;
}

std::pair<double, double> SpectralEnvelope::support(double cutoff) const {
  if (kind == Kind::gaussian) {
    // exp(-4 ln2 x^2 / fwhm^2) = cutoff at x = +-half
    const double half =
        fwhm * std::sqrt(std::log(1.0 / cutoff) / (4.0 * std::log(2.0)));
    return {center - half, center + half};
  }
  return {samples.front().first, samples.back().first};
}

void CombModel::validate() const {
  if (rep_rate <= 0.0) throw ConfigError("repetition rate must be > 0");
  if (ceo < 0.0 || ceo >= rep_rate)
    throw ConfigError("CEO frequency must lie in [0, rep_rate)");
  if (avg_power < 0.0) throw ConfigError("average power must be >= 0");
  if (beam_waist <= 0.0) throw ConfigError("beam waist must be > 0");
  if (!(truncation > 0.0 && truncation < 1.0))
    throw ConfigError("truncation must lie in (0, 1)");
}

double CombModel::peak_intensity() const {
  return 2.0 * avg_power / (pi * beam_waist * beam_waist);
}

double SpectralPhase::at(double omega) const {
  const double x = omega - omega_c;
  double phi = phi0 + tau_g * x + 0.5 * d2 * x * x;
  if (!residual.empty()) {
    if (omega <= residual.front().first)
      phi += residual.front().second;
    else if (omega >= residual.back().first)
      phi += residual.back().second;
    else {
      auto it = std::upper_bound(residual.begin(), residual.end(), omega,
                                 [](double w, const std::pair<double, double>& s) {
                                   return w < s.first;
                                 });
      const auto& [w1, v1] = *it;
      const auto& [w0, v0] = *(it - 1);
      phi += v0 + (v1 - v0) * (omega - w0) / (w1 - w0);
    }
  }
  return phi;
}

double spectral_phase_at(const SpectralPhase& phase, double omega) {
  return phase.at(omega);
}

std::vector<Tooth> enumerate_teeth(const CombModel& comb) {
  comb.validate();
  const auto [lo, hi] = comb.envelope.support(comb.truncation);
  const std::int64_t n_lo =
      static_cast<std::int64_t>(std::floor((lo - comb.ceo) / comb.rep_rate));
  const std::int64_t n_hi =
      static_cast<std::int64_t>(std::ceil((hi - comb.ceo) / comb.rep_rate));
  const double cutoff = comb.truncation * comb.envelope.peak();

  std::vector<Tooth> teeth;
  double weight_sum = 0.0;
  for (std::int64_t n = n_lo; n <= n_hi; ++n) {
    const double w = static_cast<double>(n) * comb.rep_rate + comb.ceo;
    const double env = comb.envelope.value(w);
    if (env <= cutoff) continue;
    Tooth t;
    t.index = n;
    t.omega = w;
    t.intensity = env;  // renormalized below
    t.phi = comb.phase.at(w);
    teeth.push_back(t);
    weight_sum += env;
  }
  if (teeth.empty())
    throw ComputeError("comb envelope entirely below the truncation cutoff");

  const double peak = comb.peak_intensity();
  for (auto& t : teeth) {
    t.intensity *= peak / weight_sum;
    t.field = std::sqrt(2.0 * t.intensity / (eps0 * c_light));
  }
  return teeth;
}

std::vector<Tooth> decimate_teeth(const std::vector<Tooth>& teeth, int b) {
  if (b < 1) throw ConfigError("decimation factor must be >= 1");
  if (b == 1) return teeth;
  std::vector<Tooth> out;
  for (std::size_t i = 0; i + b <= teeth.size(); i += b) {
    Tooth t = teeth[i + b / 2];
    t.intensity = 0.0;
    for (int k = 0; k < b; ++k) t.intensity += teeth[i + k].intensity;
    t.field = std::sqrt(2.0 * t.intensity / (eps0 * c_light));
    out.push_back(t);
  }
  if (out.empty()) throw ComputeError("decimation left no teeth");
  return out;
}

PhaseFit fit_spectral_phase(const std::vector<PhaseSample>& samples,
                            double omega_c) {
  if (samples.size() < 3)
    throw ConfigError("spectral phase fit needs at least 3 samples");

  const std::size_t n = samples.size();
  // Scale the abscissa to unit RMS; the raw columns (1, x, x^2/2) span
  // ~50 decades for THz offsets and make the normal equations singular.
  double x_rms = 0.0;
  for (const auto& s : samples) {
    const double x = s.omega - omega_c;
    x_rms += x * x;
  }
  x_rms = std::sqrt(x_rms / static_cast<double>(n));
  if (x_rms <= 0.0)
    throw ComputeError("phase samples are all at the reference frequency");

  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd y(n), wgt(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (samples[i].omega - omega_c) / x_rms;
    a(i, 0) = 1.0;
    a(i, 1) = x;
    a(i, 2) = 0.5 * x * x;
    y(i) = samples[i].phase;
    if (samples[i].weight <= 0.0)
      throw ConfigError("phase sample weights must be > 0");
    wgt(i) = samples[i].weight;
  }
  Eigen::MatrixXd aw = wgt.cwiseSqrt().asDiagonal() * a;
  Eigen::VectorXd yw = wgt.cwiseSqrt().asDiagonal() * y;
  Eigen::MatrixXd ata = aw.transpose() * aw;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(ata);
  if (!lu.isInvertible())
    throw ComputeError("rank-deficient spectral phase design matrix");
  Eigen::VectorXd p = lu.solve(aw.transpose() * yw);
  Eigen::MatrixXd cov = lu.inverse();
  Eigen::VectorXd r = y - a * p;
  // undo the abscissa scaling: p_k and cov_kj pick up 1/x_rms^k factors
  const double scale[3] = {1.0, 1.0 / x_rms, 1.0 / (x_rms * x_rms)};
  for (int i = 0; i < 3; ++i) p(i) *= scale[i];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) cov(i, j) *= scale[i] * scale[j];

  PhaseFit fit;
  fit.phase.phi0 = p(0);
  fit.phase.tau_g = p(1);
  fit.phase.d2 = p(2);
  fit.phase.omega_c = omega_c;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) fit.covariance[i][j] = cov(i, j);
  fit.chisq = (wgt.array() * r.array().square()).sum();
  fit.dof = static_cast<int>(n) - 3;
  for (std::size_t i = 0; i < n; ++i)
    fit.phase.residual.emplace_back(samples[i].omega, r(i));
  std::sort(fit.phase.residual.begin(), fit.phase.residual.end());
  return fit;
}

SpectralEnvelope spectrum_from_rows(
    const std::vector<std::pair<double, double>>& rows) {
  if (rows.size() < 2) throw ConfigError("spectrum needs at least 2 rows");
  std::vector<std::pair<double, double>> in_omega;
  in_omega.reserve(rows.size());
  for (const auto& [lam_nm, inten] : rows) {
    if (lam_nm <= 0.0) throw ConfigError("non-positive wavelength");
    if (inten < 0.0) throw ConfigError("negative spectral intensity");
    const double lam = lam_nm * 1e-9;
    const double w = two_pi * c_light / lam;
    // S(omega) = S(lambda) |dlambda/domega| = S(lambda) lambda^2/(2 pi c)
    in_omega.emplace_back(w, inten * lam * lam / (two_pi * c_light));
  }
  std::sort(in_omega.begin(), in_omega.end());
  for (std::size_t i = 1; i < in_omega.size(); ++i)
    if (in_omega[i].first == in_omega[i - 1].first)
      throw ConfigError("duplicate wavelength sample");
  return SpectralEnvelope::tabulated(std::move(in_omega));
}

SpectralEnvelope load_spectrum(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spectrum file: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("wavelength_nm,intensity", 0) != 0)
    throw ConfigError("spectrum file must start with 'wavelength_nm,intensity'");
  std::vector<std::pair<double, double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
      throw ConfigError("malformed spectrum row: " + line);
    rows.emplace_back(std::stod(a), std::stod(b));
  }
  return spectrum_from_rows(rows);
}

double fourier_limited_bandwidth(double pulse_fwhm) {
  if (pulse_fwhm <= 0.0) throw ConfigError("pulse duration must be > 0");
  return two_pi * (2.0 * std::log(2.0) / pi) / pulse_fwhm;
}

double fourier_limited_duration(double bandwidth_fwhm) {
  if (bandwidth_fwhm <= 0.0) throw ConfigError("bandwidth must be > 0");
  return two_pi * (2.0 * std::log(2.0) / pi) / bandwidth_fwhm;
}

}  // namespace combraman::comb
