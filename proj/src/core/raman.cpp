#include "core/raman.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "core/constants.hpp"
#include "core/errors.hpp"

namespace combraman::raman {

using namespace consts;
using atomic::ZeemanState;

namespace {

std::string mj_label(const std::string& manifold, double mj) {
  const long two = std::lround(2.0 * mj);
  std::string m = (two % 2 == 0) ? std::to_string(two / 2)
                                 : std::to_string(two) + "/2";
  return manifold + " mJ=" + m;
}

// Manifolds dipole-linked to both legs of the transition, in scheme order.
std::vector<std::string> intermediate_manifolds(
    const atomic::LevelScheme& levels, const TransitionSpec& tr) {
  std::vector<std::string> out;
  for (const auto& m : levels.manifolds())
    if (levels.find_link(m.label, tr.initial.fine.label) &&
        levels.find_link(m.label, tr.final_.fine.label))
      out.push_back(m.label);
  if (out.empty())
    throw ConfigError("no intermediate manifold couples " +
                      tr.initial.fine.label + " to " + tr.final_.fine.label);
  return out;
}

constexpr double k_default_guard = two_pi * 100.0e9;  // rad/s

}  // namespace

ResonanceCondition resonance_condition(double transition_freq_hz,
                                       double rep_rate_hz) {
  if (transition_freq_hz <= 0.0 || rep_rate_hz <= 0.0)
    throw ConfigError("transition and repetition frequencies must be > 0");
  ResonanceCondition rc;
  rc.q = std::llround(transition_freq_hz / rep_rate_hz);
  if (rc.q < 1) throw ComputeError("repetition rate exceeds the transition");
  rc.required_rep_rate_hz = transition_freq_hz / static_cast<double>(rc.q);
  rc.residual_hz =
      static_cast<double>(rc.q) * rep_rate_hz - transition_freq_hz;
  return rc;
}

RamanResult raman_rabi_teeth(const std::vector<comb::Tooth>& teeth, int q,
                             const atomic::LevelScheme& levels,
                             const TransitionSpec& transition,
                             const atomic::PolarizationState& pol) {
  if (q < 1) throw ConfigError("harmonic order must be >= 1");

  const auto manifolds = intermediate_manifolds(levels, transition);
  std::unordered_map<std::int64_t, const comb::Tooth*> by_index;
  for (const auto& t : teeth) by_index.emplace(t.index, &t);

  // The angular factors do not depend on the tooth; precompute the
  // per-path product at unit fields and scale by E_lo E_hi / (2 Delta).
  struct Path {
    std::string level_key;
    double gap = 0.0;                 // rad/s from the initial state
    std::complex<double> amplitude;   // Omega_g conj(Omega_e) at unit fields
  };
  std::vector<Path> paths;
  for (const auto& label : manifolds) {
    const atomic::DipoleLink* link_g =
        levels.find_link(label, transition.initial.fine.label);
    const atomic::DipoleLink* link_e =
        levels.find_link(label, transition.final_.fine.label);
    const double gap =
        levels.manifold(label).energy - transition.initial.fine.energy;
    for (const auto& mid : levels.zeeman_states(label)) {
      const std::complex<double> omega_g =
          atomic::one_photon_rabi(1.0, *link_g, transition.initial, mid, pol);
      const std::complex<double> omega_e =
          atomic::one_photon_rabi(1.0, *link_e, transition.final_, mid, pol);
      if (omega_g == 0.0 || omega_e == 0.0) continue;
      paths.push_back(
          {mj_label(label, mid.mJ), gap, omega_g * std::conj(omega_e)});
    }
  }

  RamanResult res;
  std::map<std::string, std::complex<double>> per_level;
  for (const auto& hi : teeth) {  // ascending tooth index
    auto it = by_index.find(hi.index - q);
    if (it == by_index.end()) continue;
    const comb::Tooth& lo = *it->second;
    ++res.pair_count;
    const double dphi = hi.phi - lo.phi;
    const std::complex<double> rot(std::cos(dphi), std::sin(dphi));
    const double fields = lo.field * hi.field;

    for (const auto& path : paths) {
      const double delta = hi.omega - path.gap;
      if (std::abs(delta) < k_default_guard)
        throw ComputeError("comb tooth within 100 GHz of the one-photon "
                           "resonance at " + path.level_key);
      const std::complex<double> term =
          path.amplitude * (fields / (2.0 * delta));
      res.flat_sum += term;
      res.complex_sum += term * rot;
      per_level[path.level_key] += term * rot;
    }
  }
  res.per_level = std::move(per_level);

  res.omega_r = std::abs(res.complex_sum);
  res.eta = 1.0;
  const double flat = std::abs(res.flat_sum);
  res.eta_eff = (flat > 0.0) ? res.omega_r / flat : 1.0;
  if (res.pair_count == 1) res.cw_equivalent = res.omega_r;
  return res;
}

RamanResult raman_rabi(const comb::CombModel& comb,
                       const atomic::LevelScheme& levels,
                       const TransitionSpec& transition,
                       const atomic::PolarizationState& pol) {
  const double omega0 =
      transition.initial.fine.energy - transition.final_.fine.energy;
  if (omega0 <= 0.0)
    throw ConfigError("initial state must lie above the final state");
  const double mismatch = transition.harmonic_q * comb.rep_rate - omega0;
  if (std::abs(mismatch) > comb.rep_rate / 2.0)
    throw ComputeError(
        "harmonic of the repetition rate misses the transition by more than "
        "half a tooth spacing");
  RamanResult res = raman_rabi_teeth(comb::enumerate_teeth(comb),
                                     transition.harmonic_q, levels,
                                     transition, pol);
  if (res.pair_count == 0)
    throw ComputeError("no comb tooth pairs span the transition");
  return res;
}

double eta_eff_ratio(const comb::CombModel& comb,
                     const atomic::LevelScheme& levels,
                     const TransitionSpec& transition,
                     const atomic::PolarizationState& pol) {
  return raman_rabi(comb, levels, transition, pol).eta_eff;
}

StarkResult ac_stark_shift(const comb::CombModel& comb,
                           const atomic::LevelScheme& levels,
                           const atomic::ZeemanState& state,
                           const atomic::PolarizationState& pol,
                           const StarkOptions& opts) {
  return ac_stark_shift_teeth(comb::enumerate_teeth(comb), levels, state, pol,
                              opts);
}

StarkResult ac_stark_shift_teeth(const std::vector<comb::Tooth>& teeth,
                                 const atomic::LevelScheme& levels,
                                 const atomic::ZeemanState& state,
                                 const atomic::PolarizationState& pol,
                                 const StarkOptions& opts) {
  const double guard =
      opts.resonance_guard > 0.0 ? opts.resonance_guard : k_default_guard;

  // Tooth-independent angular weights: summed |Omega|^2 at unit field per
  // upper manifold.
  struct Channel {
    std::string upper;
    double gap = 0.0;   // rad/s
    double weight = 0.0;  // sum over sublevels of |Omega(E=1)|^2
  };
  std::vector<Channel> channels;
  for (const auto& link : levels.links()) {
    if (link.lower != state.fine.label) continue;
    Channel ch;
    ch.upper = link.upper;
    ch.gap = levels.manifold(link.upper).energy - state.fine.energy;
    for (const auto& up : levels.zeeman_states(link.upper))
      ch.weight += std::norm(atomic::one_photon_rabi(1.0, link, state, up,
                                                     pol));
    if (ch.weight > 0.0) channels.push_back(ch);
  }

  StarkResult res;
  res.counter_rotating = opts.include_counter_rotating;
  double sum = 0.0;  // rad/s
  for (const auto& t : teeth) {
    const double e2 = t.field * t.field;
    for (const auto& ch : channels) {
      const double delta = t.omega - ch.gap;
      if (std::abs(delta) < guard)
        throw ComputeError("comb tooth within the resonance guard of " +
                           ch.upper);
      const double o2 = ch.weight * e2;
      sum += o2 / (4.0 * delta);
      if (opts.include_counter_rotating)
        sum += o2 / (4.0 * (t.omega + ch.gap));
    }
  }
  res.shift_hz = sum / two_pi;
  return res;
}

double differential_ac_stark(const comb::CombModel& comb,
                             const atomic::LevelScheme& levels,
                             const TransitionSpec& transition,
                             const atomic::PolarizationState& pol,
                             const StarkOptions& opts) {
  const auto teeth = comb::enumerate_teeth(comb);
  return ac_stark_shift_teeth(teeth, levels, transition.initial, pol, opts)
             .shift_hz -
         ac_stark_shift_teeth(teeth, levels, transition.final_, pol, opts)
             .shift_hz;
}

MagicPolarization find_magic_polarization(const comb::CombModel& comb,
                                          const atomic::LevelScheme& levels,
                                          const TransitionSpec& transition,
                                          const StarkOptions& opts) {
  const auto teeth = comb::enumerate_teeth(comb);
  auto shift = [&](double theta) {
    const auto pol = atomic::PolarizationState::linear(theta);
    return ac_stark_shift_teeth(teeth, levels, transition.initial, pol, opts)
               .shift_hz -
           ac_stark_shift_teeth(teeth, levels, transition.final_, pol, opts)
               .shift_hz;
  };

  constexpr int n_scan = 90;
  const double half_pi = pi / 2.0;
  MagicPolarization out;
  out.shift_at_zero = shift(0.0);
  out.shift_at_ninety = shift(half_pi);

  double a = 0.0;
  double fa = out.shift_at_zero;
  for (int k = 1; k <= n_scan; ++k) {
    const double b = half_pi * static_cast<double>(k) / n_scan;
    const double fb = (k == n_scan) ? out.shift_at_ninety : shift(b);
    if (fa == 0.0) {
      out.theta = a;
      return out;
    }
    if (fa * fb <= 0.0) {
      double lo = a, hi = b, flo = fa;
      for (int iter = 0; iter < 60 && hi - lo > 1e-4; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double fm = shift(mid);
        if (flo * fm <= 0.0) {
          hi = mid;
        } else {
          lo = mid;
          flo = fm;
        }
      }
      out.theta = 0.5 * (lo + hi);
      return out;
    }
    a = b;
    fa = fb;
  }
  return out;  // no sign change: theta stays empty
}

std::vector<BandwidthPoint> bandwidth_scan(
    const atomic::LevelScheme& levels, const TransitionSpec& transition,
    const std::vector<double>& bandwidth_ratios, double total_intensity,
    double mean_detuning, const atomic::PolarizationState& pol) {
  if (total_intensity <= 0.0) throw ConfigError("total intensity must be > 0");
  if (mean_detuning <= 0.0) throw ConfigError("mean detuning must be > 0");
  const int q = transition.harmonic_q;
  if (q < 1) throw ConfigError("harmonic order must be >= 1");

  const double omega0 =
      transition.initial.fine.energy - transition.final_.fine.energy;
  if (omega0 <= 0.0)
    throw ConfigError("initial state must lie above the final state");
  const double omega_rep = omega0 / q;

  // The detuning is referenced to the higher tooth of a pair, so pin the
  // higher-tooth centroid at gap + mean detuning.
  const auto inter = intermediate_manifolds(levels, transition);
  const double gap =
      levels.manifold(inter.front()).energy - transition.initial.fine.energy;
  const double omega_hi = gap + mean_detuning;

  auto make_tooth = [&](std::int64_t n, double intensity) {
    comb::Tooth t;
    t.index = n;
    t.omega = static_cast<double>(n) * omega_rep;
    t.intensity = intensity;
    t.field = std::sqrt(2.0 * intensity / (eps0 * c_light));
    return t;
  };

  // Two-tooth CW reference: half the intensity on each tooth of one pair,
  // higher tooth at the pinned detuning.
  const std::int64_t n_hi = std::llround(omega_hi / omega_rep);
  const std::vector<comb::Tooth> cw = {
      make_tooth(n_hi - q, total_intensity / 2.0),
      make_tooth(n_hi, total_intensity / 2.0)};
  const double omega_cw =
      raman_rabi_teeth(cw, q, levels, transition, pol).omega_r;
  if (omega_cw <= 0.0)
    throw ComputeError("vanishing CW reference Rabi frequency");

  std::vector<BandwidthPoint> out;
  out.reserve(bandwidth_ratios.size());
  for (const double r : bandwidth_ratios) {
    if (r <= 0.0) throw ConfigError("bandwidth ratio must be > 0");
    const double fwhm = r * omega0;
    // Envelope centered between the pinned pair's teeth.
    const double center = omega_hi - omega0 / 2.0;
    const double sig2 = fwhm * fwhm / (8.0 * std::log(2.0));
    const double half_support =
        fwhm * std::sqrt(std::log(1.0e6) / (4.0 * std::log(2.0)));
    const std::int64_t lo =
        static_cast<std::int64_t>(std::floor((center - half_support) / omega_rep));
    const std::int64_t hi =
        static_cast<std::int64_t>(std::ceil((center + half_support) / omega_rep));

    std::vector<comb::Tooth> teeth;
    double weight = 0.0;
    for (std::int64_t n = lo; n <= hi; ++n) {
      const double w = static_cast<double>(n) * omega_rep;
      const double x = w - center;
      const double g = std::exp(-0.5 * x * x / sig2);
      if (g < 1e-6) continue;
      teeth.push_back(make_tooth(n, g));
      weight += g;
    }
    for (auto& t : teeth) {
      t.intensity *= total_intensity / weight;
      t.field = std::sqrt(2.0 * t.intensity / (eps0 * c_light));
    }
    const double omega_fs =
        raman_rabi_teeth(teeth, q, levels, transition, pol).omega_r;
    out.push_back({r, omega_fs / omega_cw});
  }
  return out;
}

}  // namespace combraman::raman
