#include "core/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <map>
#include <sstream>

#include <json.hpp>

#include "core/atomic.hpp"
#include "core/comb.hpp"
#include "core/config.hpp"
#include "core/constants.hpp"
#include "core/csv.hpp"
#include "core/dynamics.hpp"
#include "core/errors.hpp"
#include "core/fitting.hpp"
#include "core/raman.hpp"
#include "core/systematics.hpp"
#include "core/version.hpp"

namespace combraman::runner {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace consts;

namespace {

std::string resolve(const std::string& config_path, const std::string& rel) {
  fs::path p(rel);
  if (p.is_absolute()) return rel;
  return (fs::path(config_path).parent_path() / p).string();
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

std::vector<double> linspace(double a, double b, long long n) {
  if (n < 2) throw ConfigError("grids need at least 2 points");
  std::vector<double> out(n);
  for (long long i = 0; i < n; ++i)
    out[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
  return out;
}

atomic::LevelScheme build_levels(const config::ConfigFile& cfg) {
  atomic::LevelSchemeConfig lsc;
  for (const auto* sec : cfg.all("manifold")) {
    atomic::ManifoldConfig m;
    m.label = sec->get("label");
    m.L = static_cast<int>(sec->integer("L"));
    m.S = sec->number("S");
    m.J = sec->number("J");
    m.energy_hz = sec->number("energy_Hz");
    m.g_factor = sec->number("g_factor");
    m.pure_ls = sec->flag_or("pure_ls", false);
    lsc.manifolds.push_back(std::move(m));
  }
  for (const auto* sec : cfg.all("link")) {
    atomic::LinkConfig l;
    l.upper = sec->get("upper");
    l.lower = sec->get("lower");
    l.a_per_s = sec->number("A_per_s");
    l.a_sigma_per_s = sec->number_or("A_sigma_per_s", 0.0);
    lsc.links.push_back(std::move(l));
  }
  return atomic::build_level_scheme(lsc);
}

comb::CombModel build_comb(const config::ConfigFile& cfg) {
  const auto& sec = cfg.require("comb");
  comb::CombModel model;
  model.rep_rate = two_pi * sec.number("rep_rate_Hz");
  model.ceo = two_pi * sec.number_or("ceo_Hz", 0.0);
  const std::string env = sec.get("envelope");
  if (env == "gaussian") {
    model.envelope = comb::SpectralEnvelope::gaussian(
        two_pi * sec.number("center_Hz"), two_pi * sec.number("fwhm_Hz"));
  } else {
    if (sec.has("center_Hz") || sec.has("fwhm_Hz"))
      throw ConfigError(
          "[comb] center_Hz/fwhm_Hz only apply to the gaussian envelope");
    model.envelope = comb::load_spectrum(resolve(cfg.origin(), env));
  }
  model.phase.phi0 = sec.number_or("phi0_rad", 0.0);
  model.phase.tau_g = sec.number_or("tau_g_fs", 0.0) * 1e-15;
  model.phase.d2 = sec.number_or("D2_fs2", 0.0) * 1e-30;
  if (sec.has("phase_ref_Hz")) {
    model.phase.omega_c = two_pi * sec.number("phase_ref_Hz");
  } else if (model.envelope.kind == comb::SpectralEnvelope::Kind::gaussian) {
    model.phase.omega_c = model.envelope.center;
  } else {
    const auto [lo, hi] = model.envelope.support(1.0);
    model.phase.omega_c = (lo + hi) / 2.0;
  }
  if (sec.has("residual_phase_csv")) {
    const auto table = csv::read_table(
        resolve(cfg.origin(), sec.get("residual_phase_csv")));
    const auto f = table.col("freq_THz");
    const auto ph = table.col("phase_rad");
    for (std::size_t i = 0; i < f.size(); ++i)
      model.phase.residual.emplace_back(two_pi * f[i] * 1e12, ph[i]);
    std::sort(model.phase.residual.begin(), model.phase.residual.end());
  }
  model.avg_power = sec.number("avg_power_W");
  model.beam_waist = sec.number("waist_um") * 1e-6;
  model.truncation = sec.number_or("truncation", 1e-6);
  model.validate();
  return model;
}

raman::TransitionSpec build_transition(const config::ConfigFile& cfg,
                                       const atomic::LevelScheme& levels) {
  const auto& sec = cfg.require("transition");
  raman::TransitionSpec tr;
  tr.initial = levels.zeeman("D5/2", sec.number("initial_mJ"));
  tr.final_ = levels.zeeman("D3/2", sec.number("final_mJ"));
  tr.harmonic_q = static_cast<int>(sec.integer("harmonic_q"));
  if (tr.harmonic_q < 1) throw ConfigError("[transition] harmonic_q must be >= 1");
  if (std::abs(tr.initial.mJ - tr.final_.mJ) > 2.0 + 1e-9)
    throw ConfigError("[transition] |initial_mJ - final_mJ| must be <= 2");
  return tr;
}

atomic::PolarizationState build_pol(const config::ConfigFile& cfg,
                                    std::optional<double> theta_deg) {
  double deg = 0.0;
  if (const auto* sec = cfg.find("polarization"))
    deg = sec->number_or("theta_deg", 0.0);
  if (theta_deg) deg = *theta_deg;
  return atomic::PolarizationState::linear(deg * pi / 180.0);
}

atomic::MagneticField build_field(const config::ConfigFile& cfg) {
  const auto& sec = cfg.require("field");
  atomic::MagneticField b;
  b.tesla = sec.number("B_gauss") * 1e-4;
  b.sigma = sec.number_or("B_sigma_gauss", 0.0) * 1e-4;
  return b;
}

systematics::TrapConfig build_trap(const config::ConfigFile& cfg) {
  const auto& sec = cfg.require("trap");
  systematics::TrapConfig t;
  t.axial_freq_hz = sec.number("axial_freq_Hz");
  t.radial_freq_hz = sec.number_or("radial_freq_Hz", 0.0);
  t.ion_mass_kg = sec.number("ion_mass_amu") * atomic_mass;
  t.ion_charge_c = sec.number_or("ion_charge_e", 1.0) * e_charge;
  t.theta_d32_em2 = sec.number_or("theta_D32_em2", 0.0);
  t.theta_d52_em2 = sec.number_or("theta_D52_em2", 0.0);
  t.quad_angle_factor = sec.number_or("angle_factor", 0.0);
  t.temperature_k = sec.number_or("temperature_K", 300.0);
  t.temperature_sigma_k = sec.number_or("temperature_sigma_K", 0.0);
  t.diff_polarizability_au = sec.number_or("delta_alpha_au", 0.0);
  return t;
}

fitting::DataSeries read_xy_series(const std::string& path) {
  const auto table = csv::read_table(path);
  fitting::DataSeries s;
  s.x = table.col("x");
  s.y = table.col("y");
  if (table.has_column("sigma")) s.sigma = table.col("sigma");
  return s;
}

json json_fit(const fitting::FitResult& fit) {
  json j;
  j["names"] = fit.names;
  j["estimates"] = fit.estimates;
  std::vector<double> errors;
  for (std::size_t i = 0; i < fit.estimates.size(); ++i)
    errors.push_back(fit.error(i));
  j["errors"] = errors;
  j["covariance"] = fit.covariance;
  j["chisq"] = fit.chisq;
  j["dof"] = fit.dof;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  return j;
}

json json_raman(const raman::RamanResult& r) {
  json j;
  j["omega_R_rad_s"] = r.omega_r;
  j["omega_R_Hz"] = r.omega_r / two_pi;
  j["complex_sum"] = {r.complex_sum.real(), r.complex_sum.imag()};
  j["eta"] = r.eta;
  j["eta_eff"] = r.eta_eff;
  j["pair_count"] = r.pair_count;
  json pl = json::object();
  for (const auto& [name, v] : r.per_level) pl[name] = {v.real(), v.imag()};
  j["per_level"] = pl;
  if (r.cw_equivalent)
    j["cw_equivalent_rad_s"] = *r.cw_equivalent;
  else
    j["cw_equivalent_rad_s"] = nullptr;
  return j;
}

struct OutputSink {
  std::string dir;
  std::vector<std::string> files;

  void write(const std::string& name, const std::string& content) {
    fs::create_directories(dir);
    csv::write_text_atomic((fs::path(dir) / name).string(), content);
    files.push_back(name);
  }
};

// ---- budget assembly ------------------------------------------------------

systematics::ShiftBudget resolve_budget(const config::ConfigFile& cfg) {
  const auto sections = cfg.all("budget.entry");
  if (sections.empty()) return {};
  systematics::ShiftBudget budget;
  for (const auto* sec : sections) {
    const std::string name = sec->get("name");
    const std::string mode = sec->get_or("mode", "declared");
    if (mode == "declared") {
      budget.add({name, sec->number("value_Hz"),
                  sec->number_or("sigma_Hz", 0.0)});
    } else if (mode == "fractional") {
      const auto levels = build_levels(cfg);
      const double nu0 = levels.fine_gap_hz("D5/2", "D3/2");
      budget.add({name, sec->number("fraction") * nu0,
                  sec->number_or("sigma_Hz", 0.0)});
    } else if (mode == "computed") {
      const std::string model = sec->get("model");
      const auto levels = build_levels(cfg);
      if (model == "zeeman2") {
        const auto tr = build_transition(cfg, levels);
        const auto z = systematics::second_order_zeeman(
            levels, build_field(cfg), tr.initial.mJ, tr.final_.mJ);
        budget.add({name, z.shift_hz,
                    std::max(z.sigma_hz, sec->number_or("sigma_Hz", 0.0))});
      } else if (model == "quadrupole") {
        const auto tr = build_transition(cfg, levels);
        const double q = systematics::quadrupole_shift_differential(
            tr.initial, tr.final_, build_trap(cfg));
        budget.add({name, q, sec->number_or("sigma_Hz", 0.0)});
      } else if (model == "bbr") {
        const auto trap = build_trap(cfg);
        budget.add({name, systematics::bbr_shift(trap),
                    std::max(systematics::bbr_shift_sigma(trap),
                             sec->number_or("sigma_Hz", 0.0))});
      } else {
        throw ConfigError("unknown computed budget model: " + model);
      }
    } else {
      throw ConfigError("unknown budget entry mode: " + mode);
    }
  }
  return budget;
}

json json_budget(const systematics::ShiftBudget& budget) {
  json j;
  json entries = json::array();
  for (const auto& e : budget.entries)
    entries.push_back(
        {{"name", e.name}, {"shift_Hz", e.shift_hz}, {"sigma_Hz", e.sigma_hz}});
  j["entries"] = entries;
  j["total_shift_Hz"] = budget.total_hz;
  j["total_sigma_Hz"] = budget.sigma_hz;
  return j;
}

std::string budget_table(const systematics::ShiftBudget& budget) {
  std::ostringstream out;
  std::size_t width = 6;
  for (const auto& e : budget.entries) width = std::max(width, e.name.size());
  char line[256];
  std::snprintf(line, sizeof line, "%-*s  %12s  %12s\n",
                static_cast<int>(width), "Effect", "Shift (Hz)", "Sigma (Hz)");
  out << line;
  for (const auto& e : budget.entries) {
    std::snprintf(line, sizeof line, "%-*s  %12.3f  %12.3f\n",
                  static_cast<int>(width), e.name.c_str(), e.shift_hz,
                  e.sigma_hz);
    out << line;
  }
  std::snprintf(line, sizeof line, "%-*s  %12.3f  %12.3f\n",
                static_cast<int>(width), "Total", budget.total_hz,
                budget.sigma_hz);
  out << line;
  return out.str();
}

// ---- per-command implementations ------------------------------------------

json cmd_rabi(const config::ConfigFile& cfg, const RunOptions& opts,
              OutputSink& sink) {
  const auto levels = build_levels(cfg);
  const auto comb_model = build_comb(cfg);
  const auto tr = build_transition(cfg, levels);
  const auto pol = build_pol(cfg, opts.theta_deg);
  const auto result = raman::raman_rabi(comb_model, levels, tr, pol);

  json j = json_raman(result);
  j["theta_deg"] = pol.theta * 180.0 / pi;

  if (!opts.theta_scan.empty()) {
    double a = 0.0, b = 0.0;
    long long n = 0;
    if (std::sscanf(opts.theta_scan.c_str(), "%lf:%lf:%lld", &a, &b, &n) != 3 ||
        n < 2)
      throw ConfigError("theta scan must be 'start:stop:count' in degrees");
    const auto teeth = comb::enumerate_teeth(comb_model);
    auto signed_sum = [&](double deg) {
      const auto p = atomic::PolarizationState::linear(deg * pi / 180.0);
      return raman::raman_rabi_teeth(teeth, tr.harmonic_q, levels, tr, p)
          .complex_sum.real();
    };
    csv::Table scan;
    scan.header = {"theta_deg", "omega_R_rad_s", "signed_sum_rad_s"};
    std::optional<double> crossing;
    double prev_deg = a, prev_val = signed_sum(a);
    for (const double deg : linspace(a, b, n)) {
      const double val = (deg == a) ? prev_val : signed_sum(deg);
      scan.rows.push_back({deg, std::abs(val), val});
      if (!crossing && deg != prev_deg && prev_val * val < 0.0) {
        double lo = prev_deg, hi = deg, flo = prev_val;
        for (int it = 0; it < 60 && hi - lo > 1e-6; ++it) {
          const double mid = (lo + hi) / 2.0, fm = signed_sum(mid);
          if (flo * fm <= 0.0) {
            hi = mid;
          } else {
            lo = mid;
            flo = fm;
          }
        }
        crossing = (lo + hi) / 2.0;
      }
      prev_deg = deg;
      prev_val = val;
    }
    sink.write("rabi_theta_scan.csv", csv::format_table(scan));
    if (crossing)
      j["zero_crossing_deg"] = *crossing;
    else
      j["zero_crossing_deg"] = nullptr;
  }
  return j;
}

json cmd_stark(const config::ConfigFile& cfg, const RunOptions& opts) {
  const auto levels = build_levels(cfg);
  const auto comb_model = build_comb(cfg);
  const auto tr = build_transition(cfg, levels);
  const auto pol = build_pol(cfg, opts.theta_deg);
  const auto teeth = comb::enumerate_teeth(comb_model);
  const auto s_i = raman::ac_stark_shift_teeth(teeth, levels, tr.initial, pol);
  const auto s_f = raman::ac_stark_shift_teeth(teeth, levels, tr.final_, pol);
  json j;
  j["theta_deg"] = pol.theta * 180.0 / pi;
  j["shift_initial_Hz"] = s_i.shift_hz;
  j["shift_final_Hz"] = s_f.shift_hz;
  j["differential_Hz"] = s_i.shift_hz - s_f.shift_hz;
  j["counter_rotating"] = s_i.counter_rotating;
  return j;
}

json cmd_magic_pol(const config::ConfigFile& cfg) {
  const auto levels = build_levels(cfg);
  const auto comb_model = build_comb(cfg);
  const auto tr = build_transition(cfg, levels);
  const auto m = raman::find_magic_polarization(comb_model, levels, tr);
  json j;
  if (m.theta) {
    j["theta_rad"] = *m.theta;
    j["theta_deg"] = *m.theta * 180.0 / pi;
  } else {
    j["theta_rad"] = nullptr;
    j["theta_deg"] = nullptr;
  }
  j["shift_at_0deg_Hz"] = m.shift_at_zero;
  j["shift_at_90deg_Hz"] = m.shift_at_ninety;
  return j;
}

json cmd_bandwidth_scan(const config::ConfigFile& cfg, OutputSink& sink) {
  const auto levels = build_levels(cfg);
  const auto tr = build_transition(cfg, levels);
  const auto& sec = cfg.require("bandwidth_scan");
  std::vector<double> ratios;
  {
    std::istringstream ss(sec.get("ratios"));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        ratios.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ConfigError("[bandwidth_scan] ratios: not a number: " + tok);
      }
    }
  }
  const auto points = raman::bandwidth_scan(
      levels, tr, ratios, sec.number("intensity_W_m2"),
      two_pi * sec.number("mean_detuning_Hz"),
      atomic::PolarizationState::linear(0.0));
  csv::Table t;
  t.header = {"bandwidth_ratio", "rabi_ratio"};
  json arr = json::array();
  for (const auto& p : points) {
    t.rows.push_back({p.ratio, p.rabi_ratio});
    arr.push_back({{"bandwidth_ratio", p.ratio}, {"rabi_ratio", p.rabi_ratio}});
  }
  sink.write("bandwidth_scan.csv", csv::format_table(t));
  json j;
  j["points"] = arr;
  return j;
}

double omega_from_config(const config::ConfigFile& cfg,
                         const config::Section& sec, const RunOptions& opts) {
  if (sec.has("omega_Hz")) return two_pi * sec.number("omega_Hz");
  // Fall back to the coherent comb sum.
  const auto levels = build_levels(cfg);
  const auto tr = build_transition(cfg, levels);
  return raman::raman_rabi(build_comb(cfg), levels, tr,
                           build_pol(cfg, opts.theta_deg))
      .omega_r;
}

json cmd_dynamics(const config::ConfigFile& cfg, const RunOptions& opts,
                  std::uint64_t seed, OutputSink& sink) {
  const auto& sec = cfg.require("dynamics");
  const std::string model = sec.get_or("model", "rabi");
  const auto times = linspace(0.0, sec.number("t_max_s"),
                              sec.integer("points"));
  dynamics::RabiTrace trace;
  json j;
  j["model"] = model;
  if (model == "rabi") {
    const double omega = omega_from_config(cfg, sec, opts);
    trace = dynamics::rabi_trace(omega, two_pi * sec.number_or("delta_Hz", 0.0),
                                 times);
    j["omega_rad_s"] = omega;
  } else if (model == "averaged") {
    const double omega = omega_from_config(cfg, sec, opts);
    dynamics::QuadratureSpec quad;
    quad.nodes = static_cast<int>(sec.number_or("quad_nodes", 64));
    trace = dynamics::averaged_trace(
        omega,
        dynamics::DetuningDistribution::gaussian_fwhm_hz(
            sec.number_or("delta_Hz", 0.0), sec.number("delta_nu_eff_Hz")),
        times, quad);
    j["omega_rad_s"] = omega;
  } else if (model == "damped") {
    const double omega = omega_from_config(cfg, sec, opts);
    trace = dynamics::damped_rabi_trace(sec.number("contrast"),
                                        sec.number("tau_s"), omega, times);
    j["omega_rad_s"] = omega;
  } else {
    throw ConfigError("[dynamics] unknown model: " + model);
  }

  if (opts.invert)
    for (auto& p : trace.p) p = 1.0 - p;

  csv::Table t;
  if (sec.has("shots")) {
    const int shots = static_cast<int>(sec.integer("shots"));
    const auto counts = dynamics::sample_counts(trace.p, shots, seed);
    t.header = {"t_s", "p", "counts", "shots"};
    for (std::size_t i = 0; i < trace.t.size(); ++i)
      t.rows.push_back({trace.t[i], trace.p[i],
                        static_cast<double>(counts[i]),
                        static_cast<double>(shots)});
  } else {
    t.header = {"t_s", "p"};
    for (std::size_t i = 0; i < trace.t.size(); ++i)
      t.rows.push_back({trace.t[i], trace.p[i]});
  }
  sink.write("dynamics_trace.csv", csv::format_table(t));
  j["points"] = trace.t.size();
  j["inverted"] = opts.invert;
  return j;
}

json cmd_lineshape(const config::ConfigFile& cfg, const RunOptions& opts,
                   OutputSink& sink) {
  const auto& sec = cfg.require("lineshape");
  const double omega = omega_from_config(cfg, sec, opts);
  const double pulse = sec.number("pulse_s");
  const auto deltas_hz = linspace(-sec.number("span_Hz") / 2.0,
                                  sec.number("span_Hz") / 2.0,
                                  sec.integer("points"));
  csv::Table t;
  t.header = {"delta_Hz", "p"};
  for (const double d : deltas_hz)
    t.rows.push_back(
        {d, dynamics::sinc2_probability(omega, two_pi * d, pulse)});
  sink.write("lineshape.csv", csv::format_table(t));
  json j;
  j["omega_rad_s"] = omega;
  j["pulse_s"] = pulse;
  j["points"] = deltas_hz.size();
  return j;
}

json cmd_fit(const config::ConfigFile& cfg, const RunOptions& opts) {
  const auto& sec = cfg.require("fit");
  const std::string model = sec.get("model");
  const auto series = read_xy_series(resolve(cfg.origin(), sec.get("input")));
  fitting::FitResult fit;
  if (model == "sinc2") {
    fit = fitting::fit_sinc2(series, sec.number("pulse_s"));
  } else if (model == "damped") {
    fit = fitting::fit_damped_rabi(series);
  } else if (model == "averaged") {
    const auto levels = build_levels(cfg);
    const auto tr = build_transition(cfg, levels);
    comb::CombModel comb_model = build_comb(cfg);
    comb_model.phase.d2 = 0.0;  // flat-phase reference sum
    comb_model.phase.residual.clear();
    const double omega_flat =
        raman::raman_rabi(comb_model, levels, tr, build_pol(cfg, opts.theta_deg))
            .omega_r;
    dynamics::QuadratureSpec quad;
    quad.nodes = static_cast<int>(sec.number_or("quad_nodes", 64));
    fit = fitting::fit_averaged_rabi(series, omega_flat, quad);
  } else {
    throw ConfigError("[fit] unknown model: " + model);
  }
  json j;
  j["model"] = model;
  j["fit"] = json_fit(fit);
  return j;
}

json cmd_extrapolate(const config::ConfigFile& cfg) {
  const auto& sec = cfg.require("extrapolate");
  const auto series = read_xy_series(resolve(cfg.origin(), sec.get("input")));
  const auto r = fitting::extrapolate_zero_intensity(series);
  json j;
  j["intercept_Hz"] = r.intercept.value;
  j["intercept_sigma_Hz"] = r.intercept.sigma;
  j["slope"] = r.slope.value;
  j["slope_sigma"] = r.slope.sigma;
  return j;
}

json cmd_budget(const config::ConfigFile& cfg, OutputSink& sink) {
  const auto budget = resolve_budget(cfg);
  const auto& sec = cfg.require("budget");
  const double measured = sec.number("measured_Hz");
  const double measured_sigma = sec.number_or("measured_sigma_Hz", 0.0);
  json j = json_budget(budget);
  j["measured_Hz"] = measured;
  j["measured_sigma_Hz"] = measured_sigma;
  j["corrected_Hz"] = measured - budget.total_hz;
  j["statistical_sigma_Hz"] = measured_sigma;
  j["systematic_sigma_Hz"] = budget.sigma_hz;
  sink.write("budget.txt", budget_table(budget));
  return j;
}

json cmd_phase_fit(const config::ConfigFile& cfg) {
  const auto& sec = cfg.require("phase_fit");
  const auto table = csv::read_table(resolve(cfg.origin(), sec.get("input")));
  const auto f = table.col("freq_THz");
  const auto ph = table.col("phase_rad");
  std::vector<comb::PhaseSample> samples(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    samples[i].omega = two_pi * f[i] * 1e12;
    samples[i].phase = ph[i];
  }
  if (table.has_column("weight")) {
    const auto w = table.col("weight");
    for (std::size_t i = 0; i < w.size(); ++i) samples[i].weight = w[i];
  }
  const auto fit =
      comb::fit_spectral_phase(samples, two_pi * sec.number("ref_freq_Hz"));
  json j;
  j["phi0_rad"] = fit.phase.phi0;
  j["tau_g_s"] = fit.phase.tau_g;
  j["tau_g_fs"] = fit.phase.tau_g * 1e15;
  j["D2_s2"] = fit.phase.d2;
  j["D2_fs2"] = fit.phase.d2 * 1e30;
  json cov = json::array();
  for (int r = 0; r < 3; ++r)
    cov.push_back({fit.covariance[r][0], fit.covariance[r][1],
                   fit.covariance[r][2]});
  j["covariance"] = cov;
  j["chisq"] = fit.chisq;
  j["dof"] = fit.dof;
  return j;
}

json cmd_pipeline(const config::ConfigFile& cfg) {
  const auto& sec = cfg.require("pipeline");
  const double pulse = sec.number("pulse_s");
  const auto table =
      csv::read_table(resolve(cfg.origin(), sec.get("input")));
  const auto session = table.col("session");
  const auto xs = table.col("x");
  const auto sign = table.col("sign");
  const auto delta = table.col("delta_Hz");
  const auto p = table.col("p");
  const bool has_counts = table.has_column("counts");
  std::vector<double> counts, shots;
  if (has_counts) {
    counts = table.col("counts");
    shots = table.col("shots");
  }

  const auto levels = build_levels(cfg);
  const double nu_ref = levels.fine_gap_hz("D5/2", "D3/2");

  // Group rows into one lineshape scan per (session, intensity tag, sign).
  std::map<std::tuple<long long, double, int>, fitting::DataSeries> groups;
  for (std::size_t i = 0; i < session.size(); ++i) {
    const int sg = static_cast<int>(std::lround(sign[i]));
    if (sg != 1 && sg != -1)
      throw ConfigError("pipeline sign column must be +1 or -1");
    auto& series =
        groups[{static_cast<long long>(std::lround(session[i])), xs[i], sg}];
    series.x.push_back(delta[i]);
    series.y.push_back(p[i]);
    if (has_counts)
      series.sigma.push_back(fitting::binomial_sigma(
          static_cast<int>(std::lround(counts[i])),
          static_cast<int>(std::lround(shots[i]))));
  }

  json fits = json::array();
  std::map<std::pair<long long, double>,
           std::map<int, fitting::ValueWithError>> centers;
  for (const auto& [key, series] : groups) {
    const auto [sess, x, sg] = key;
    const auto fit = fitting::fit_sinc2(series, pulse);
    if (!fit.converged)
      throw ComputeError("lineshape fit failed to converge (session " +
                         std::to_string(sess) + ")");
    centers[{sess, x}][sg] = {fit.estimates[0], fit.error(0)};
    fits.push_back({{"session", sess},
                    {"x", x},
                    {"sign", sg},
                    {"center_Hz", fit.estimates[0]},
                    {"center_sigma_Hz", fit.error(0)},
                    {"omega_rad_s", std::abs(fit.estimates[1])},
                    {"chisq", fit.chisq},
                    {"dof", fit.dof}});
  }

  json pairs = json::array();
  std::map<long long, fitting::DataSeries> per_session;
  for (const auto& [key, by_sign] : centers) {
    const auto [sess, x] = key;
    if (!by_sign.count(1) || !by_sign.count(-1))
      throw ConfigError("pipeline group session " + std::to_string(sess) +
                        ", x " + std::to_string(x) +
                        " is missing its Zeeman partner");
    const auto avg = fitting::pair_average(by_sign.at(1), by_sign.at(-1));
    pairs.push_back({{"session", sess},
                     {"x", x},
                     {"center_Hz", avg.value},
                     {"sigma_Hz", avg.sigma}});
    auto& series = per_session[sess];
    series.x.push_back(x);
    series.y.push_back(avg.value);
    series.sigma.push_back(avg.sigma);
  }

  json sessions = json::array();
  std::vector<fitting::ValueWithError> intercepts;
  for (const auto& [sess, series] : per_session) {
    const auto r = fitting::extrapolate_zero_intensity(series);
    intercepts.push_back(r.intercept);
    sessions.push_back({{"session", sess},
                        {"intercept_Hz", r.intercept.value},
                        {"intercept_sigma_Hz", r.intercept.sigma},
                        {"slope", r.slope.value},
                        {"slope_sigma", r.slope.sigma}});
  }

  const auto mean = fitting::weighted_mean(intercepts);
  const auto budget = resolve_budget(cfg);
  const double measured = nu_ref + mean.value;
  const double corrected = measured - budget.total_hz;

  json j;
  j["reference_Hz"] = nu_ref;
  j["fits"] = fits;
  j["pairs"] = pairs;
  j["sessions"] = sessions;
  j["weighted_mean"] = {{"offset_Hz", mean.value},
                        {"sigma_Hz", mean.sigma},
                        {"scatter_sigma_Hz", mean.scatter_sigma},
                        {"quoted_sigma_Hz", mean.quoted_sigma},
                        {"chisq", mean.chisq},
                        {"dof", mean.dof}};
  j["budget"] = json_budget(budget);
  j["measured_Hz"] = measured;
  j["corrected_Hz"] = corrected;
  j["statistical_sigma_Hz"] = mean.quoted_sigma;
  j["systematic_sigma_Hz"] = budget.sigma_hz;
  j["combined_sigma_Hz"] = std::hypot(mean.quoted_sigma, budget.sigma_hz);
  return j;
}

}  // namespace

std::string command_list() {
  return "rabi, stark, magic-pol, bandwidth-scan, dynamics, lineshape, fit, "
         "extrapolate, budget, phase-fit, pipeline";
}

std::string run(const RunOptions& opts) {
  const std::string started = iso_now();
  const auto cfg = config::ConfigFile::parse_file(opts.config_path);

  std::uint64_t seed = 0;
  std::string out_dir = "out";
  if (const auto* gen = cfg.find("general")) {
    seed = static_cast<std::uint64_t>(gen->number_or("seed", 0.0));
    out_dir = gen->get_or("out_dir", out_dir);
  }
  if (opts.seed) seed = *opts.seed;
  if (!opts.out_dir.empty()) out_dir = opts.out_dir;

  OutputSink sink{out_dir, {}};
  json result;
  if (opts.command == "rabi")
    result = cmd_rabi(cfg, opts, sink);
  else if (opts.command == "stark")
    result = cmd_stark(cfg, opts);
  else if (opts.command == "magic-pol")
    result = cmd_magic_pol(cfg);
  else if (opts.command == "bandwidth-scan")
    result = cmd_bandwidth_scan(cfg, sink);
  else if (opts.command == "dynamics")
    result = cmd_dynamics(cfg, opts, seed, sink);
  else if (opts.command == "lineshape")
    result = cmd_lineshape(cfg, opts, sink);
  else if (opts.command == "fit")
    result = cmd_fit(cfg, opts);
  else if (opts.command == "extrapolate")
    result = cmd_extrapolate(cfg);
  else if (opts.command == "budget")
    result = cmd_budget(cfg, sink);
  else if (opts.command == "phase-fit")
    result = cmd_phase_fit(cfg);
  else if (opts.command == "pipeline")
    result = cmd_pipeline(cfg);
  else
    throw ConfigError("unknown command '" + opts.command +
                      "' (expected one of: " + command_list() + ")");

  json payload;
  payload["schema_version"] = k_schema_version;
  payload["command"] = opts.command;
  payload.update(result);
  const std::string text = payload.dump(2) + "\n";

  const std::string result_name = opts.command + ".json";
  sink.write(result_name, text);

  json manifest;
  manifest["command"] = opts.command;
  manifest["config_hash"] = hex64(cfg.hash());
  manifest["code_version"] = k_version;
  manifest["seed"] = seed;
  manifest["started_at"] = started;
  manifest["finished_at"] = iso_now();
  manifest["outputs"] = sink.files;
  csv::write_text_atomic((fs::path(out_dir) / "manifest.json").string(),
                         manifest.dump(2) + "\n");
  return text;
}

}  // namespace combraman::runner
