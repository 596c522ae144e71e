#include "core/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "core/errors.hpp"

namespace combraman::config {

namespace {

std::string strip(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

struct SectionSchema {
  bool repeatable = false;
  std::set<std::string> keys;
};

const std::map<std::string, SectionSchema>& schema() {
  static const std::map<std::string, SectionSchema> s = {
      {"general", {false, {"seed", "out_dir"}}},
      {"manifold",
       {true, {"label", "L", "S", "J", "energy_Hz", "g_factor", "pure_ls"}}},
      {"link", {true, {"upper", "lower", "A_per_s", "A_sigma_per_s"}}},
      {"comb",
       {false,
        {"rep_rate_Hz", "ceo_Hz", "envelope", "center_Hz", "fwhm_Hz",
         "phi0_rad", "tau_g_fs", "D2_fs2", "phase_ref_Hz",
         "residual_phase_csv", "avg_power_W", "waist_um", "truncation"}}},
      {"transition", {false, {"initial_mJ", "final_mJ", "harmonic_q"}}},
      {"polarization", {false, {"theta_deg"}}},
      {"field", {false, {"B_gauss", "B_sigma_gauss"}}},
      {"trap",
       {false,
        {"axial_freq_Hz", "radial_freq_Hz", "ion_mass_amu", "ion_charge_e",
         "theta_D32_em2", "theta_D52_em2", "angle_factor", "temperature_K",
         "temperature_sigma_K", "delta_alpha_au"}}},
      {"budget", {false, {"measured_Hz", "measured_sigma_Hz"}}},
      {"budget.entry",
       {true, {"name", "mode", "value_Hz", "sigma_Hz", "fraction", "model"}}},
      {"bandwidth_scan",
       {false, {"ratios", "intensity_W_m2", "mean_detuning_Hz"}}},
      {"dynamics",
       {false,
        {"model", "omega_Hz", "delta_Hz", "delta_nu_eff_Hz", "contrast",
         "tau_s", "t_max_s", "points", "shots", "quad_nodes"}}},
      {"lineshape", {false, {"omega_Hz", "pulse_s", "span_Hz", "points"}}},
      {"fit", {false, {"model", "input", "pulse_s", "quad_nodes"}}},
      {"extrapolate", {false, {"input"}}},
      {"phase_fit", {false, {"input", "ref_freq_Hz"}}},
      {"pipeline", {false, {"input", "pulse_s"}}},
  };
  return s;
}

}  // namespace

bool Section::has(const std::string& key) const {
  return std::any_of(entries.begin(), entries.end(),
                     [&](const auto& e) { return e.first == key; });
}

const std::string& Section::get(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return v;
  throw ConfigError("[" + name + "] missing required key '" + key + "'");
}

std::string Section::get_or(const std::string& key,
                            const std::string& dflt) const {
  return has(key) ? get(key) : dflt;
}

double Section::number(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("[" + name + "] " + key + ": not a number: '" + v + "'");
  }
}

double Section::number_or(const std::string& key, double dflt) const {
  return has(key) ? number(key) : dflt;
}

long long Section::integer(const std::string& key) const {
  const double x = number(key);
  if (std::abs(x - std::llround(x)) > 1e-9)
    throw ConfigError("[" + name + "] " + key + ": not an integer");
  return std::llround(x);
}

bool Section::flag_or(const std::string& key, bool dflt) const {
  if (!has(key)) return dflt;
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("[" + name + "] " + key + ": not a boolean: '" + v + "'");
}

ConfigFile ConfigFile::parse_string(const std::string& text,
                                    const std::string& origin) {
  ConfigFile cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  Section* current = nullptr;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string s = strip(line);
    if (s.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError(where + ": malformed section header");
      cfg.sections_.push_back({strip(s.substr(1, s.size() - 2)), {}});
      if (cfg.sections_.back().name.empty())
        throw ConfigError(where + ": empty section name");
      current = &cfg.sections_.back();
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected 'key = value'");
    if (!current) throw ConfigError(where + ": key outside any section");
    const std::string key = strip(s.substr(0, eq));
    const std::string value = strip(s.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (current->has(key))
      throw ConfigError(where + ": duplicate key '" + key + "' in [" +
                        current->name + "]");
    current->entries.emplace_back(key, value);
  }
  cfg.validate_schema();
  return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

void ConfigFile::validate_schema() const {
  std::set<std::string> seen;
  for (const auto& sec : sections_) {
    auto it = schema().find(sec.name);
    if (it == schema().end())
      throw ConfigError(origin_ + ": unknown section [" + sec.name + "]");
    if (!it->second.repeatable && !seen.insert(sec.name).second)
      throw ConfigError(origin_ + ": section [" + sec.name +
                        "] may not repeat");
    for (const auto& [k, v] : sec.entries)
      if (!it->second.keys.count(k))
        throw ConfigError(origin_ + ": unknown key '" + k + "' in [" +
                          sec.name + "]");
  }
}

const Section* ConfigFile::find(const std::string& name) const {
  const Section* found = nullptr;
  for (const auto& s : sections_)
    if (s.name == name) {
      if (found)
        throw ConfigError(origin_ + ": multiple [" + name + "] sections");
      found = &s;
    }
  return found;
}

const Section& ConfigFile::require(const std::string& name) const {
  const Section* s = find(name);
  if (!s) throw ConfigError(origin_ + ": missing section [" + name + "]");
  return *s;
}

std::vector<const Section*> ConfigFile::all(const std::string& name) const {
  std::vector<const Section*> out;
  for (const auto& s : sections_)
    if (s.name == name) out.push_back(&s);
  return out;
}

std::uint64_t ConfigFile::hash() const {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0x1f;
    h *= 1099511628211ull;
  };
  for (const auto& sec : sections_) {
    mix(sec.name);
    for (const auto& [k, v] : sec.entries) {
      mix(k);
      mix(v);
    }
  }
  return h;
}

}  // namespace combraman::config
