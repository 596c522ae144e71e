#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "core/config.hpp"
#include "core/errors.hpp"
#include "core/runner.hpp"

using namespace combraman;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p);
  out << content;
  REQUIRE(out.good());
}

fs::path temp_dir(const std::string& tag) {
  const fs::path dir =
      fs::temp_directory_path() / ("combraman_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const std::string fiber_cfg = std::string(CONFIG_DIR) + "/fiber_comb.cfg";

// Level scheme shared by synthetic configs.
const char* kLevelBlock = R"(
[manifold]
label = S1/2
L = 0
S = 0.5
J = 0.5
energy_Hz = 0
g_factor = 2.00231930436

[manifold]
label = D3/2
L = 2
S = 0.5
J = 1.5
energy_Hz = 409222401226702
g_factor = 0.8
pure_ls = true

[manifold]
label = D5/2
L = 2
S = 0.5
J = 2.5
energy_Hz = 411042000248236
g_factor = 1.2
pure_ls = true

[manifold]
label = P1/2
L = 1
S = 0.5
J = 0.5
energy_Hz = 755222766000000
g_factor = 0.666666666666667
pure_ls = true

[manifold]
label = P3/2
L = 1
S = 0.5
J = 1.5
energy_Hz = 761904475000000
g_factor = 1.333333333333333
pure_ls = true

[link]
upper = P3/2
lower = D5/2
A_per_s = 8.48e6

[link]
upper = P3/2
lower = D3/2
A_per_s = 0.955e6

[link]
upper = P1/2
lower = D3/2
A_per_s = 9.3e6

[link]
upper = P1/2
lower = S1/2
A_per_s = 1.32e8

[link]
upper = P3/2
lower = S1/2
A_per_s = 1.35e8
)";

json run_json(const runner::RunOptions& opts) {
  return json::parse(runner::run(opts));
}

}  // namespace

TEST_CASE("config parser accepts the documented grammar") {
  const auto cfg = config::ConfigFile::parse_string(
      "# comment\n[general]\nseed = 7   # trailing comment\n\n"
      "[dynamics]\nmodel = damped\nomega_Hz = 4121\ncontrast = 0.993\n"
      "tau_s = 3.2e-3\nt_max_s = 2e-3\npoints = 201\n",
      "inline");
  CHECK(cfg.require("general").integer("seed") == 7);
  CHECK(cfg.require("dynamics").get("model") == "damped");
  CHECK(cfg.require("dynamics").number("tau_s") ==
        doctest::Approx(3.2e-3).epsilon(1e-14));
  CHECK(cfg.find("lineshape") == nullptr);
  CHECK_THROWS_AS(cfg.require("lineshape"), ConfigError);
}

TEST_CASE("unknown sections and keys are hard errors") {
  CHECK_THROWS_AS(
      config::ConfigFile::parse_string("[mystery]\nx = 1\n", "inline"),
      ConfigError);
  CHECK_THROWS_AS(config::ConfigFile::parse_string(
                      "[general]\nseed = 1\nunknown_key = 2\n", "inline"),
                  ConfigError);
  CHECK_THROWS_AS(config::ConfigFile::parse_string(
                      "[general]\nseed = 1\nseed = 2\n", "inline"),
                  ConfigError);
  CHECK_THROWS_AS(config::ConfigFile::parse_string(
                      "[general]\nseed = 1\n[general]\nseed = 2\n", "inline"),
                  ConfigError);
  CHECK_THROWS_AS(config::ConfigFile::parse_string("seed = 1\n", "inline"),
                  ConfigError);
  CHECK_THROWS_AS(config::ConfigFile::parse_string("[general\nseed = 1\n",
                                                   "inline"),
                  ConfigError);
  CHECK_THROWS_AS(config::ConfigFile::parse_string("[general]\nseed\n",
                                                   "inline"),
                  ConfigError);
}

TEST_CASE("typed accessors validate their values") {
  const auto cfg = config::ConfigFile::parse_string(
      "[general]\nseed = 1.5\nout_dir = results\n", "inline");
  const auto& gen = cfg.require("general");
  CHECK_THROWS_AS(gen.integer("seed"), ConfigError);
  CHECK_THROWS_AS(gen.number("out_dir"), ConfigError);
  CHECK(gen.get_or("missing", "dflt") == "dflt");
  CHECK(gen.number_or("missing", 2.5) == 2.5);
}

TEST_CASE("config hash tracks content") {
  const std::string text = "[general]\nseed = 1\n";
  const auto a = config::ConfigFile::parse_string(text, "x");
  const auto b = config::ConfigFile::parse_string(text, "y");
  CHECK(a.hash() == b.hash());  // origin does not enter the hash
  const auto c =
      config::ConfigFile::parse_string("[general]\nseed = 2\n", "x");
  CHECK(a.hash() != c.hash());
}

TEST_CASE("bundled configs parse and enumerate repeated sections") {
  const auto cfg = config::ConfigFile::parse_file(fiber_cfg);
  CHECK(cfg.all("manifold").size() == 5);
  CHECK(cfg.all("link").size() == 5);
  CHECK(cfg.all("budget.entry").size() == 9);
  CHECK(cfg.require("transition").integer("harmonic_q") == 7278);
}

TEST_CASE("budget command totals match the bundled table") {
  const auto out = temp_dir("budget");
  runner::RunOptions opts;
  opts.command = "budget";
  opts.config_path = fiber_cfg;
  opts.out_dir = out.string();
  const json j = run_json(opts);

  CHECK(j["schema_version"] == 1);
  CHECK(j["command"] == "budget");
  CHECK(j["entries"].size() == 9);
  CHECK(j["total_shift_Hz"].get<double>() ==
        doctest::Approx(20.852).epsilon(1e-12));
  CHECK(j["total_sigma_Hz"].get<double>() ==
        doctest::Approx(9.0576).epsilon(1e-4));
  CHECK(j["measured_Hz"].get<double>() == 1819599021555.0);
  CHECK(j["corrected_Hz"].get<double>() ==
        doctest::Approx(1819599021534.1).epsilon(1e-12));

  CHECK(fs::exists(out / "budget.txt"));
  CHECK(fs::exists(out / "budget.json"));
  CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("the manifest lists every output file") {
  const auto out = temp_dir("manifest");
  runner::RunOptions opts;
  opts.command = "lineshape";
  opts.config_path = fiber_cfg;
  opts.out_dir = out.string();
  run_json(opts);

  const json manifest = json::parse(read_file(out / "manifest.json"));
  CHECK(manifest["command"] == "lineshape");
  CHECK(manifest["code_version"].is_string());
  CHECK(manifest["config_hash"].get<std::string>().size() == 16);
  CHECK(manifest["seed"] == 1);  // from [general]
  for (const auto& f : manifest["outputs"])
    CHECK(fs::exists(out / f.get<std::string>()));
  // nothing in the directory beyond the declared outputs + the manifest
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(out)) {
    (void)e;
    ++files;
  }
  CHECK(files == manifest["outputs"].size() + 1);
}

TEST_CASE("runs are deterministic for a fixed seed") {
  const std::string cfg_text = std::string("[dynamics]\n") +
                               "model = damped\nomega_Hz = 4121\n"
                               "contrast = 0.993\ntau_s = 3.2e-3\n"
                               "t_max_s = 2e-3\npoints = 51\nshots = 100\n";
  const auto dir = temp_dir("determinism");
  write_file(dir / "run.cfg", cfg_text);

  runner::RunOptions opts;
  opts.command = "dynamics";
  opts.config_path = (dir / "run.cfg").string();
  opts.seed = 99;

  opts.out_dir = (dir / "a").string();
  run_json(opts);
  opts.out_dir = (dir / "b").string();
  run_json(opts);
  CHECK(read_file(dir / "a" / "dynamics_trace.csv") ==
        read_file(dir / "b" / "dynamics_trace.csv"));
  CHECK(read_file(dir / "a" / "dynamics.json") ==
        read_file(dir / "b" / "dynamics.json"));

  opts.seed = 100;
  opts.out_dir = (dir / "c").string();
  run_json(opts);
  CHECK(read_file(dir / "a" / "dynamics_trace.csv") !=
        read_file(dir / "c" / "dynamics_trace.csv"));

  const json manifest = json::parse(read_file(dir / "c" / "manifest.json"));
  CHECK(manifest["seed"] == 100);
}

TEST_CASE("a two-tooth comb reports its CW equivalent") {
  // rep rate equal to the transition (q = 1) and an envelope narrow
  // enough that exactly one tooth pair survives the cutoff
  const std::string cfg_text =
      std::string(kLevelBlock) +
      "[comb]\n"
      "rep_rate_Hz = 1819599021534\n"
      "ceo_Hz = 0\n"
      "envelope = gaussian\n"
      "center_Hz = 379386395989839\n"
      "fwhm_Hz = 1.0918e12\n"
      "avg_power_W = 0.01\n"
      "waist_um = 34\n"
      "[transition]\n"
      "initial_mJ = 0.5\n"
      "final_mJ = 0.5\n"
      "harmonic_q = 1\n";
  const auto dir = temp_dir("two_tooth");
  write_file(dir / "run.cfg", cfg_text);

  runner::RunOptions opts;
  opts.command = "rabi";
  opts.config_path = (dir / "run.cfg").string();
  opts.out_dir = (dir / "out").string();
  const json j = run_json(opts);
  CHECK(j["pair_count"] == 1);
  REQUIRE(!j["cw_equivalent_rad_s"].is_null());
  CHECK(j["cw_equivalent_rad_s"].get<double>() ==
        j["omega_R_rad_s"].get<double>());
  CHECK(j["omega_R_rad_s"].get<double>() > 0.0);
}

TEST_CASE("zero average power yields a zero Rabi frequency") {
  std::string cfg_text = read_file(fiber_cfg);
  const auto pos = cfg_text.find("avg_power_W = 0.030");
  REQUIRE(pos != std::string::npos);
  cfg_text.replace(pos, 19, "avg_power_W = 0.000");
  const auto dir = temp_dir("zero_power");
  write_file(dir / "cfg" / "run.cfg", cfg_text);
  // the spectrum path in the config is relative to the config directory
  write_file(dir / "data" / "fiber_spectrum.csv",
             read_file(fs::path(DATA_DIR) / "fiber_spectrum.csv"));

  runner::RunOptions opts;
  opts.command = "rabi";
  opts.config_path = (dir / "cfg" / "run.cfg").string();
  opts.out_dir = (dir / "out").string();
  const json j = run_json(opts);
  CHECK(j["omega_R_rad_s"].get<double>() == 0.0);
  CHECK(j["pair_count"].get<int>() > 0);
}

TEST_CASE("phase-fit command recovers a synthetic quadratic phase") {
  const auto dir = temp_dir("phase_fit");
  std::ostringstream csv;
  csv.precision(17);
  csv << "freq_THz,phase_rad\n";
  const double f0 = 380.0;  // THz reference
  const double tau_g = 3.0e-15, d2 = 2600e-30, phi0 = 0.2;
  for (int i = 0; i <= 30; ++i) {
    const double f = 370.0 + (2.0 / 3.0) * i;  // 370..390 THz
    const double x = 2.0 * 3.14159265358979323846 * (f - f0) * 1e12;
    csv << f << "," << (phi0 + tau_g * x + 0.5 * d2 * x * x) << "\n";
  }
  write_file(dir / "phase.csv", csv.str());
  write_file(dir / "run.cfg",
             "[phase_fit]\ninput = phase.csv\nref_freq_Hz = 380e12\n");

  runner::RunOptions opts;
  opts.command = "phase-fit";
  opts.config_path = (dir / "run.cfg").string();
  opts.out_dir = (dir / "out").string();
  const json j = run_json(opts);
  CHECK(j["phi0_rad"].get<double>() == doctest::Approx(phi0).epsilon(1e-9));
  CHECK(j["tau_g_fs"].get<double>() == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(j["D2_fs2"].get<double>() == doctest::Approx(2600.0).epsilon(1e-9));
}

TEST_CASE("errors map to the documented categories") {
  runner::RunOptions opts;
  opts.command = "frobnicate";
  opts.config_path = fiber_cfg;
  opts.out_dir = temp_dir("errors").string();
  CHECK_THROWS_AS(runner::run(opts), ConfigError);

  opts.command = "rabi";
  opts.config_path = "/nonexistent/nothing.cfg";
  CHECK_THROWS_AS(runner::run(opts), ConfigError);

  // compute error: rep rate far from any harmonic of the transition
  const auto dir = temp_dir("compute_error");
  std::string cfg_text = read_file(fiber_cfg);
  const auto pos = cfg_text.find("rep_rate_Hz = 250013605.5969");
  REQUIRE(pos != std::string::npos);
  cfg_text.replace(pos, 28, "rep_rate_Hz = 250100000.0000");
  write_file(dir / "cfg" / "run.cfg", cfg_text);
  write_file(dir / "data" / "fiber_spectrum.csv",
             read_file(fs::path(DATA_DIR) / "fiber_spectrum.csv"));
  opts.config_path = (dir / "cfg" / "run.cfg").string();
  opts.out_dir = (dir / "out").string();
  CHECK_THROWS_AS(runner::run(opts), ComputeError);
}

TEST_CASE("theta override and scan") {
  const auto dir = temp_dir("theta");
  runner::RunOptions opts;
  opts.command = "rabi";
  opts.config_path = fiber_cfg;
  opts.out_dir = (dir / "out").string();
  opts.theta_deg = 30.0;
  const json j = run_json(opts);
  CHECK(j["theta_deg"].get<double>() == doctest::Approx(30.0).epsilon(1e-12));

  opts.theta_deg.reset();
  opts.theta_scan = "40:70:16";
  const json scan = run_json(opts);
  CHECK(fs::exists(dir / "out" / "rabi_theta_scan.csv"));
  REQUIRE(!scan["zero_crossing_deg"].is_null());
  const double zc = scan["zero_crossing_deg"].get<double>();
  CHECK(zc > 40.0);
  CHECK(zc < 70.0);
}
