#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "combraman/combraman.h"

int main(int argc, char** argv) {
  CLI::App app{"frequency-comb Raman spectroscopy toolkit"};
  app.set_version_flag("--version", std::string(cr_version()));
  app.require_subcommand(1);

  std::string config_path, out_dir, theta_scan;
  unsigned long long seed = 0;
  double theta_deg = 0.0;
  bool invert = false;
  bool has_seed = false, has_theta = false;

  const char* commands[] = {"rabi",      "stark",       "magic-pol",
                            "bandwidth-scan", "dynamics", "lineshape",
                            "fit",       "extrapolate", "budget",
                            "phase-fit", "pipeline"};
  for (const char* name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "configuration file")
        ->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "random seed override")
        ->each([&](const std::string&) { has_seed = true; });
    if (std::string(name) == "rabi")
      sub->add_option("--theta-scan", theta_scan,
                      "polarization scan start:stop:count (degrees)");
    if (std::string(name) == "rabi" || std::string(name) == "stark")
      sub->add_option("--theta", theta_deg,
                      "polarization angle override (degrees)")
          ->each([&](const std::string&) { has_theta = true; });
    if (std::string(name) == "dynamics")
      sub->add_flag("--invert", invert,
                    "report remaining population instead of transferred");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints the help or error text
    return code == 0 ? 0 : CR_ERR_CONFIG;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  char* err = nullptr;
  cr_session* session = cr_session_open(config_path.c_str(), &err);
  if (!session) {
    std::fprintf(stderr, "error: %s\n", err ? err : "cannot open session");
    cr_string_free(err);
    return CR_ERR_CONFIG;
  }

  cr_run_options opts{};
  opts.out_dir = out_dir.empty() ? nullptr : out_dir.c_str();
  opts.theta_scan = theta_scan.empty() ? nullptr : theta_scan.c_str();
  opts.theta_deg = theta_deg;
  opts.has_theta = has_theta ? 1 : 0;
  opts.seed = seed;
  opts.has_seed = has_seed ? 1 : 0;
  opts.invert = invert ? 1 : 0;

  char* result = nullptr;
  const cr_status status =
      cr_session_run(session, command.c_str(), &opts, &result, &err);
  if (status == CR_OK) {
    std::fputs(result ? result : "", stdout);
  } else {
    std::fprintf(stderr, "error: %s\n", err ? err : "unknown failure");
  }
  cr_string_free(result);
  cr_string_free(err);
  cr_session_close(session);
  return status;
}
