#include "combraman/combraman.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>

#include "core/errors.hpp"
#include "core/runner.hpp"
#include "core/version.hpp"

namespace {

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_err(char** err, const std::string& msg) {
  if (err) *err = dup_string(msg);
}

}  // namespace

struct cr_session {
  std::string config_path;
};

cr_session* cr_session_open(const char* config_path, char** err) {
  if (err) *err = nullptr;
  if (!config_path) {
    set_err(err, "config path is null");
    return nullptr;
  }
  if (!std::filesystem::exists(config_path)) {
    set_err(err, std::string("config file not found: ") + config_path);
    return nullptr;
  }
  return new cr_session{config_path};
}

void cr_session_close(cr_session* session) { delete session; }

cr_status cr_session_run(cr_session* session, const char* command,
                         const cr_run_options* options, char** result_json,
                         char** err) {
  if (result_json) *result_json = nullptr;
  if (err) *err = nullptr;
  if (!session || !command) {
    set_err(err, "null session or command");
    return CR_ERR_CONFIG;
  }
  combraman::runner::RunOptions opts;
  opts.command = command;
  opts.config_path = session->config_path;
  if (options) {
    if (options->out_dir) opts.out_dir = options->out_dir;
    if (options->theta_scan) opts.theta_scan = options->theta_scan;
    if (options->has_theta) opts.theta_deg = options->theta_deg;
    if (options->has_seed) opts.seed = options->seed;
    opts.invert = options->invert != 0;
  }
  try {
    const std::string json = combraman::runner::run(opts);
    if (result_json) *result_json = dup_string(json);
    return CR_OK;
  } catch (const combraman::ConfigError& e) {
    set_err(err, e.what());
    return CR_ERR_CONFIG;
  } catch (const combraman::ComputeError& e) {
    set_err(err, e.what());
    return CR_ERR_COMPUTE;
  } catch (const std::exception& e) {
    set_err(err, e.what());
    return CR_ERR_COMPUTE;
  }
}

void cr_string_free(char* s) { std::free(s); }

const char* cr_version(void) { return combraman::k_version; }
