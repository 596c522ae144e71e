#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <combraman/combraman.h>

#include <filesystem>
#include <fstream>
#include <string>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string fiber_cfg = std::string(CONFIG_DIR) + "/fiber_comb.cfg";

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("combraman_capi_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Session {
  cr_session* handle = nullptr;
  ~Session() { cr_session_close(handle); }
};

struct OwnedString {
  char* s = nullptr;
  ~OwnedString() { cr_string_free(s); }
};

}  // namespace

TEST_CASE("version string is available") {
  const char* v = cr_version();
  REQUIRE(v != nullptr);
  CHECK(std::string(v).find('.') != std::string::npos);
}

TEST_CASE("opening a missing config fails with a message") {
  OwnedString err;
  CHECK(cr_session_open("/nonexistent/nothing.cfg", &err.s) == nullptr);
  REQUIRE(err.s != nullptr);
  CHECK(std::string(err.s).find("not found") != std::string::npos);
  CHECK(cr_session_open(nullptr, nullptr) == nullptr);  // err may be NULL
}

TEST_CASE("budget run returns the result document") {
  OwnedString err;
  Session session;
  session.handle = cr_session_open(fiber_cfg.c_str(), &err.s);
  REQUIRE(session.handle != nullptr);
  CHECK(err.s == nullptr);

  const auto out = temp_dir("budget").string();
  cr_run_options opts{};
  opts.out_dir = out.c_str();
  OwnedString result;
  const cr_status rc =
      cr_session_run(session.handle, "budget", &opts, &result.s, &err.s);
  CHECK(rc == CR_OK);
  CHECK(err.s == nullptr);
  REQUIRE(result.s != nullptr);

  const json j = json::parse(result.s);
  CHECK(j["command"] == "budget");
  CHECK(j["total_shift_Hz"].get<double>() ==
        doctest::Approx(20.852).epsilon(1e-12));
  CHECK(j["corrected_Hz"].get<double>() ==
        doctest::Approx(1819599021534.148).epsilon(1e-12));
  CHECK(fs::exists(fs::path(out) / "manifest.json"));
}

TEST_CASE("rabi run honors option overrides") {
  Session session;
  session.handle = cr_session_open(fiber_cfg.c_str(), nullptr);
  REQUIRE(session.handle != nullptr);

  const auto out = temp_dir("rabi").string();
  cr_run_options opts{};
  opts.out_dir = out.c_str();
  opts.theta_deg = 25.0;
  opts.has_theta = 1;
  opts.seed = 42;
  opts.has_seed = 1;
  OwnedString result;
  REQUIRE(cr_session_run(session.handle, "rabi", &opts, &result.s, nullptr) ==
          CR_OK);
  const json j = json::parse(result.s);
  CHECK(j["theta_deg"].get<double>() == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(j["omega_R_Hz"].get<double>() > 0.0);
  CHECK(j["eta_eff"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));

  std::ifstream in(fs::path(out) / "manifest.json");
  REQUIRE(in.good());
  const json manifest = json::parse(in);
  CHECK(manifest["seed"] == 42);
}

TEST_CASE("error codes distinguish config from compute failures") {
  Session session;
  session.handle = cr_session_open(fiber_cfg.c_str(), nullptr);
  REQUIRE(session.handle != nullptr);
  const auto out = temp_dir("errors").string();
  cr_run_options opts{};
  opts.out_dir = out.c_str();

  OwnedString result, err;
  CHECK(cr_session_run(session.handle, "frobnicate", &opts, &result.s,
                       &err.s) == CR_ERR_CONFIG);
  CHECK(result.s == nullptr);
  REQUIRE(err.s != nullptr);
  CHECK(std::string(err.s).find("unknown command") != std::string::npos);

  // null session
  OwnedString err2;
  CHECK(cr_session_run(nullptr, "rabi", &opts, nullptr, &err2.s) ==
        CR_ERR_CONFIG);
  CHECK(err2.s != nullptr);

  // compute failure: theta scan with a malformed range still maps to
  // config; a genuinely failing fit maps to compute
  const auto dir = temp_dir("compute");
  {
    std::ofstream csv(dir / "flat.csv");
    csv << "x,y\n";
    for (int i = 0; i < 20; ++i) csv << i * 100.0 << ",0.5\n";
    std::ofstream cfg(dir / "run.cfg");
    cfg << "[fit]\nmodel = sinc2\ninput = flat.csv\npulse_s = 0.002\n";
  }
  Session fit_session;
  fit_session.handle =
      cr_session_open((dir / "run.cfg").string().c_str(), nullptr);
  REQUIRE(fit_session.handle != nullptr);
  const auto out2 = (dir / "out").string();
  cr_run_options opts2{};
  opts2.out_dir = out2.c_str();
  OwnedString err3;
  CHECK(cr_session_run(fit_session.handle, "fit", &opts2, nullptr, &err3.s) ==
        CR_ERR_COMPUTE);
  CHECK(err3.s != nullptr);
}
