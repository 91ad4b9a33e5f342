#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <unistd.h>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "ppktp/cli.hpp"
#include "ppktp/config.hpp"
#include "ppktp/errors.hpp"

using namespace ppktp;
using namespace ppktp::config;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("ppktp_test_" + std::to_string(::getpid()) + "_" + std::to_string(count++))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static inline int count = 0;
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("config_cli") {
  TEST_CASE("serialize and parse round trip") {
    RunConfig cfg;
    cfg.temperature_C = 71.25;
    cfg.coefficient_set = "kato2002";
    cfg.seed = 12345678901234ULL;
    cfg.phi_rad = 0.1 + 0.2;
    cfg.envelope = "sinc2";
    const RunConfig back = parse_config(serialize(cfg));
    CHECK(back == cfg);
    CHECK(config_hash(back) == config_hash(cfg));
    CHECK(config_hash(RunConfig{}) != config_hash(cfg));
    CHECK(config_hash(cfg).size() == 16);
  }

  TEST_CASE("metadata block round trip") {
    RunConfig cfg;
    cfg.pump_nm = 405.0;
    cfg.restarts = 9;
    std::istringstream in("# header\n" + metadata_block(cfg) + "a,b\n1,2\n");
    CHECK(config_from_output(in) == cfg);
  }

  TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config("[crystal]\nbogus = 1\n"), InputError);
    CHECK_THROWS_AS(parse_config("[nowhere]\nx = 1\n"), InputError);
    CHECK_THROWS_AS(parse_config("[pump]\nlambda_nm = abc\n"), InputError);
    RunConfig cfg;
    cfg.plane = "xx";
    CHECK_THROWS_AS(validate(cfg), InputError);
    cfg = RunConfig{};
    cfg.coefficient_set = "missing";
    CHECK_THROWS_AS(crystal(cfg), InputError);
    const auto partial = parse_config("[geometry]\ntemperature_C = 60\n");
    CHECK(partial.temperature_C == 60);
    CHECK(partial.theta_mode_deg == RunConfig{}.theta_mode_deg);
  }

  TEST_CASE("every field has a unique flag and key") {
    RunConfig cfg;
    std::set<std::string> flags, keys;
    for (const auto& f : fields(cfg)) {
      CHECK(flags.insert(std::string(f.flag)).second);
      CHECK(keys.insert(std::string(f.section) + "." + std::string(f.key)).second);
      assign(f, value_text(f));
    }
    CHECK(cfg == RunConfig{});
  }

  TEST_CASE("repeated runs are byte identical") {
    TempDir d;
    const std::vector<std::vector<std::string>> runs{
        {"sweep", "tuning", "--t-step", "10"},
        {"sweep", "hom"},
        {"tomo", "--noise", "poisson", "--n", "100"},
        {"rates"}};
    const char* files[] = {"tuning.csv", "hom.csv", "tomo.json", "tomo_counts.csv", "rates.json"};
    std::map<std::string, std::string> first;
    for (int pass = 0; pass < 2; ++pass) {
      for (auto args : runs) {
        args.insert(args.end(), {"--out", d.path.string()});
        REQUIRE(run_cli(args).code == 0);
      }
      for (const char* f : files) {
        if (pass == 0) {
          first[f] = slurp(d.path / f);
        } else {
          CHECK(slurp(d.path / f) == first[f]);
        }
      }
    }
  }

  TEST_CASE("flags override the config file") {
    TempDir d;
    std::ofstream(d.path / "run.ini") << "[geometry]\ntemperature_C = 60\ntheta_mode_deg = 0.9\n";
    REQUIRE(run_cli({"--config", (d.path / "run.ini").string(), "--t", "70", "sweep", "stability", "--out",
                     d.path.string()})
                .code == 0);
    std::ifstream in(d.path / "stability.csv");
    const RunConfig cfg = config_from_output(in);
    CHECK(cfg.temperature_C == 70);
    CHECK(cfg.theta_mode_deg == 0.9);
  }

  TEST_CASE("exit codes") {
    TempDir d;
    CHECK(run_cli({"tdc", "--out", d.path.string()}).code == cli::kSuccess);
    const auto bad_set = run_cli({"tdc", "--set", "nope", "--out", d.path.string()});
    CHECK(bad_set.code == cli::kInputError);
    CHECK(bad_set.err.find("fiorentino2007") != std::string::npos);
    CHECK(run_cli({"sweep", "nonsense", "--out", d.path.string()}).code == cli::kInputError);
    CHECK(run_cli({"tomo", "--input", (d.path / "absent.csv").string(), "--out", d.path.string()}).code ==
          cli::kInputError);
    CHECK(run_cli({"--t", "warm", "tdc", "--out", d.path.string()}).code == cli::kInputError);
    CHECK(run_cli({}).code == cli::kInputError);
    // No phase match anywhere in the allowed range.
    CHECK(run_cli({"tdc", "--lambda-p", "300", "--out", d.path.string()}).code != cli::kSuccess);
  }

  TEST_CASE("sweep outputs carry provenance") {
    TempDir d;
    REQUIRE(run_cli({"sweep", "tuning", "--out", d.path.string(), "--t-step", "20"}).code == 0);
    const std::string text = slurp(d.path / "tuning.csv");
    CHECK(text.rfind("# ppktp sweep tuning", 0) == 0);
    std::istringstream in(text);
    CHECK(text.find("# config_hash = " + config_hash(config_from_output(in))) != std::string::npos);
    CHECK(text.find("coefficient_source = fiorentino2007") != std::string::npos);
    CHECK(text.find(std::string(kConfigBegin)) != std::string::npos);
  }

  TEST_CASE("tomography and rates outputs") {
    TempDir d;
    REQUIRE(run_cli({"tomo", "--out", d.path.string()}).code == 0);
    const auto tomo = nlohmann::json::parse(slurp(d.path / "tomo.json"));
    CHECK(tomo["concurrence"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));

    REQUIRE(run_cli({"tomo", "--input", (d.path / "tomo_counts.csv").string(), "--out", d.path.string()}).code == 0);

    REQUIRE(run_cli({"rates", "--out", d.path.string()}).code == 0);
    const auto rates = nlohmann::json::parse(slurp(d.path / "rates.json"));
    CHECK(rates["pair_rate_kHz_per_mW"].get<double>() == doctest::Approx(41.015625).epsilon(1e-12));
  }
}
