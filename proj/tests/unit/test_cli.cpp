#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "approx.hpp"
#include "doctest.h"
#include "qtunnel/errors.hpp"
#include "qtunnel_cli/cli.hpp"

using namespace qtunnel;
using qtunnel::cli::json;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int status = 0;
  std::string out, err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "qtunnel");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  Invocation r;
  r.status = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("qtunnel_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

double value_of(const json& result, const std::string& key) { return result.at("values").at(key).at("value").get<double>(); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("schema resolution") {
    auto cfg = cli::resolve("gl-cpr", json{{"l_over_zeta", 0.4}}, json{{"delta_points", 8}});
    CHECK(cfg.params.at("l_over_zeta") == 0.4);
    CHECK(cfg.params.at("delta_points") == 8);
    CHECK(cfg.params.at("homotopy_steps") == 100);
    CHECK_THROWS_AS(cli::resolve("gl-cpr", json{{"bogus", 1}}, json::object()), ValidationError);
    CHECK_THROWS_AS(cli::resolve("gl-cpr", json::object(), json{{"delta_points", "many"}}), ValidationError);
    CHECK_THROWS_AS(cli::resolve("nope", json::object(), json::object()), ValidationError);
    // flags override the file
    auto both = cli::resolve("wkb", json{{"hbar", 0.5}}, json{{"hbar", 0.7}});
    CHECK(both.params.at("hbar") == 0.7);
  }

  TEST_CASE("result document") {
    auto cfg = cli::resolve("gl-cpr", json::object(), json{{"l_over_zeta", 0.3}, {"delta_points", 8}});
    auto out = cli::execute(cfg);
    const json& j = out.result;
    CHECK(j.at("schema_version") == 1);
    CHECK(j.at("tool").at("name") == "qtunnel");
    CHECK(j.at("config") == cfg.params);
    CHECK(j.at("config_hash") == cli::config_hash(cfg));
    CHECK(j.at("values").at("J_c_nonlinear").at("unit") == "J_0");
    CHECK(j.at("values").at("J_c_nonlinear").contains("method"));
    REQUIRE(out.csv.count("gl-cpr_cpr.csv") == 1);
    CHECK(out.csv.at("gl-cpr_cpr.csv").rfind("delta,", 0) == 0);
  }

  TEST_CASE("identical configs give byte-identical files") {
    auto a = scratch("repro_a"), b = scratch("repro_b");
    std::vector<std::string> args{"gl-cpr", "--l-over-zeta", "0.4", "--delta-points", "8"};
    auto ra = args, rb = args;
    ra.insert(ra.end(), {"--out", a.string()});
    rb.insert(rb.end(), {"--out", b.string()});
    REQUIRE(invoke(ra).status == 0);
    REQUIRE(invoke(rb).status == 0);
    int files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
      ++files;
      CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
    }
    CHECK(files == 2);
    fs::remove_all(a);
    fs::remove_all(b);
  }

  TEST_CASE("config file and flag precedence") {
    auto dir = scratch("config");
    fs::create_directories(dir);
    {
      std::ofstream f(dir / "cfg.json");
      f << R"({"model": "parabolic", "a": 3.0, "hbar": 2.0, "n_max": 0})";
    }
    auto r = invoke({"wkb", "--config", (dir / "cfg.json").string(), "--hbar", "1", "--out", (dir / "o").string(),
                     "--format", "json"});
    REQUIRE(r.status == 0);
    auto j = json::parse(r.out);
    CHECK(j.at("config").at("hbar") == 1.0);
    CHECK(fs::exists(dir / "o" / "wkb.json"));
    CHECK_FALSE(fs::exists(dir / "o" / "wkb_doublets.csv"));
    CHECK(value_of(j, "n0_split") > 0.0);
    CHECK(value_of(j, "n0_split") == approx(value_of(j, "n0_approx_split")).epsilon(0.2));
    fs::remove_all(dir);
  }

  TEST_CASE("empty sweep writes nothing") {
    auto dir = scratch("empty_sweep");
    auto r = invoke({"sweep", "--target", "gl-cpr", "--param", "l_over_zeta", "--steps", "0", "--out", dir.string()});
    CHECK(r.status == 2);
    CHECK(json::parse(r.err).at("error").at("kind") == "ValidationError");
    CHECK_FALSE(fs::exists(dir));
  }

  TEST_CASE("sweep rows") {
    auto cfg = cli::resolve("sweep", json::object(),
                            json{{"target", "gl-cpr"}, {"param", "l_over_zeta"}, {"from", 0.1}, {"to", 0.5}, {"steps", 3},
                                 {"delta_points", 8}});
    auto out = cli::execute(cfg);
    const auto& rows = out.result.at("series").at("rows");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].at("l_over_zeta") == approx(0.1));
    CHECK(rows[2].at("l_over_zeta") == approx(0.5));
    const std::string& table = out.csv.at("sweep_table.csv");
    CHECK(table.rfind("l_over_zeta,", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 4);
    CHECK_THROWS_AS(cli::resolve("sweep", json::object(), json{{"target", "gl-cpr"}, {"param", "l_over_zeta"}, {"ej", 2.0}}),
                    ValidationError);
  }

  TEST_CASE("unknown flags and solver errors map to exit codes") {
    auto bad = invoke({"charge", "--frobnicate", "1"});
    CHECK(bad.status == 2);
    CHECK(json::parse(bad.err).contains("error"));
    auto resonant = invoke({"gl-cpr", "--l-over-zeta", "3.141592653589793", "--delta-points", "8", "--out",
                            scratch("resonant").string()});
    CHECK(resonant.status == 3);
    auto err = json::parse(resonant.err).at("error");
    CHECK(err.at("kind") == "ResonanceError");
    CHECK(err.at("module") == "gl_junction");
  }

  TEST_CASE("double well pipeline") {
    auto cfg = cli::resolve("double-well", json::object(), json{{"hbar", 0.1}, {"g", -0.1}, {"bigN", 3}});
    auto j = cli::execute(cfg).result;
    CHECK(value_of(j, "delta_E_instanton") == approx(6.740e-2).epsilon(1e-3));
    CHECK(j.at("values").contains("delta_E_oracle"));
    CHECK(j.at("values").contains("delta_E_wkb"));
    CHECK(value_of(j, "bounce_im_E0") == approx(value_of(j, "bounce_im_E0_closed")).epsilon(1e-3));
  }

  TEST_CASE("charge pipeline") {
    auto dir = scratch("charge");
    auto r = invoke({"charge", "--ej", "100", "--ec", "1", "--theta-points", "9", "--out", dir.string()});
    REQUIRE(r.status == 0);
    auto j = json::parse(r.out);
    CHECK(value_of(j, "bandwidth_ratio") == approx(1.0).epsilon(0.3));
    CHECK(fs::exists(dir / "charge_band.csv"));
    fs::remove_all(dir);
  }
}
