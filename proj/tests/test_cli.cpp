#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "relbif/cli.hpp"

using namespace relbif;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("relbif_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "relbif");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const char* kRotor = R"({
  "system": {"name": "planar_rotor", "params": {"m": 1, "k": 1}},
  "bifurcation": {"v0": [1, 0], "theta1": 1.0, "tau_max": 0.25, "n_steps": 4}
})";

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig c = parse_config_text(R"({
    "system": {"name": "flat_t2", "params": {"eps": 0.1}, "chart_radius": 0.5},
    "numerics": {"tol_newton": 1e-11, "geo_steps": 32, "blowup_scheme": {"step_rel": 0.02}},
    "bifurcation": {"v0": [0, 0, 1, 0], "theta1": 2.0, "mu1_grid": [0.5, [0.8]], "tau_max": 0.3, "n_steps": 6,
                    "seed_guess": {"u": [1, 0]}, "horizon": 5},
    "outputs": {"dir": "x"}
  })");
  CHECK(c.system == "flat_t2");
  CHECK(c.params.at("chart_radius") == 0.5);
  CHECK(c.params.at("eps") == 0.1);
  CHECK(c.num.tol_newton == 1e-11);
  CHECK(c.num.geo_steps == 32);
  CHECK(c.num.blowup_scheme.step_rel == 0.02);
  CHECK(c.overrides.size() == 3);
  CHECK(c.theta1_scale == 2.0);
  REQUIRE(c.mu1_grid.size() == 2);
  CHECK(c.mu1_grid[1][0] == 0.8);
  CHECK(c.n_steps == 6);
  CHECK(c.has_seed_u);
  CHECK_FALSE(c.has_seed_mu2);
  CHECK(c.horizon == 5.0);
  CHECK(c.out_dir == "x");
}

TEST_CASE("config errors name the field") {
  auto field_of = [](const std::string& text) {
    try {
      parse_config_text(text);
    } catch (const ConfigError& e) {
      return e.field;
    }
    return std::string("none");
  };
  CHECK(field_of(R"({"system": {"name": "planar_rotor"}, "extra": 1})") == "extra");
  CHECK(field_of(R"({"system": {"name": 3}})") == "system.name");
  CHECK(field_of(R"({"bifurcation": {}})") == "system");
  CHECK(field_of(R"({"system": {"name": "x"}, "bifurcation": {"v0": [1, "a"]}})") == "bifurcation.v0[1]");
  CHECK(field_of(R"({"system": {"name": "x"}, "numerics": {"tol_Z": -1}})") == "numerics.tol_Z");
  CHECK(field_of(R"({"system": {"name": "x"}, "numerics": {"tol_typo": 1}})") == "numerics.tol_typo");
  CHECK(field_of("{\n \"system\": \n}") == "json");
  try {
    parse_config_text("{\n \"system\": \n}");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("seed guess flag") {
  RunConfig c;
  apply_seed_guess(c, "u=1.5:0.25,mu2=0:1");
  REQUIRE(c.seed_u.size() == 2);
  CHECK(c.seed_u[1] == 0.25);
  CHECK(c.seed_mu2.size() == 2);
  CHECK_THROWS_AS(apply_seed_guess(c, "u=abc"), ConfigError);
  CHECK_THROWS_AS(apply_seed_guess(c, "v=1"), ConfigError);
}

TEST_CASE("verify and seed on the planar rotor") {
  const fs::path dir = scratch("rotor");
  const fs::path cfg = write_config(dir, kRotor);
  const Run v = run({"verify", cfg.string(), "--out", (dir / "out").string()});
  CHECK(v.code == 0);
  CHECK(v.out.find("status: PASS") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "analysis.txt"));

  const Run s = run({"seed", "--config", cfg.string(), "--out", (dir / "out").string()});
  CHECK(s.code == 0);
  CHECK(s.out.find("u0: [1]") != std::string::npos);
  CHECK(s.out.find("det_Delta: 3.99999999") != std::string::npos);
}

TEST_CASE("branch, stability round trip and determinism") {
  const fs::path dir = scratch("branch");
  const fs::path cfg = write_config(dir, kRotor);
  const std::string out = (dir / "out").string();
  REQUIRE(run({"branch", cfg.string(), "--out", out}).code == 0);
  const std::string csv = slurp(dir / "out" / "branch_mu1_0.csv");
  CHECK(csv.rfind("tau,u_0,q_0,q_1,zeta_0,beta_0,res_F,res_G,stability\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  const Run st = run({"stability", cfg.string(), "--out", out});
  CHECK(st.code == 0);
  CHECK(st.out.find("flags reproduced") != std::string::npos);
  CHECK(slurp(dir / "out" / "branch_mu1_0.csv") == csv);

  REQUIRE(run({"all", cfg.string(), "--out", out}).code == 0);
  const std::string a1 = slurp(dir / "out" / "analysis.txt"), c1 = slurp(dir / "out" / "branch_mu1_0.csv");
  REQUIRE(run({"all", cfg.string(), "--out", out, "--threads", "2"}).code == 0);
  CHECK(slurp(dir / "out" / "analysis.txt") == a1);
  CHECK(slurp(dir / "out" / "branch_mu1_0.csv") == c1);
}

TEST_CASE("zero tau_max gives a single row") {
  const fs::path dir = scratch("single");
  const fs::path cfg = write_config(dir, R"({
    "system": {"name": "planar_rotor"},
    "bifurcation": {"v0": [1, 0], "tau_max": 0}
  })");
  REQUIRE(run({"branch", cfg.string(), "--out", (dir / "out").string()}).code == 0);
  const std::string csv = slurp(dir / "out" / "branch_mu1_0.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("codes");
  const std::string out = (dir / "out").string();
  CHECK(run({"verify", (dir / "missing.json").string()}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  const fs::path unknown = write_config(dir, R"({"system": {"name": "no_such"}})");
  const Run u = run({"verify", unknown.string(), "--out", out});
  CHECK(u.code == 1);
  CHECK(u.err.find("system.name") != std::string::npos);

  // an impossibly strict (H) tolerance turns roundoff into a verification failure
  const fs::path strict = write_config(dir, R"({"system": {"name": "so3_two_particle"},
                                               "numerics": {"tol_H": 1e-300}})");
  const Run vf = run({"verify", strict.string(), "--out", out});
  CHECK(vf.code == 2);
  CHECK(vf.out.find("status: FAIL") != std::string::npos);

  // inverted spring: dF/du < 0 everywhere, Newton fails
  const fs::path inv = write_config(dir, R"({"system": {"name": "planar_rotor", "params": {"k": -1}},
                                            "bifurcation": {"v0": [1, 0], "theta1": 1.0}})");
  const Run n = run({"seed", inv.string(), "--out", out});
  CHECK(n.code == 3);
  CHECK(n.err.find("NewtonDiverged") != std::string::npos);

  const fs::path nonab = write_config(dir, R"({"system": {"name": "so3_two_particle"},
                                              "bifurcation": {"v0": [2, 0, 0, -1, 0, 0]}})");
  const Run s = run({"stability", nonab.string(), "--out", out});
  CHECK(s.code == 3);
  CHECK(s.err.find("NonAbelian") != std::string::npos);
}

TEST_CASE("structure constants from the config") {
  const fs::path dir = scratch("algebra");
  const std::string out = (dir / "out").string();
  const std::string so3 = R"([[[0,0,0],[0,0,1],[0,-1,0]], [[0,0,-1],[0,0,0],[1,0,0]], [[0,1,0],[-1,0,0],[0,0,0]]])";
  const std::string flipped = R"([[[0,0,0],[0,0,-1],[0,1,0]], [[0,0,1],[0,0,0],[-1,0,0]], [[0,-1,0],[1,0,0],[0,0,0]]])";
  auto cfg = [&](const std::string& c, const std::string& inner) {
    return write_config(dir, R"({"system": {"name": "so3_two_particle", "algebra": {"structure_constants": )" + c +
                                 R"(, "inner": )" + inner + R"(, "torus": [[0, 0, 1]]}}})");
  };
  const Run ok = run({"verify", cfg(so3, "[[2,0,0],[0,2,0],[0,0,2]]").string(), "--out", out});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("algebra.structure_constants from config") != std::string::npos);
  // opposite bracket sign is a valid algebra but inconsistent with the generators
  CHECK(run({"verify", cfg(flipped, "[[1,0,0],[0,1,0],[0,0,1]]").string(), "--out", out}).code == 2);
  // a non-invariant inner product is rejected up front
  const Run bad = run({"verify", cfg(so3, "[[1,0,0],[0,2,0],[0,0,1]]").string(), "--out", out});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("system.algebra") != std::string::npos);
}
