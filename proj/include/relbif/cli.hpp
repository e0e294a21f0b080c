#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "relbif/numerics.hpp"
#include "relbif/systems_catalog.hpp"

namespace relbif {

// Config file problem; field is a dotted path ("bifurcation.v0") or "json" for syntax errors.
struct ConfigError : std::runtime_error {
  std::string field;
  ConfigError(std::string f, const std::string& msg) : std::runtime_error(msg), field(std::move(f)) {}
};

struct RunConfig {
  std::string system;
  Params params;
  // optional replacements for the catalog algebra data; empty means keep
  std::vector<Mat> structure_constants;  // c[k](i, j)
  Mat inner, torus;
  Numerics num;
  std::vector<std::string> overrides;  // "key = value" lines for the report header
  bool has_v0 = false;
  std::vector<double> v0;
  std::vector<double> theta1;  // empty: scalar form in theta1_scale
  double theta1_scale = 1.0;
  std::vector<std::vector<double>> mu1_grid;  // m1 coordinates
  double tau_max = 0.1;
  int n_steps = 64;
  std::vector<double> seed_u, seed_mu2;
  bool has_seed_u = false, has_seed_mu2 = false;
  double horizon = 10.0;
  std::string out_dir = "relbif_out";
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

// Parses "u=a:b,mu2=c" into the seed guess fields.
void apply_seed_guess(RunConfig& cfg, const std::string& guess);

// Entry point shared by the executable and the tests. Exit codes: 0 success,
// 1 config error, 2 verification failure, 3 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace relbif
