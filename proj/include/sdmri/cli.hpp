#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sdmri/analysis.hpp"
#include "sdmri/btpde.hpp"
#include "sdmri/btspec.hpp"
#include "sdmri/mf.hpp"

namespace sdmri::cli {

struct BoxSpec {
  double lx = 0, ly = 0, lz = 0;
  int nx = 1, ny = 1, nz = 1;
};

struct BtspecConfig {
  seq::Vec3 direction{1, 0, 0};
  std::vector<double> amplitudes_T_m;
  double significance_threshold = 0.01;
  double a_delta_threshold = 0.001;
  double support_frac = 0.01;
  std::vector<int> support_modes;  // 1-based
};

struct RunConfig {
  // Mesh source: exactly one of the two.
  std::optional<std::pair<std::string, std::string>> mesh_files;  // node, ele
  std::optional<BoxSpec> box;

  double D0 = 2.0;  // um^2/ms
  double rho = 1.0;
  double l_s_min = 1.0;  // um
  std::vector<seq::Pgse> sequences;
  std::vector<double> bvalues;     // s/mm^2; exclusive with amplitudes
  std::vector<double> amplitudes;  // T/m
  int n_directions = 1;
  bool hemisphere = false;
  std::vector<std::string> methods;
  btpde::BtpdeOptions btpde_opts;
  BtspecConfig btspec;
  std::vector<double> significance_thresholds = {0.001, 0.01};
  int threads = 0;
  bool rms = false;
  std::string eig_cache;  // default: <output_dir>/eig.bin
  std::string output_dir = "out";

  std::string config_text;  // raw config for hashing
};

/// Parses and validates the JSON run configuration. Validation errors name
/// the offending field.
RunConfig parse_config(const std::string& path);

/// Runs the pipeline stages needed by `methods` (empty = config methods).
/// Writes outputs and manifest.json under the output directory.
void run_pipeline(const RunConfig& cfg, const std::vector<std::string>& methods = {});

/// Prints mesh geometry summary and writes mesh_info.json.
std::string mesh_info(const RunConfig& cfg);

/// Assembles and solves (or loads) the eigendecomposition cache only.
void eig_only(const RunConfig& cfg);

/// Consumes two signal CSVs and writes compare.json with per-(seq,b) E.
void compare_signals(const RunConfig& cfg, const std::string& csv_a, const std::string& csv_b);

/// CLI entry point (argv-style); maps errors to exit codes
/// 0 ok, 2 config/input, 3 numeric, 4 io.
int main_cli(int argc, char** argv);

}  // namespace sdmri::cli
