#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "sdapk/mod_filter.hpp"
#include "sdapk/sd_core.hpp"
#include "sdapk/vneumann.hpp"

namespace sdapk {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MeshSpec {
  int n_blocks = 4;
  std::string file;  // overrides n_blocks when set
};

struct ProblemSpec {
  std::string name = "advection";
  double psi = M_PI / 4;
  bool exact = true;
};

struct StabilityConfig {
  bool filtered = false;
  std::vector<ApkParams> tuples;
  std::vector<int> p{2};
  std::vector<double> c{8};
  int n_psi = 5, n_w = 5;
  FilteredStabilitySettings settings;
  bool lagrange = true;
  std::string checkpoint;
};

struct CondConfig {
  std::vector<ApkParams> tuples{{1, 1, 2}, {2, 2, 5}};
  int N_min = 2, N_max = 10;
  bool lagrange_row = true;
};

struct FilterErrorConfig {
  std::string function = "sine";  // sine | quadratic
  FilterProfile profile = FilterProfile::cosine();
  std::vector<int> N{1, 2, 3, 4, 5, 6, 7, 8};
  ErrorStudyOptions options;
};

struct EocConfig {
  std::vector<int> n_blocks{1, 2, 4};
  std::vector<int> N{1, 2, 3, 4, 5};
  double psi = M_PI / 4;
};

struct OutputConfig {
  int snapshot_every = 0;  // steps between snapshots; 0 writes initial and final only
  bool timing = true;      // wall-clock columns; off for byte-reproducible files
};

struct Config {
  RunConfig run;
  MeshSpec mesh;
  ProblemSpec problem;
  StabilityConfig stability;
  CondConfig cond;
  FilterErrorConfig filter_error;
  EocConfig eoc;
  OutputConfig output;
};

// Throws ConfigError naming the offending key.
Config parse_config(const nlohmann::json& j);
Config load_config(const std::string& path);

Field2 error_study_function(const std::string& name);
Problem make_problem(const ProblemSpec& p);
TriMesh make_mesh(const MeshSpec& m);

}  // namespace sdapk
