#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ratchet/configuration.hpp"
#include "ratchet/params.hpp"

namespace ratchet {

/// Fully resolved run configuration; every field has a value after parsing
/// (defaults applied and echoed back via render_resolved).
struct RunConfig {
  ModelParams model;
  TruncationParams trunc;
  std::vector<std::pair<double, int>> schedule;  // (lambda, K) levels

  // [init]
  std::string init_kind = "empty";  // empty | uniform | inline | file
  std::int64_t init_occupancy = 1;
  double init_half_width = 0.0;
  std::vector<std::array<std::int64_t, 3>> init_cells;  // site k count
  std::string init_path;
  Configuration init;  // materialized

  // [run]
  double horizon = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t replicates = 1;
  std::vector<double> observe;
  unsigned threads = 1;
  std::uint64_t event_cap = 10'000'000;
  bool save_trajectories = false;

  // [couple]
  double eps = 0.1;
  double hit_radius = 1.0;
  std::vector<std::array<std::int64_t, 3>> b_add;
  std::vector<std::array<std::int64_t, 3>> b_remove;

  // [spread]
  std::vector<double> r_grid{4.0, 8.0, 12.0, 16.0};

  // [moments]
  std::vector<int> exponents{1};
  std::vector<int> probe_sites{0};
  double moment_time = -1.0;  // defaults to horizon

  // [greens]
  int greens_site = 0;
  std::set<int> greens_kset{0};
  int greens_grid = 64;

  // [converge]
  double window = 2.0;

  // [duality]
  int duality_instances = 100;
  int duality_sites = 5;
  int duality_max_particles = 4;

  std::string out_dir = "out";
};

/// Parses the sectioned key/value format. Unknown sections or keys are hard
/// errors; model parameters are validated (ValidationError lists violations).
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

/// The resolved configuration, defaults included, in the same format.
std::string render_resolved(const RunConfig& cfg);

/// Second initial configuration of a coupling run: init with b_add/b_remove.
Configuration coupled_partner(const RunConfig& cfg);

}  // namespace ratchet
