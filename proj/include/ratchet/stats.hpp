#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "ratchet/configuration.hpp"
#include "ratchet/params.hpp"
#include "ratchet/trajectory.hpp"

namespace ratchet {

struct MomentCell {
  int site = 0;
  int exponent = 1;
  double mean = 0.0;
  double se = 0.0;
  std::uint64_t replicates = 0;
};

struct MomentReport {
  std::vector<MomentCell> cells;
  double sup_over_sites = 0.0;   // max mean over probed sites, per exponent max
  double normalized_ratio = 0.0; // sup / (sup_x ||eta_0(x)||^p + N^p), largest p
};

/// Per-site MC moments of ||eta(T, x)||^p over a replicate collection.
/// All runs must share parameters and horizon >= T.
MomentReport moment_estimate(const std::vector<Trajectory>& runs,
                             const std::vector<int>& exponents,
                             const std::vector<int>& sites, double T);

struct ClickRecord {
  std::vector<double> times;           // strict increases of the minimum load
  std::vector<int> loads;              // minimum load right after each click
  std::optional<double> extinction_time;
};

/// Times at which the minimum mutation count among living particles strictly
/// increases. Clicks stop at extinction; the record carries the timestamp.
ClickRecord click_times(const Trajectory& traj);

struct ConvergenceRow {
  double lambda = 0.0;
  int K = 0;
  double occupancy_mean = 0.0;   // mean per-site total over the window
  double occupancy_se = 0.0;
  double load_mean = 0.0;        // mean mutation load over the window
  double load_se = 0.0;
  double occupancy_diff_sigma = -1.0;  // vs previous row; -1 for the first
  double load_diff_sigma = -1.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double sigma_threshold = 3.0;
  bool converged_last_pair = false;
};

/// Window statistics at time T across an increasing truncation schedule.
ConvergenceTable truncation_convergence(
    const Configuration& init, const ModelParams& p,
    const std::vector<std::pair<double, int>>& schedule, double window,
    double T, std::uint64_t replicates, std::uint64_t seed,
    unsigned threads = 1, double sigma_threshold = 3.0);

struct DifferenceMass {
  std::uint64_t delta0 = 0;                  // sum |a_k(x) - b_k(x)|
  std::vector<std::pair<int, int>> delta;    // (site, k) pairs that differ
  std::vector<int> delta_sp;                 // spatial projection
};

DifferenceMass difference_mass(const Configuration& a, const Configuration& b);

}  // namespace ratchet
