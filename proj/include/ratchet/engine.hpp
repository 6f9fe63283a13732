#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "ratchet/configuration.hpp"
#include "ratchet/params.hpp"
#include "ratchet/trajectory.hpp"

namespace ratchet {

struct SimulateOptions {
  double horizon = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
  std::vector<double> snapshot_times;
  bool record_events = true;
  std::uint64_t event_cap = 10'000'000;
  /// Recompute every cached rate from scratch after each event and compare.
  bool paranoid_checks = false;
};

/// Exact sample of the truncated process: migration suppressed outside the
/// active box, births per type up to the reproduction cutoff, per-capita
/// polynomial death rates evaluated at the local occupancy.
Trajectory simulate_eta_n(const Configuration& init, const ModelParams& p,
                          const TruncationParams& t, const SimulateOptions& opt);

/// Per-deme l1 totals of the part of `c` inside the active box.
std::map<int, std::int64_t> zeta_init_from(const Configuration& c,
                                           const ModelParams& p,
                                           const TruncationParams& t);

/// Mutation-free dominating process; with trunc.kappa set, births switch off
/// at occupancies above N*kappa.
Trajectory simulate_zeta(const std::map<int, std::int64_t>& init_counts,
                         const ModelParams& p, const TruncationParams& t,
                         const SimulateOptions& opt);

struct DominationPair {
  Trajectory eta;
  Trajectory zeta;
  std::uint64_t events = 0;  // shared event count (pathwise checks performed)
};

/// One event stream drives both processes: paired particles share migration
/// and death events, the dominating side carries the surplus, and the ordering
/// zeta(t,x) >= ||eta(t,x)|| is asserted after every event.
/// Requires q_- non-decreasing on [0, inf); throws NonMonotoneDeath otherwise.
DominationPair simulate_domination_pair(const Configuration& init,
                                        const ModelParams& p,
                                        const TruncationParams& t,
                                        const SimulateOptions& opt);

}  // namespace ratchet
