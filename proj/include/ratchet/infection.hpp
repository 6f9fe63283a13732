#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ratchet/configuration.hpp"
#include "ratchet/params.hpp"

namespace ratchet {

/// Generation-ancestry label: root index plus child-index path.
struct UlamHarris {
  std::uint64_t root = 0;
  std::vector<std::uint32_t> path;

  /// |u|: sum of the child indices along the path.
  std::uint64_t weight() const {
    std::uint64_t w = 0;
    for (std::uint32_t v : path) w += v;
    return w;
  }

  std::string to_string() const;

  bool operator==(const UlamHarris&) const = default;
};

/// Classes of tracked particles; class 0 (susceptible) particles are kept as
/// counts and never tracked individually.
enum class CouplingClass : std::uint8_t {
  Infected1 = 0,
  Infected2 = 1,
  Partial1 = 2,  // 1*: exclusive to marginal 1, bound to a 2* dual
  Partial2 = 3,  // 2*
};

inline bool is_partial(CouplingClass c) {
  return c == CouplingClass::Partial1 || c == CouplingClass::Partial2;
}

/// 1 for classes {1, 1*}, 2 for classes {2, 2*}.
inline int side_of(CouplingClass c) {
  return (c == CouplingClass::Infected1 || c == CouplingClass::Partial1) ? 1 : 2;
}

struct TrackedParticle {
  CouplingClass cls = CouplingClass::Infected1;
  int site = 0;
  int k = 0;
  std::uint64_t dual_id = 0;  // meaningful iff partially recovered
  UlamHarris label;
  std::uint64_t jumps = 0;      // migrations of this particle and its ancestors
  std::uint32_t children = 0;   // labels handed out so far
};

/// Class-resolved state of the two coupled realisations.
struct CouplingState {
  std::map<int, DemeState> susceptible;              // class 0, shared
  std::map<std::uint64_t, TrackedParticle> tracked;  // classes 1, 2, 1*, 2*
  std::uint64_t next_id = 1;

  std::int64_t class0_count(int site) const;
  std::int64_t class_count(int site, CouplingClass c) const;
  /// ||eta^{(i)}(site)|| = class0 + class i + class i*.
  std::int64_t marginal_count(int site, int i) const;
  Configuration marginal(int i) const;
  Configuration class_histogram(CouplingClass c) const;
};

/// Class assignment from two initial configurations: the shared part is
/// susceptible, the one-sided surpluses are infected.
CouplingState init_coupling(const Configuration& a, const Configuration& b);

/// Per-deme channel totals, exactly the coupling's event rates.
struct ChannelRates {
  double mig0 = 0.0, mig1 = 0.0, mig2 = 0.0, migp = 0.0;  // per direction
  double birth0 = 0.0, birth1 = 0.0, birth2 = 0.0;
  double induce[2][2] = {};    // [i1-1][i2-1]
  double die0 = 0.0, die1 = 0.0, die2 = 0.0, die_pair = 0.0;
  double transmit[2][2] = {};  // transmitter class i1, polarity i2
  double partial[2][2] = {};   // indicator class i1, dying class i2*

  double total(int directions) const;
};

struct DemeChannelReport {
  ChannelRates rates;
  std::int64_t marginal[2] = {0, 0};
  bool high_density[2] = {false, false};  // marginal_i >= N * U_eps
  double U_eps = 0.0;
};

/// Channel rates at one deme, annotated with the high-density indicator
/// derived from the density threshold for `eps`.
DemeChannelReport coupling_rates(const CouplingState& state, int site,
                                 const ModelParams& p,
                                 const TruncationParams& t, double eps);

/// Smallest grid value U > 1 such that q_+, q_- and q_+' are non-negative and
/// non-decreasing beyond U, dominate their values on [0, U], and
/// (q_+(U') + U' q_+'(U')) / q_-(U') <= eps for all U' >= U.
double compute_U_eps(const ModelParams& p, double eps, double step = 0.1);

struct GuardReport {
  bool applicable = false;       // max marginal >= N * U_eps
  bool cross_rates_zero = true;  // transmit/partial/induce with i1 != i2
  double ratio_generation = 0.0; // (b_inf + b_induce) / (.. + d_inf + d_transmit)
  double ratio_birth_only = 0.0; // b_inf / (b_inf + d_min + d_partial)
  bool ok = true;                // all assertions hold at <= eps
};

/// Checks the high-density consequences at a deme; throws GuardViolation when
/// `enforce` is set and an assertion fails.
GuardReport high_density_guard_check(const CouplingState& state, int site,
                                     const ModelParams& p,
                                     const TruncationParams& t, double eps,
                                     bool enforce = false);

struct CouplingOptions {
  double horizon = 1.0;
  double eps = 0.1;            // threshold parameter for guard diagnostics
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
  std::vector<double> snapshot_times;
  double hit_radius = 1.0;     // spread report watches [-r, r]
  std::uint64_t event_cap = 10'000'000;
  bool track_labels = true;
  bool guard_checks = false;   // run (and enforce) the guard at event demes
  bool record_events = false;
};

struct CouplingEvent {
  double time = 0.0;
  int site = 0;
  std::string channel;
};

struct CouplingSnapshot {
  double time = 0.0;
  Configuration marginal1;
  Configuration marginal2;
  Configuration class0, class1, class2, partial1, partial2;
};

/// Per-replicate spread-of-infection measurements.
struct SpreadReport {
  bool hit = false;              // difference touched [-r, r] within [0, T]
  double first_hit_time = -1.0;
  std::uint64_t max_jumps = 0;   // max J over tracked particles
  std::uint64_t reinfections = 0;
  std::uint64_t final_diff_mass = 0;
  std::uint64_t events = 0;
};

struct CouplingResult {
  SpreadReport spread;
  std::vector<CouplingSnapshot> snapshots;
  std::vector<CouplingEvent> events;
  Configuration final_marginal1;
  Configuration final_marginal2;
  std::uint64_t guard_checks_done = 0;
};

/// Exact Gillespie over all coupling channels with per-event invariant
/// assertions (dual balance, co-location, marginal reconstruction).
CouplingResult simulate_coupling(const Configuration& a, const Configuration& b,
                                 const ModelParams& p, const TruncationParams& t,
                                 const CouplingOptions& opt);

/// Single-step access for targeted tests: applies exactly one event to the
/// state (the one selected by the state's total rates and the stream draw).
/// Returns false when no channel has positive rate.
bool coupling_step(CouplingState& state, double& clock, const ModelParams& p,
                   const TruncationParams& t, std::uint64_t seed,
                   std::uint64_t replicate = 0);

}  // namespace ratchet
