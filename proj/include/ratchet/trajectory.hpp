#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ratchet/configuration.hpp"
#include "ratchet/params.hpp"

namespace ratchet {

enum class EventKind : std::uint8_t {
  MigrateLeft = 0,
  MigrateRight = 1,
  Birth = 2,
  Death = 3,
};

struct EventRecord {
  double time = 0.0;
  int site = 0;                  // source deme for migrations
  EventKind kind = EventKind::Birth;
  int k = 0;                     // particle type moved/born/removed
  bool mutated = false;          // birth only: offspring type is parent+1
  std::int64_t post_total = 0;   // l1 total at `site` after the event

  bool operator==(const EventRecord&) const = default;
};

const char* event_kind_name(EventKind kind);

/// Seeded, replayable record of one exact run.
struct Trajectory {
  Configuration initial;
  ModelParams params;
  TruncationParams trunc;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
  double horizon = 0.0;
  bool mutation_free = false;  // dominating-process runs carry type-0 counts
  std::vector<EventRecord> events;
  std::vector<std::pair<double, Configuration>> snapshots;
  Configuration final_config;
};

/// Deterministic reapplication of the event list; verifies every recorded
/// snapshot exactly and returns the final configuration.
Configuration replay(const Trajectory& traj);

/// State at time t (events with time <= t applied). Requires t <= horizon.
Configuration state_at(const Trajectory& traj, double t);

/// Binary-safe length-prefixed record stream under a text header.
std::string trajectory_to_bytes(const Trajectory& traj);
Trajectory trajectory_from_bytes(std::string_view bytes);

void write_trajectory(std::ostream& os, const Trajectory& traj);
Trajectory read_trajectory(std::istream& is);

}  // namespace ratchet
