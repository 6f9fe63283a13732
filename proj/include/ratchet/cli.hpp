#pragma once

#include <optional>
#include <string>

#include "ratchet/run_config.hpp"

namespace ratchet {

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> replicates;
  std::optional<unsigned> threads;
  std::optional<std::string> out_dir;
  bool quiet = false;
};

/// Dispatches one subcommand; writes artifacts under the output directory.
/// Returns the process exit code: 0 success, 2 when a run-level check fails.
/// Usage and configuration errors surface as exceptions (exit 1 in main).
int run_command(const std::string& command, RunConfig cfg,
                const CliOverrides& overrides);

}  // namespace ratchet
