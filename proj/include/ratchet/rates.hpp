#pragma once

#include <map>
#include <optional>

#include "ratchet/configuration.hpp"
#include "ratchet/params.hpp"

namespace ratchet {

/// Per-type reaction rates of one deme. Births are populated only up to the
/// reproduction cutoff when one is supplied.
struct RateVector {
  std::map<int, double> births;
  std::map<int, double> deaths;
  double total = 0.0;
};

/// Rate at which a type-k particle is added to a deme with histogram u:
/// (s_k (1-mu) u_k + 1_{k>=1} s_{k-1} mu u_{k-1}) * q_+(||u||/N).
/// Zero when a cutoff is given and k exceeds it.
double birth_rate(int k, const DemeState& u, const ModelParams& p,
                  std::optional<int> K_cutoff = std::nullopt);

/// Rate at which a type-k particle is removed: u_k * q_-(||u||/N).
double death_rate(int k, const DemeState& u, const ModelParams& p);

/// u_total * (q_+(u_total/N) + q_-(u_total/N)); dominates the summed reaction
/// rates of any deme with that many particles.
double total_rate_bound(double u_total, const ModelParams& p);

RateVector deme_rate_vector(const DemeState& u, const ModelParams& p,
                            const TruncationParams& t);

}  // namespace ratchet
