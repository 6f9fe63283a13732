#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace ratchet {

/// Mutation-count histogram of one deme: k -> number of particles.
struct DemeState {
  std::map<int, std::int64_t> counts;

  std::int64_t total() const {
    std::int64_t t = 0;
    for (const auto& [k, c] : counts) t += c;
    return t;
  }

  std::int64_t at(int k) const {
    auto it = counts.find(k);
    return it == counts.end() ? 0 : it->second;
  }

  void add(int k, std::int64_t n = 1) {
    if (n == 0) return;
    auto it = counts.try_emplace(k, 0).first;
    it->second += n;
    if (it->second == 0) counts.erase(it);
  }

  bool empty() const { return counts.empty(); }

  bool operator==(const DemeState&) const = default;
};

/// Finite-support lattice configuration: site index i (physical position i/L)
/// -> deme histogram. Sites beyond support_radius carry no particles.
struct Configuration {
  std::map<int, DemeState> demes;
  int support_radius = 0;

  std::int64_t count(int site, int k) const {
    auto it = demes.find(site);
    return it == demes.end() ? 0 : it->second.at(k);
  }

  std::int64_t deme_total(int site) const {
    auto it = demes.find(site);
    return it == demes.end() ? 0 : it->second.total();
  }

  std::int64_t total_particles() const {
    std::int64_t t = 0;
    for (const auto& [site, deme] : demes) t += deme.total();
    return t;
  }

  void add(int site, int k, std::int64_t n = 1);
  void remove(int site, int k, std::int64_t n = 1);

  /// Drops empty demes and tightens support_radius to the occupied support.
  void normalize();

  bool operator==(const Configuration&) const = default;
};

/// ||| c |||_S = sum_x ||c(x)||_l1 / (1+|x|)^2 over physical positions x = i/L.
double norm_S(const Configuration& c, double L);

/// d_S(a, b) = ||| a - b |||_S with componentwise integer differences.
double dist_S(const Configuration& a, const Configuration& b, double L);

/// psi_p(c) = sum_x ||c(x)||_l1^p / (1+|x|)^(2p); psi_1 == norm_S.
double psi_p(const Configuration& c, int p, double L);

struct S0Report {
  bool member = true;              // finite support forces membership
  std::int64_t sup_deme_total = 0; // realized sup_x ||c(x)||_l1
  int max_mutation_count = 0;      // largest occupied k (0 when empty)
};

/// Membership diagnostics for the set of admissible initial configurations.
S0Report in_S0(const Configuration& c);

/// Line-oriented text format; bit-exact round trip.
std::string configuration_to_text(const Configuration& c, double L);
struct ParsedConfiguration {
  Configuration config;
  double L = 1.0;
};
ParsedConfiguration configuration_from_text(std::string_view text);

/// Uniform occupancy `c` of type-0 particles on physical interval [-a, a].
Configuration uniform_block(double L, double half_width, std::int64_t occupancy);

}  // namespace ratchet
