#include "ratchet/rates.hpp"

namespace ratchet {

double birth_rate(int k, const DemeState& u, const ModelParams& p,
                  std::optional<int> K_cutoff) {
  if (k < 0) return 0.0;
  if (K_cutoff && k > *K_cutoff) return 0.0;
  double mass = p.fitness.at(k) * (1.0 - p.mu) * static_cast<double>(u.at(k));
  if (k >= 1) {
    mass += p.fitness.at(k - 1) * p.mu * static_cast<double>(u.at(k - 1));
  }
  if (mass == 0.0) return 0.0;
  return mass * q_scaled(p.q_plus, p.N, static_cast<double>(u.total()));
}

double death_rate(int k, const DemeState& u, const ModelParams& p) {
  std::int64_t uk = u.at(k);
  if (uk == 0) return 0.0;
  return static_cast<double>(uk) *
         q_scaled(p.q_minus, p.N, static_cast<double>(u.total()));
}

double total_rate_bound(double u_total, const ModelParams& p) {
  return u_total * (q_scaled(p.q_plus, p.N, u_total) +
                    q_scaled(p.q_minus, p.N, u_total));
}

RateVector deme_rate_vector(const DemeState& u, const ModelParams& p,
                            const TruncationParams& t) {
  RateVector rv;
  if (u.empty()) return rv;
  std::int64_t total = u.total();
  double qp = q_scaled(p.q_plus, p.N, static_cast<double>(total));
  double qm = q_scaled(p.q_minus, p.N, static_cast<double>(total));
  int max_k = u.counts.rbegin()->first;
  // Birth channels exist for offspring types k <= K_n only; a type-k channel
  // draws mass from type-k parents (no mutation) and type-(k-1) parents
  // (mutation), so it can reach one past the highest occupied type.
  int birth_top = std::min(t.K, max_k + 1);
  for (int k = 0; k <= birth_top; ++k) {
    double mass = p.fitness.at(k) * (1.0 - p.mu) * static_cast<double>(u.at(k));
    if (k >= 1) {
      mass += p.fitness.at(k - 1) * p.mu * static_cast<double>(u.at(k - 1));
    }
    if (mass > 0.0 && qp > 0.0) {
      double r = mass * qp;
      rv.births[k] = r;
      rv.total += r;
    }
  }
  if (qm > 0.0) {
    for (const auto& [k, n] : u.counts) {
      double r = static_cast<double>(n) * qm;
      rv.deaths[k] = r;
      rv.total += r;
    }
  }
  return rv;
}

}  // namespace ratchet
