#include "ratchet/stats.hpp"

#include <algorithm>
#include <cmath>

#include "ratchet/engine.hpp"
#include "ratchet/parallel.hpp"

namespace ratchet {

MomentReport moment_estimate(const std::vector<Trajectory>& runs,
                             const std::vector<int>& exponents,
                             const std::vector<int>& sites, double T) {
  MomentReport report;
  if (runs.empty()) return report;
  std::vector<Configuration> states;
  states.reserve(runs.size());
  for (const auto& traj : runs) states.push_back(state_at(traj, T));

  double sup_init_norm = 0.0;
  for (const auto& [site, deme] : runs.front().initial.demes) {
    sup_init_norm =
        std::max(sup_init_norm, static_cast<double>(deme.total()));
  }
  double N = static_cast<double>(runs.front().params.N);

  int max_p = 1;
  for (int p : exponents) {
    double sup_for_p = 0.0;
    for (int site : sites) {
      std::vector<double> vals(states.size());
      for (std::size_t i = 0; i < states.size(); ++i) {
        double total = static_cast<double>(states[i].deme_total(site));
        double v = 1.0;
        for (int f = 0; f < p; ++f) v *= total;
        vals[i] = v;
      }
      MeanSe ms = mean_se(vals);
      report.cells.push_back({site, p, ms.mean, ms.se, ms.n});
      sup_for_p = std::max(sup_for_p, ms.mean);
    }
    report.sup_over_sites = std::max(report.sup_over_sites, sup_for_p);
    if (p >= max_p) {
      max_p = p;
      double denom = std::pow(sup_init_norm, p) + std::pow(N, p);
      report.normalized_ratio = denom > 0.0 ? sup_for_p / denom : 0.0;
    }
  }
  return report;
}

ClickRecord click_times(const Trajectory& traj) {
  ClickRecord record;
  // Global type histogram; the frozen exterior participates in the minimum.
  std::map<int, std::int64_t> histogram;
  for (const auto& [site, deme] : traj.initial.demes) {
    for (const auto& [k, n] : deme.counts) {
      if (n > 0) histogram[k] += n;
    }
  }
  auto min_load = [&]() -> std::optional<int> {
    if (histogram.empty()) return std::nullopt;
    return histogram.begin()->first;
  };
  std::optional<int> current = min_load();
  for (const auto& ev : traj.events) {
    switch (ev.kind) {
      case EventKind::Birth: {
        auto it = histogram.try_emplace(ev.k, 0).first;
        it->second += 1;
        break;
      }
      case EventKind::Death: {
        auto it = histogram.find(ev.k);
        if (it != histogram.end() && --it->second == 0) histogram.erase(it);
        break;
      }
      case EventKind::MigrateLeft:
      case EventKind::MigrateRight:
        break;  // types unchanged
    }
    std::optional<int> now = min_load();
    if (!now) {
      record.extinction_time = ev.time;
      break;
    }
    if (current && *now > *current) {
      record.times.push_back(ev.time);
      record.loads.push_back(*now);
    }
    current = now;
  }
  return record;
}

namespace {

struct WindowStat {
  double occupancy = 0.0;  // mean per-site total over the window
  double load = 0.0;       // mean mutation count per particle (0 when empty)
};

WindowStat window_stat(const Configuration& c, double L, double window) {
  WindowStat s;
  int lo = static_cast<int>(std::ceil(-window * L - 1e-9));
  int hi = static_cast<int>(std::floor(window * L + 1e-9));
  std::int64_t particles = 0;
  std::int64_t load = 0;
  for (int site = lo; site <= hi; ++site) {
    auto it = c.demes.find(site);
    if (it == c.demes.end()) continue;
    for (const auto& [k, n] : it->second.counts) {
      particles += n;
      load += static_cast<std::int64_t>(k) * n;
    }
  }
  s.occupancy =
      static_cast<double>(particles) / static_cast<double>(hi - lo + 1);
  s.load = particles > 0
               ? static_cast<double>(load) / static_cast<double>(particles)
               : 0.0;
  return s;
}

double diff_sigma(const MeanSe& a, const MeanSe& b) {
  double se = std::sqrt(a.se * a.se + b.se * b.se);
  if (se <= 0.0) return std::abs(a.mean - b.mean) > 0.0 ? 1e300 : 0.0;
  return std::abs(a.mean - b.mean) / se;
}

}  // namespace

ConvergenceTable truncation_convergence(
    const Configuration& init, const ModelParams& p,
    const std::vector<std::pair<double, int>>& schedule, double window,
    double T, std::uint64_t replicates, std::uint64_t seed, unsigned threads,
    double sigma_threshold) {
  ConvergenceTable table;
  table.sigma_threshold = sigma_threshold;
  MeanSe prev_occ;
  MeanSe prev_load;
  for (std::size_t level = 0; level < schedule.size(); ++level) {
    TruncationParams t;
    t.lambda = schedule[level].first;
    t.K = schedule[level].second;
    auto stats = run_replicates<WindowStat>(
        replicates, threads, [&](std::uint64_t rep) {
          SimulateOptions opt;
          opt.horizon = T;
          opt.seed = seed + static_cast<std::uint64_t>(level);
          opt.replicate = rep;
          opt.record_events = false;
          Trajectory traj = simulate_eta_n(init, p, t, opt);
          return window_stat(traj.final_config, p.L, window);
        });
    std::vector<double> occ(stats.size());
    std::vector<double> load(stats.size());
    for (std::size_t i = 0; i < stats.size(); ++i) {
      occ[i] = stats[i].occupancy;
      load[i] = stats[i].load;
    }
    MeanSe occ_ms = mean_se(occ);
    MeanSe load_ms = mean_se(load);
    ConvergenceRow row;
    row.lambda = t.lambda;
    row.K = t.K;
    row.occupancy_mean = occ_ms.mean;
    row.occupancy_se = occ_ms.se;
    row.load_mean = load_ms.mean;
    row.load_se = load_ms.se;
    if (level > 0) {
      row.occupancy_diff_sigma = diff_sigma(occ_ms, prev_occ);
      row.load_diff_sigma = diff_sigma(load_ms, prev_load);
    }
    table.rows.push_back(row);
    prev_occ = occ_ms;
    prev_load = load_ms;
  }
  if (table.rows.size() >= 2) {
    const ConvergenceRow& last = table.rows.back();
    table.converged_last_pair = last.occupancy_diff_sigma <= sigma_threshold &&
                                last.load_diff_sigma <= sigma_threshold;
  }
  return table;
}

DifferenceMass difference_mass(const Configuration& a, const Configuration& b) {
  DifferenceMass out;
  std::set<int> sites;
  for (const auto& [site, deme] : a.demes) sites.insert(site);
  for (const auto& [site, deme] : b.demes) sites.insert(site);
  for (int site : sites) {
    std::set<int> ks;
    auto ia = a.demes.find(site);
    auto ib = b.demes.find(site);
    if (ia != a.demes.end()) {
      for (const auto& [k, n] : ia->second.counts) ks.insert(k);
    }
    if (ib != b.demes.end()) {
      for (const auto& [k, n] : ib->second.counts) ks.insert(k);
    }
    bool site_differs = false;
    for (int k : ks) {
      std::int64_t na = ia == a.demes.end() ? 0 : ia->second.at(k);
      std::int64_t nb = ib == b.demes.end() ? 0 : ib->second.at(k);
      if (na != nb) {
        out.delta0 += static_cast<std::uint64_t>(std::abs(na - nb));
        out.delta.emplace_back(site, k);
        site_differs = true;
      }
    }
    if (site_differs) out.delta_sp.push_back(site);
  }
  return out;
}

}  // namespace ratchet
