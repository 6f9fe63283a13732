#include "ratchet/engine.hpp"

#include <algorithm>
#include <cmath>

#include "ratchet/errors.hpp"
#include "ratchet/rates.hpp"
#include "ratchet/rng.hpp"
#include "ratchet/sumtree.hpp"

namespace ratchet {

namespace {

constexpr std::uint64_t kTreeRebuildPeriod = 1u << 16;

/// Active window [-M, M] of site indices.
struct Window {
  int M;
  std::size_t size() const { return static_cast<std::size_t>(2 * M + 1); }
  std::size_t index(int site) const { return static_cast<std::size_t>(site + M); }
  int site(std::size_t idx) const { return static_cast<int>(idx) - M; }
  bool inside(int site) const { return site >= -M && site <= M; }
};

struct Clock {
  double t = 0.0;
  double horizon;
  std::vector<double> snapshot_times;  // sorted
  std::size_t next_snapshot = 0;

  explicit Clock(const SimulateOptions& opt)
      : horizon(opt.horizon), snapshot_times(opt.snapshot_times) {
    std::sort(snapshot_times.begin(), snapshot_times.end());
  }

  template <class Capture>
  void flush_snapshots(double upto, Capture&& capture) {
    while (next_snapshot < snapshot_times.size() &&
           snapshot_times[next_snapshot] < upto) {
      capture(snapshot_times[next_snapshot]);
      ++next_snapshot;
    }
  }
};

/// Sequential channel selection; ties at segment boundaries resolve to the
/// earlier (lower-index) channel. If floating-point residue carries the scan
/// past the last segment, the caller falls back to the last positive channel.
struct ChannelScan {
  double r;
  bool take(double rate) {
    if (rate > 0.0 && r <= rate) return true;
    if (rate > 0.0) r -= rate;
    return false;
  }
};

/// Index in `rates` selected by residual r, falling back to the last
/// positive entry; -1 only if every rate is zero.
int scan_channels(const double* rates, int n, double r) {
  ChannelScan scan{r};
  int last_positive = -1;
  for (int i = 0; i < n; ++i) {
    if (rates[i] > 0.0) last_positive = i;
    if (scan.take(rates[i])) return i;
  }
  return last_positive;
}

int pick_type(const DemeState& u, double r) {
  int last = 0;
  for (const auto& [k, n] : u.counts) {
    if (n <= 0) continue;
    last = k;
    if (r <= static_cast<double>(n)) return k;
    r -= static_cast<double>(n);
  }
  return last;
}

int pick_weighted(const std::map<int, double>& weights, double r) {
  int last = 0;
  for (const auto& [k, w] : weights) {
    if (w <= 0.0) continue;
    last = k;
    if (r <= w) return k;
    r -= w;
  }
  return last;
}

void stamp_header(Trajectory& traj, const Configuration& init,
                  const ModelParams& p, const TruncationParams& t,
                  const SimulateOptions& opt) {
  traj.initial = init;
  traj.params = p;
  traj.trunc = t;
  traj.seed = opt.seed;
  traj.replicate = opt.replicate;
  traj.horizon = opt.horizon;
}

// ---------------------------------------------------------------------------
// eta^n: the truncated multi-type process.

struct EtaDeme {
  DemeState u;
  RateVector rv;
  double mig_left = 0.0;
  double mig_right = 0.0;
  double total() const { return mig_left + mig_right + rv.total; }
};

class EtaEngine {
 public:
  EtaEngine(const Configuration& init, const ModelParams& p,
            const TruncationParams& t, const SimulateOptions& opt)
      : p_(p), t_(t), opt_(opt), w_{t.max_site_index(p.L)},
        rng_(opt.seed, opt.replicate), clock_(opt), tree_(w_.size()),
        demes_(w_.size()) {
    for (const auto& [site, deme] : init.demes) {
      if (w_.inside(site)) {
        demes_[w_.index(site)].u = deme;
      } else {
        exterior_.demes[site] = deme;  // frozen for the whole run
      }
    }
    for (std::size_t i = 0; i < demes_.size(); ++i) refresh(i);
    stamp_header(traj_, init, p, t, opt);
  }

  Trajectory run() {
    std::uint64_t events = 0;
    for (;;) {
      double total = tree_.total();
      if (total <= 0.0) break;
      double dt = rng_.exponential(total);
      if (clock_.t + dt > clock_.horizon) break;
      capture_until(clock_.t + dt);
      clock_.t += dt;
      step(total);
      if (++events > opt_.event_cap) {
        throw HorizonOverflow("eta: event cap exceeded at t=" +
                              std::to_string(clock_.t));
      }
      if (events % kTreeRebuildPeriod == 0) tree_.rebuild();
      if (opt_.paranoid_checks) selfcheck();
    }
    capture_until(clock_.horizon + 1.0);
    traj_.final_config = current_config();
    return std::move(traj_);
  }

 private:
  void refresh(std::size_t idx) {
    EtaDeme& d = demes_[idx];
    d.rv = deme_rate_vector(d.u, p_, t_);
    double half = 0.5 * p_.m * static_cast<double>(d.u.total());
    int site = w_.site(idx);
    d.mig_left = w_.inside(site - 1) ? half : 0.0;
    d.mig_right = w_.inside(site + 1) ? half : 0.0;
    tree_.set(idx, d.total());
  }

  void selfcheck() const {
    for (std::size_t i = 0; i < demes_.size(); ++i) {
      RateVector fresh = deme_rate_vector(demes_[i].u, p_, t_);
      if (fresh.births != demes_[i].rv.births ||
          fresh.deaths != demes_[i].rv.deaths ||
          fresh.total != demes_[i].rv.total) {
        throw InvariantBroken("eta: cached rate vector diverged at site " +
                              std::to_string(w_.site(i)));
      }
    }
  }

  void capture_until(double upto) {
    clock_.flush_snapshots(upto, [&](double ts) {
      traj_.snapshots.emplace_back(ts, current_config());
    });
  }

  Configuration current_config() const {
    Configuration c = exterior_;
    for (std::size_t i = 0; i < demes_.size(); ++i) {
      if (!demes_[i].u.empty()) c.demes[w_.site(i)] = demes_[i].u;
    }
    c.normalize();
    return c;
  }

  void record(EventKind kind, int site, int k, bool mutated) {
    if (!opt_.record_events) return;
    EventRecord ev;
    ev.time = clock_.t;
    ev.site = site;
    ev.kind = kind;
    ev.k = k;
    ev.mutated = mutated;
    ev.post_total = demes_[w_.index(site)].u.total();
    traj_.events.push_back(ev);
  }

  void move(int from, int to, int k) {
    demes_[w_.index(from)].u.add(k, -1);
    demes_[w_.index(to)].u.add(k, +1);
    record(to < from ? EventKind::MigrateLeft : EventKind::MigrateRight, from,
           k, false);
    refresh(w_.index(from));
    refresh(w_.index(to));
  }

  void step(double total) {
    std::size_t idx = tree_.sample(rng_.uniform() * total);
    EtaDeme& d = demes_[idx];
    int site = w_.site(idx);
    ChannelScan scan{rng_.uniform() * d.total()};

    enum class Tag { MigL, MigR, Birth, Death, None };
    Tag hit = Tag::None;
    Tag last = Tag::None;
    int hit_k = 0;
    int last_k = 0;
    auto consider = [&](Tag tag, int k, double rate) {
      if (hit != Tag::None || rate <= 0.0) return;
      last = tag;
      last_k = k;
      if (scan.take(rate)) {
        hit = tag;
        hit_k = k;
      }
    };
    consider(Tag::MigL, 0, d.mig_left);
    consider(Tag::MigR, 0, d.mig_right);
    for (const auto& [k, rate] : d.rv.births) consider(Tag::Birth, k, rate);
    for (const auto& [k, rate] : d.rv.deaths) consider(Tag::Death, k, rate);
    if (hit == Tag::None) {
      hit = last;
      hit_k = last_k;
    }
    switch (hit) {
      case Tag::MigL:
      case Tag::MigR: {
        int k =
            pick_type(d.u, rng_.uniform() * static_cast<double>(d.u.total()));
        move(site, hit == Tag::MigL ? site - 1 : site + 1, k);
        return;
      }
      case Tag::Birth: {
        int k = hit_k;
        // Channel k draws from non-mutated type-k parents and mutated
        // type-(k-1) parents; attribute the birth accordingly.
        double mut_mass = k >= 1 ? p_.fitness.at(k - 1) * p_.mu *
                                       static_cast<double>(d.u.at(k - 1))
                                 : 0.0;
        double nomut_mass =
            p_.fitness.at(k) * (1.0 - p_.mu) * static_cast<double>(d.u.at(k));
        bool mutated =
            mut_mass > 0.0 &&
            (nomut_mass == 0.0 ||
             rng_.uniform() * (mut_mass + nomut_mass) <= mut_mass);
        d.u.add(k, +1);
        record(EventKind::Birth, site, k, mutated);
        refresh(idx);
        return;
      }
      case Tag::Death:
        d.u.add(hit_k, -1);
        record(EventKind::Death, site, hit_k, false);
        refresh(idx);
        return;
      case Tag::None:
        refresh(idx);  // stale leaf; resync and skip
        return;
    }
  }

  ModelParams p_;
  TruncationParams t_;
  SimulateOptions opt_;
  Window w_;
  RngStream rng_;
  Clock clock_;
  SumTree tree_;
  std::vector<EtaDeme> demes_;
  Configuration exterior_;
  Trajectory traj_;
};

// ---------------------------------------------------------------------------
// zeta^n and zeta^{n,kappa}: mutation-free counts.

class ZetaEngine {
 public:
  ZetaEngine(const std::map<int, std::int64_t>& init_counts,
             const ModelParams& p, const TruncationParams& t,
             const SimulateOptions& opt)
      : p_(p), t_(t), opt_(opt), w_{t.max_site_index(p.L)},
        rng_(opt.seed, opt.replicate), clock_(opt), tree_(w_.size()),
        count_(w_.size(), 0) {
    Configuration init;
    for (const auto& [site, n] : init_counts) {
      if (!w_.inside(site) || n <= 0) continue;
      count_[w_.index(site)] = n;
      init.add(site, 0, n);
    }
    for (std::size_t i = 0; i < count_.size(); ++i) refresh(i);
    stamp_header(traj_, init, p, t, opt);
    traj_.mutation_free = true;
  }

  Trajectory run() {
    std::uint64_t events = 0;
    for (;;) {
      double total = tree_.total();
      if (total <= 0.0) break;
      double dt = rng_.exponential(total);
      if (clock_.t + dt > clock_.horizon) break;
      capture_until(clock_.t + dt);
      clock_.t += dt;
      step(total);
      if (++events > opt_.event_cap) {
        throw HorizonOverflow("zeta: event cap exceeded at t=" +
                              std::to_string(clock_.t));
      }
      if (events % kTreeRebuildPeriod == 0) tree_.rebuild();
      if (opt_.paranoid_checks) selfcheck();
    }
    capture_until(clock_.horizon + 1.0);
    traj_.final_config = current_config();
    return std::move(traj_);
  }

 private:
  double birth_total(std::int64_t c) const {
    if (c <= 0) return 0.0;
    if (t_.kappa && c > p_.N * *t_.kappa) return 0.0;
    return static_cast<double>(c) *
           q_scaled(p_.q_plus, p_.N, static_cast<double>(c));
  }

  double death_total(std::int64_t c) const {
    if (c <= 0) return 0.0;
    return static_cast<double>(c) *
           q_scaled(p_.q_minus, p_.N, static_cast<double>(c));
  }

  double deme_total(std::size_t idx) const {
    std::int64_t c = count_[idx];
    if (c <= 0) return 0.0;
    int site = w_.site(idx);
    double half = 0.5 * p_.m * static_cast<double>(c);
    double mig = (w_.inside(site - 1) ? half : 0.0) +
                 (w_.inside(site + 1) ? half : 0.0);
    return mig + birth_total(c) + death_total(c);
  }

  void refresh(std::size_t idx) { tree_.set(idx, deme_total(idx)); }

  void selfcheck() const {
    for (std::size_t i = 0; i < count_.size(); ++i) {
      if (tree_.leaf(i) != deme_total(i)) {
        throw InvariantBroken("zeta: cached deme rate diverged");
      }
    }
  }

  void capture_until(double upto) {
    clock_.flush_snapshots(upto, [&](double ts) {
      traj_.snapshots.emplace_back(ts, current_config());
    });
  }

  Configuration current_config() const {
    Configuration c;
    for (std::size_t i = 0; i < count_.size(); ++i) {
      if (count_[i] > 0) c.add(w_.site(i), 0, count_[i]);
    }
    return c;
  }

  void record(EventKind kind, int site) {
    if (!opt_.record_events) return;
    EventRecord ev;
    ev.time = clock_.t;
    ev.site = site;
    ev.kind = kind;
    ev.k = 0;
    ev.post_total = count_[w_.index(site)];
    traj_.events.push_back(ev);
  }

  void step(double total) {
    std::size_t idx = tree_.sample(rng_.uniform() * total);
    int site = w_.site(idx);
    std::int64_t c = count_[idx];
    double half = 0.5 * p_.m * static_cast<double>(c);
    double rates[4] = {w_.inside(site - 1) ? half : 0.0,
                       w_.inside(site + 1) ? half : 0.0, birth_total(c),
                       death_total(c)};
    int chan = scan_channels(rates, 4, rng_.uniform() * deme_total(idx));
    switch (chan) {
      case 0:
        count_[idx] -= 1;
        count_[idx - 1] += 1;
        record(EventKind::MigrateLeft, site);
        refresh(idx);
        refresh(idx - 1);
        return;
      case 1:
        count_[idx] -= 1;
        count_[idx + 1] += 1;
        record(EventKind::MigrateRight, site);
        refresh(idx);
        refresh(idx + 1);
        return;
      case 2:
        count_[idx] += 1;
        record(EventKind::Birth, site);
        refresh(idx);
        return;
      case 3:
        count_[idx] -= 1;
        record(EventKind::Death, site);
        refresh(idx);
        return;
      default:
        refresh(idx);  // stale leaf; resync and skip
        return;
    }
  }

  ModelParams p_;
  TruncationParams t_;
  SimulateOptions opt_;
  Window w_;
  RngStream rng_;
  Clock clock_;
  SumTree tree_;
  std::vector<std::int64_t> count_;
  Trajectory traj_;
};

// ---------------------------------------------------------------------------
// Domination pair: one stream drives eta^n and its mutation-free majorant.

struct PairDeme {
  DemeState u;             // eta histogram; h = u.total()
  std::int64_t c = 0;      // zeta count, c >= h at all times
  RateVector rv;           // eta reaction rates
  double eta_birth = 0.0;  // sum of rv.births
  double eta_death = 0.0;  // sum of rv.deaths
  double zeta_birth = 0.0;
  double zeta_death = 0.0;
  double mig_pair = 0.0;   // per allowed direction
  double mig_solo = 0.0;
  int dirs = 2;

  double total() const {
    double joint_b = std::min(eta_birth, zeta_birth);
    double joint_d = std::min(eta_death, zeta_death);
    return dirs * (mig_pair + mig_solo) + joint_b +
           (eta_birth - joint_b) + (zeta_birth - joint_b) + joint_d +
           (eta_death - joint_d) + (zeta_death - joint_d);
  }
};

class PairEngine {
 public:
  PairEngine(const Configuration& init, const ModelParams& p,
             const TruncationParams& t, const SimulateOptions& opt)
      : p_(p), t_(t), opt_(opt), w_{t.max_site_index(p.L)},
        rng_(opt.seed, opt.replicate), clock_(opt), tree_(w_.size()),
        demes_(w_.size()) {
    if (!p.q_minus.non_decreasing_from(0.0)) {
      throw NonMonotoneDeath(
          "domination pair requires q_- non-decreasing on [0, inf)");
    }
    Configuration zeta_init;
    for (const auto& [site, deme] : init.demes) {
      if (w_.inside(site)) {
        PairDeme& d = demes_[w_.index(site)];
        d.u = deme;
        d.c = deme.total();
        zeta_init.add(site, 0, d.c);
      } else {
        exterior_.demes[site] = deme;
      }
    }
    for (std::size_t i = 0; i < demes_.size(); ++i) refresh(i);
    stamp_header(eta_, init, p, t, opt);
    stamp_header(zeta_, zeta_init, p, t, opt);
    zeta_.mutation_free = true;
  }

  DominationPair run() {
    std::uint64_t events = 0;
    for (;;) {
      double total = tree_.total();
      if (total <= 0.0) break;
      double dt = rng_.exponential(total);
      if (clock_.t + dt > clock_.horizon) break;
      capture_until(clock_.t + dt);
      clock_.t += dt;
      step(total);
      if (++events > opt_.event_cap) {
        throw HorizonOverflow("pair: event cap exceeded at t=" +
                              std::to_string(clock_.t));
      }
      if (events % kTreeRebuildPeriod == 0) tree_.rebuild();
    }
    capture_until(clock_.horizon + 1.0);
    eta_.final_config = eta_config();
    zeta_.final_config = zeta_config();
    DominationPair out;
    out.eta = std::move(eta_);
    out.zeta = std::move(zeta_);
    out.events = events;
    return out;
  }

 private:
  void refresh(std::size_t idx) {
    PairDeme& d = demes_[idx];
    d.rv = deme_rate_vector(d.u, p_, t_);
    d.eta_birth = 0.0;
    d.eta_death = 0.0;
    for (const auto& [k, r] : d.rv.births) d.eta_birth += r;
    for (const auto& [k, r] : d.rv.deaths) d.eta_death += r;
    std::int64_t h = d.u.total();
    d.zeta_birth = d.c > 0 ? static_cast<double>(d.c) *
                                 q_scaled(p_.q_plus, p_.N,
                                          static_cast<double>(d.c))
                           : 0.0;
    d.zeta_death = d.c > 0 ? static_cast<double>(d.c) *
                                 q_scaled(p_.q_minus, p_.N,
                                          static_cast<double>(d.c))
                           : 0.0;
    d.mig_pair = 0.5 * p_.m * static_cast<double>(h);
    d.mig_solo = 0.5 * p_.m * static_cast<double>(d.c - h);
    int site = w_.site(idx);
    d.dirs = (w_.inside(site - 1) ? 1 : 0) + (w_.inside(site + 1) ? 1 : 0);
    tree_.set(idx, d.total());
  }

  void assert_dominates(std::size_t idx) const {
    const PairDeme& d = demes_[idx];
    if (d.c < d.u.total()) {
      throw DominationBroken("zeta(" + std::to_string(w_.site(idx)) +
                             ") fell below ||eta|| at t=" +
                             std::to_string(clock_.t));
    }
  }

  Configuration eta_config() const {
    Configuration c = exterior_;
    for (std::size_t i = 0; i < demes_.size(); ++i) {
      if (!demes_[i].u.empty()) c.demes[w_.site(i)] = demes_[i].u;
    }
    c.normalize();
    return c;
  }

  Configuration zeta_config() const {
    Configuration c;
    for (std::size_t i = 0; i < demes_.size(); ++i) {
      if (demes_[i].c > 0) c.add(w_.site(i), 0, demes_[i].c);
    }
    return c;
  }

  void capture_until(double upto) {
    clock_.flush_snapshots(upto, [&](double ts) {
      eta_.snapshots.emplace_back(ts, eta_config());
      zeta_.snapshots.emplace_back(ts, zeta_config());
    });
  }

  void record_eta(EventKind kind, int site, int k, bool mutated) {
    if (!opt_.record_events) return;
    EventRecord ev;
    ev.time = clock_.t;
    ev.site = site;
    ev.kind = kind;
    ev.k = k;
    ev.mutated = mutated;
    ev.post_total = demes_[w_.index(site)].u.total();
    eta_.events.push_back(ev);
  }

  void record_zeta(EventKind kind, int site) {
    if (!opt_.record_events) return;
    EventRecord ev;
    ev.time = clock_.t;
    ev.site = site;
    ev.kind = kind;
    ev.k = 0;
    ev.post_total = demes_[w_.index(site)].c;
    zeta_.events.push_back(ev);
  }

  bool pick_birth_type(const PairDeme& d, int& k, bool& mutated) {
    if (d.eta_birth <= 0.0) return false;
    k = pick_weighted(d.rv.births, rng_.uniform() * d.eta_birth);
    double mut_mass = k >= 1 ? p_.fitness.at(k - 1) * p_.mu *
                                   static_cast<double>(d.u.at(k - 1))
                             : 0.0;
    double nomut_mass =
        p_.fitness.at(k) * (1.0 - p_.mu) * static_cast<double>(d.u.at(k));
    mutated = mut_mass > 0.0 &&
              (nomut_mass == 0.0 ||
               rng_.uniform() * (mut_mass + nomut_mass) <= mut_mass);
    return true;
  }

  void step(double total) {
    std::size_t idx = tree_.sample(rng_.uniform() * total);
    PairDeme& d = demes_[idx];
    int site = w_.site(idx);
    double joint_b = std::min(d.eta_birth, d.zeta_birth);
    double joint_d = std::min(d.eta_death, d.zeta_death);
    bool left_ok = w_.inside(site - 1);
    bool right_ok = w_.inside(site + 1);

    // Channel order: pair migration, solo migration, then the maximally
    // correlated birth and death split. Joint channels vanish exactly when
    // the surplus channels could endanger the ordering, so zeta >= ||eta||
    // is preserved pathwise.
    double rates[10] = {left_ok ? d.mig_pair : 0.0,
                        right_ok ? d.mig_pair : 0.0,
                        left_ok ? d.mig_solo : 0.0,
                        right_ok ? d.mig_solo : 0.0,
                        joint_b,
                        d.eta_birth - joint_b,
                        d.zeta_birth - joint_b,
                        joint_d,
                        d.eta_death - joint_d,
                        d.zeta_death - joint_d};
    int chan = scan_channels(rates, 10, rng_.uniform() * d.total());

    auto migrate = [&](int dz, bool pair) {
      int to = site + dz;
      PairDeme& dst = demes_[w_.index(to)];
      if (pair) {
        int k = pick_type(d.u, rng_.uniform() * static_cast<double>(d.u.total()));
        d.u.add(k, -1);
        dst.u.add(k, +1);
        d.c -= 1;
        dst.c += 1;
        record_eta(dz < 0 ? EventKind::MigrateLeft : EventKind::MigrateRight,
                   site, k, false);
        record_zeta(dz < 0 ? EventKind::MigrateLeft : EventKind::MigrateRight,
                    site);
      } else {
        d.c -= 1;
        dst.c += 1;
        record_zeta(dz < 0 ? EventKind::MigrateLeft : EventKind::MigrateRight,
                    site);
      }
      refresh(idx);
      refresh(w_.index(to));
      assert_dominates(idx);
      assert_dominates(w_.index(to));
    };

    switch (chan) {
      case 0: return migrate(-1, true);
      case 1: return migrate(+1, true);
      case 2: return migrate(-1, false);
      case 3: return migrate(+1, false);
      case 4: {  // paired birth
        int k = 0;
        bool mutated = false;
        pick_birth_type(d, k, mutated);
        d.u.add(k, +1);
        d.c += 1;
        record_eta(EventKind::Birth, site, k, mutated);
        record_zeta(EventKind::Birth, site);
        break;
      }
      case 5: {  // eta-only birth (possible only when zeta has surplus)
        int k = 0;
        bool mutated = false;
        pick_birth_type(d, k, mutated);
        d.u.add(k, +1);
        record_eta(EventKind::Birth, site, k, mutated);
        break;
      }
      case 6:  // surplus zeta birth
        d.c += 1;
        record_zeta(EventKind::Birth, site);
        break;
      case 7: {  // paired death
        int k = pick_weighted(d.rv.deaths, rng_.uniform() * d.eta_death);
        d.u.add(k, -1);
        d.c -= 1;
        record_eta(EventKind::Death, site, k, false);
        record_zeta(EventKind::Death, site);
        break;
      }
      case 8: {  // eta-only death
        int k = pick_weighted(d.rv.deaths, rng_.uniform() * d.eta_death);
        d.u.add(k, -1);
        record_eta(EventKind::Death, site, k, false);
        break;
      }
      case 9:  // surplus zeta death
        d.c -= 1;
        record_zeta(EventKind::Death, site);
        break;
      default:
        break;  // stale leaf; resync below
    }
    refresh(idx);
    assert_dominates(idx);
  }

  ModelParams p_;
  TruncationParams t_;
  SimulateOptions opt_;
  Window w_;
  RngStream rng_;
  Clock clock_;
  SumTree tree_;
  std::vector<PairDeme> demes_;
  Configuration exterior_;
  Trajectory eta_;
  Trajectory zeta_;
};

}  // namespace

Trajectory simulate_eta_n(const Configuration& init, const ModelParams& p,
                          const TruncationParams& t,
                          const SimulateOptions& opt) {
  return EtaEngine(init, p, t, opt).run();
}

std::map<int, std::int64_t> zeta_init_from(const Configuration& c,
                                           const ModelParams& p,
                                           const TruncationParams& t) {
  std::map<int, std::int64_t> counts;
  int M = t.max_site_index(p.L);
  for (const auto& [site, deme] : c.demes) {
    if (site >= -M && site <= M && !deme.empty()) counts[site] = deme.total();
  }
  return counts;
}

Trajectory simulate_zeta(const std::map<int, std::int64_t>& init_counts,
                         const ModelParams& p, const TruncationParams& t,
                         const SimulateOptions& opt) {
  return ZetaEngine(init_counts, p, t, opt).run();
}

DominationPair simulate_domination_pair(const Configuration& init,
                                        const ModelParams& p,
                                        const TruncationParams& t,
                                        const SimulateOptions& opt) {
  return PairEngine(init, p, t, opt).run();
}

}  // namespace ratchet
