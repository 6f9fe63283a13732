#include "ratchet/infection.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include "ratchet/errors.hpp"
#include "ratchet/rng.hpp"
#include "ratchet/sumtree.hpp"

namespace ratchet {

std::string UlamHarris::to_string() const {
  std::string out = std::to_string(root);
  for (std::uint32_t v : path) {
    out += out.size() == std::to_string(root).size() && path.size() ? "/" : ".";
    out += std::to_string(v);
  }
  return out;
}

std::int64_t CouplingState::class0_count(int site) const {
  auto it = susceptible.find(site);
  return it == susceptible.end() ? 0 : it->second.total();
}

std::int64_t CouplingState::class_count(int site, CouplingClass c) const {
  std::int64_t n = 0;
  for (const auto& [id, part] : tracked) {
    if (part.site == site && part.cls == c) ++n;
  }
  return n;
}

std::int64_t CouplingState::marginal_count(int site, int i) const {
  CouplingClass inf = i == 1 ? CouplingClass::Infected1 : CouplingClass::Infected2;
  CouplingClass par = i == 1 ? CouplingClass::Partial1 : CouplingClass::Partial2;
  return class0_count(site) + class_count(site, inf) + class_count(site, par);
}

Configuration CouplingState::marginal(int i) const {
  Configuration c;
  for (const auto& [site, deme] : susceptible) {
    for (const auto& [k, n] : deme.counts) c.add(site, k, n);
  }
  for (const auto& [id, part] : tracked) {
    if (side_of(part.cls) == i) c.add(part.site, part.k, 1);
  }
  c.normalize();
  return c;
}

Configuration CouplingState::class_histogram(CouplingClass cls) const {
  Configuration c;
  for (const auto& [id, part] : tracked) {
    if (part.cls == cls) c.add(part.site, part.k, 1);
  }
  c.normalize();
  return c;
}

CouplingState init_coupling(const Configuration& a, const Configuration& b) {
  CouplingState st;
  std::uint64_t next_root = 1;
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
    for (int k : ks) {
      std::int64_t na = ia == a.demes.end() ? 0 : ia->second.at(k);
      std::int64_t nb = ib == b.demes.end() ? 0 : ib->second.at(k);
      std::int64_t shared = std::min(na, nb);
      if (shared > 0) st.susceptible[site].add(k, shared);
      CouplingClass cls =
          na > nb ? CouplingClass::Infected1 : CouplingClass::Infected2;
      for (std::int64_t j = 0; j < std::abs(na - nb); ++j) {
        TrackedParticle part;
        part.cls = cls;
        part.site = site;
        part.k = k;
        part.label.root = next_root++;
        st.tracked.emplace(st.next_id++, part);
      }
    }
  }
  return st;
}

double ChannelRates::total(int directions) const {
  double t = directions * (mig0 + mig1 + mig2 + migp);
  t += birth0 + birth1 + birth2;
  t += die0 + die1 + die2 + die_pair;
  for (int i1 = 0; i1 < 2; ++i1) {
    for (int i2 = 0; i2 < 2; ++i2) {
      t += induce[i1][i2] + transmit[i1][i2] + partial[i1][i2];
    }
  }
  return t;
}

namespace {

double positive_part(double v) { return v > 0.0 ? v : 0.0; }

/// Aggregate per-deme quantities feeding the rate formulas.
struct DemeAggregates {
  std::int64_t n0 = 0;  // class 0
  std::int64_t n1 = 0;  // class 1
  std::int64_t n2 = 0;  // class 2
  std::int64_t np = 0;  // dual pairs (= #1* = #2*)
  double s0w = 0.0;     // sum_{k<=K} s_k * class0_k
  double w1 = 0.0;      // sum over {1,1*} particles of 1{k<=K} s_k
  double w2 = 0.0;      // same for {2,2*}
};

ChannelRates rates_from(const DemeAggregates& g, const ModelParams& p) {
  ChannelRates r;
  double half = 0.5 * p.m;
  r.mig0 = half * static_cast<double>(g.n0);
  r.mig1 = half * static_cast<double>(g.n1);
  r.mig2 = half * static_cast<double>(g.n2);
  r.migp = half * static_cast<double>(g.np);

  std::int64_t marg[2] = {g.n0 + g.n1 + g.np, g.n0 + g.n2 + g.np};
  double qp[2];
  double qm[2];
  for (int i = 0; i < 2; ++i) {
    qp[i] = q_scaled(p.q_plus, p.N, static_cast<double>(marg[i]));
    qm[i] = q_scaled(p.q_minus, p.N, static_cast<double>(marg[i]));
  }
  bool A[2] = {g.n1 > g.n2, g.n2 > g.n1};  // strict majority indicators
  std::int64_t ninf[2] = {g.n1, g.n2};

  r.birth0 = g.s0w * std::min(qp[0], qp[1]);
  r.birth1 = g.w1 * qp[0];
  r.birth2 = g.w2 * qp[1];
  r.die0 = static_cast<double>(g.n0) * std::min(qm[0], qm[1]);
  r.die1 = static_cast<double>(g.n1) * qm[0];
  r.die2 = static_cast<double>(g.n2) * qm[1];
  r.die_pair = static_cast<double>(g.np) * std::min(qm[0], qm[1]);

  for (int i1 = 0; i1 < 2; ++i1) {
    if (!A[i1] || ninf[i1] == 0) continue;
    for (int i2 = 0; i2 < 2; ++i2) {
      double dqp = positive_part(qp[i2] - qp[1 - i2]);
      double dqm = positive_part(qm[i2] - qm[1 - i2]);
      r.induce[i1][i2] = g.s0w * dqp;
      r.transmit[i1][i2] = static_cast<double>(g.n0) * dqm;
      r.partial[i1][i2] = static_cast<double>(g.np) * dqm;
    }
  }
  return r;
}

DemeAggregates aggregates_of(const CouplingState& st, int site,
                             const ModelParams& p, const TruncationParams& t) {
  DemeAggregates g;
  auto it = st.susceptible.find(site);
  if (it != st.susceptible.end()) {
    g.n0 = it->second.total();
    for (const auto& [k, n] : it->second.counts) {
      if (k <= t.K) g.s0w += p.fitness.at(k) * static_cast<double>(n);
    }
  }
  std::int64_t np1 = 0;
  std::int64_t np2 = 0;
  for (const auto& [id, part] : st.tracked) {
    if (part.site != site) continue;
    double s = part.k <= t.K ? p.fitness.at(part.k) : 0.0;
    switch (part.cls) {
      case CouplingClass::Infected1:
        ++g.n1;
        g.w1 += s;
        break;
      case CouplingClass::Infected2:
        ++g.n2;
        g.w2 += s;
        break;
      case CouplingClass::Partial1:
        ++np1;
        g.w1 += s;
        break;
      case CouplingClass::Partial2:
        ++np2;
        g.w2 += s;
        break;
    }
  }
  if (np1 != np2) {
    throw InvariantBroken("dual balance violated at site " +
                          std::to_string(site));
  }
  g.np = np1;
  return g;
}

}  // namespace

DemeChannelReport coupling_rates(const CouplingState& state, int site,
                                 const ModelParams& p,
                                 const TruncationParams& t, double eps) {
  DemeChannelReport report;
  DemeAggregates g = aggregates_of(state, site, p, t);
  report.rates = rates_from(g, p);
  report.marginal[0] = g.n0 + g.n1 + g.np;
  report.marginal[1] = g.n0 + g.n2 + g.np;
  report.U_eps = compute_U_eps(p, eps);
  for (int i = 0; i < 2; ++i) {
    report.high_density[i] =
        static_cast<double>(report.marginal[i]) >=
        static_cast<double>(p.N) * report.U_eps;
  }
  return report;
}

namespace {

std::vector<double> poly_sub(const std::vector<double>& a,
                             const std::vector<double>& b) {
  std::vector<double> out(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] -= b[i];
  return out;
}

std::vector<double> poly_scale(const std::vector<double>& a, double c) {
  std::vector<double> out = a;
  for (double& v : out) v *= c;
  return out;
}

/// Coefficients of u * p'(u).
std::vector<double> poly_u_times_derivative(const Polynomial& p) {
  Polynomial d = p.derivative();
  std::vector<double> out(d.coeffs().size() + 1, 0.0);
  for (std::size_t i = 0; i < d.coeffs().size(); ++i) out[i + 1] = d.coeffs()[i];
  return out;
}

bool non_negative_beyond(const Polynomial& p, double lo) {
  if (p.is_zero()) return true;
  if (p.leading_coefficient() < 0.0) return false;
  return p.non_negative_on(lo, std::max(p.root_bound(), lo + 1.0), 1024);
}

bool dominated_on_prefix(const Polynomial& p, double U) {
  if (p.is_zero()) return true;
  double cap = p(U) * (1.0 + 1e-12) + 1e-12;
  constexpr int kGrid = 1024;
  for (int i = 0; i <= kGrid; ++i) {
    double u = U * static_cast<double>(i) / kGrid;
    if (p(u) > cap) return false;
  }
  return true;
}

}  // namespace

double compute_U_eps(const ModelParams& p, double eps, double step) {
  if (!(p.q_plus.degree() >= 0) || p.q_plus.degree() >= p.q_minus.degree()) {
    throw NoSuchU("compute_U_eps requires 0 <= deg q_+ < deg q_-");
  }
  Polynomial qp = p.q_plus;
  Polynomial qm = p.q_minus;
  Polynomial qpd = qp.derivative();
  Polynomial qmd = qm.derivative();
  Polynomial qpdd = qpd.derivative();
  // Condition (iii) as a polynomial: eps*q_-(u) - q_+(u) - u q_+'(u) >= 0.
  std::vector<double> g = poly_scale(qm.coeffs(), eps);
  g = poly_sub(g, qp.coeffs());
  g = poly_sub(g, poly_u_times_derivative(qp));
  Polynomial gap(std::move(g));

  double cap = 10.0 / eps + 10.0;
  cap = std::max(cap, 2.0 * qp.root_bound());
  cap = std::max(cap, 2.0 * qm.root_bound());
  cap = std::max(cap, 2.0 * gap.root_bound());
  if (!qpd.is_zero()) cap = std::max(cap, 2.0 * qpd.root_bound());
  if (!qmd.is_zero()) cap = std::max(cap, 2.0 * qmd.root_bound());
  if (!qpdd.is_zero()) cap = std::max(cap, 2.0 * qpdd.root_bound());

  long j0 = static_cast<long>(std::floor(1.0 / step)) + 1;
  for (long j = j0; step * static_cast<double>(j) <= cap + step; ++j) {
    double U = step * static_cast<double>(j);
    if (U <= 1.0) continue;
    bool ok = non_negative_beyond(qp, U) && non_negative_beyond(qm, U) &&
              non_negative_beyond(qpd, U) && non_negative_beyond(qmd, U) &&
              non_negative_beyond(qpdd, U) && non_negative_beyond(gap, U) &&
              dominated_on_prefix(qp, U) && dominated_on_prefix(qpd, U) &&
              dominated_on_prefix(qm, U);
    if (ok) return U;
  }
  throw NoSuchU("no admissible density threshold found below " +
                std::to_string(cap));
}

GuardReport high_density_guard_check(const CouplingState& state, int site,
                                     const ModelParams& p,
                                     const TruncationParams& t, double eps,
                                     bool enforce) {
  DemeChannelReport rep = coupling_rates(state, site, p, t, eps);
  GuardReport guard;
  guard.applicable = rep.high_density[0] || rep.high_density[1];
  if (!guard.applicable) return guard;

  const ChannelRates& r = rep.rates;
  guard.cross_rates_zero = r.transmit[0][1] == 0.0 && r.transmit[1][0] == 0.0 &&
                           r.partial[0][1] == 0.0 && r.partial[1][0] == 0.0 &&
                           r.induce[0][1] == 0.0 && r.induce[1][0] == 0.0;
  guard.ok = guard.cross_rates_zero;

  DemeAggregates g = aggregates_of(state, site, p, t);
  std::int64_t ninf[2] = {g.n1, g.n2};
  double qm_min = 0.0;
  {
    double qm1 = q_scaled(p.q_minus, p.N, static_cast<double>(rep.marginal[0]));
    double qm2 = q_scaled(p.q_minus, p.N, static_cast<double>(rep.marginal[1]));
    qm_min = std::min(qm1, qm2);
  }
  for (int i = 0; i < 2; ++i) {
    if (!rep.high_density[i]) continue;
    double qp_i = q_scaled(p.q_plus, p.N, static_cast<double>(rep.marginal[i]));
    double qm_i = q_scaled(p.q_minus, p.N, static_cast<double>(rep.marginal[i]));
    double b_inf = qp_i;  // worst case over k: s_k <= s_0 = 1
    double per = ninf[i] > 0 ? 1.0 / static_cast<double>(ninf[i]) : 0.0;
    double b_induce = r.induce[i][i] * per;
    double d_transmit = r.transmit[i][i] * per;
    double d_partial =
        g.np > 0 ? r.partial[i][i] / static_cast<double>(g.np)
                 : positive_part(qm_i - qm_min) * ((ninf[i] > ninf[1 - i]) ? 1 : 0);
    double denom1 = b_inf + b_induce + qm_i + d_transmit;
    double denom2 = b_inf + qm_min + d_partial;
    double ratio1 = denom1 > 0.0 ? (b_inf + b_induce) / denom1 : 0.0;
    double ratio2 = denom2 > 0.0 ? b_inf / denom2 : 0.0;
    guard.ratio_generation = std::max(guard.ratio_generation, ratio1);
    guard.ratio_birth_only = std::max(guard.ratio_birth_only, ratio2);
  }
  if (guard.ratio_generation > eps || guard.ratio_birth_only > eps) {
    guard.ok = false;
  }
  if (enforce && !guard.ok) {
    throw GuardViolation("high-density guard failed at site " +
                         std::to_string(site));
  }
  return guard;
}

// ---------------------------------------------------------------------------
// The coupled event engine.

namespace {

constexpr std::uint64_t kTreeRebuildPeriod = 1u << 16;

struct Particle {
  CouplingClass cls = CouplingClass::Infected1;
  int site = 0;
  int k = 0;
  std::uint64_t dual_id = 0;
  UlamHarris label;
  std::uint64_t jumps = 0;
  std::uint32_t children = 0;
  std::uint32_t pos = 0;  // index within its deme list
};

class CouplingSim {
 public:
  CouplingSim(const CouplingState& st, const ModelParams& p,
              const TruncationParams& t, const CouplingOptions& opt)
      : p_(p), t_(t), opt_(opt), M_(t.max_site_index(p.L)),
        rng_(opt.seed, opt.replicate),
        hit_sites_(static_cast<int>(std::floor(opt.hit_radius * p.L + 1e-9))),
        demes_(static_cast<std::size_t>(2 * M_ + 1)),
        tree_(static_cast<std::size_t>(2 * M_ + 1)) {
    snapshot_times_ = opt.snapshot_times;
    std::sort(snapshot_times_.begin(), snapshot_times_.end());

    for (const auto& [site, deme] : st.susceptible) {
      if (inside(site)) {
        demes_[idx(site)].s0 = deme;
      } else {
        exterior_s0_[site] = deme;  // frozen, shared by both marginals
      }
    }
    next_id_ = st.next_id;
    for (const auto& [id, part] : st.tracked) {
      Particle q;
      q.cls = part.cls;
      q.site = part.site;
      q.k = part.k;
      q.dual_id = part.dual_id;
      q.label = part.label;
      q.jumps = part.jumps;
      q.children = part.children;
      particles_.emplace(id, q);
      next_id_ = std::max(next_id_, id + 1);
      diff_apply(part.site, part.k, side_of(part.cls), +1);
      if (inside(part.site)) {
        list_add(demes_[idx(part.site)], id);
      } else {
        frozen_tracked_.push_back(id);
      }
    }
    for (std::size_t i = 0; i < demes_.size(); ++i) refresh(i);
    if (opt_.guard_checks) u_eps_ = compute_U_eps(p_, opt_.eps);
    check_invariants_everywhere();
  }

  CouplingResult run() {
    for (;;) {
      double total = tree_.total();
      if (total <= 0.0) break;
      double dt = rng_.exponential(total);
      if (clock_ + dt > opt_.horizon) break;
      capture_until(clock_ + dt);
      clock_ += dt;
      step(total);
      if (++spread_.events > opt_.event_cap) {
        throw HorizonOverflow("coupling: event cap exceeded at t=" +
                              std::to_string(clock_));
      }
      if (spread_.events % kTreeRebuildPeriod == 0) tree_.rebuild();
    }
    capture_until(opt_.horizon + 1.0);
    clock_ = opt_.horizon;
    check_invariants_everywhere();
    CouplingResult out;
    out.spread = spread_;
    out.spread.final_diff_mass = diff_mass();
    out.snapshots = std::move(snapshots_);
    out.events = std::move(events_);
    out.final_marginal1 = marginal(1);
    out.final_marginal2 = marginal(2);
    out.guard_checks_done = guard_checks_done_;
    return out;
  }

  /// Exactly one event; false when the total rate is zero.
  bool single_step() {
    double total = tree_.total();
    if (total <= 0.0) return false;
    clock_ += rng_.exponential(total);
    step(total);
    return true;
  }

  CouplingState export_state() const {
    CouplingState st;
    st.susceptible = exterior_s0_;
    for (std::size_t i = 0; i < demes_.size(); ++i) {
      if (!demes_[i].s0.empty()) st.susceptible[site_of(i)] = demes_[i].s0;
    }
    for (const auto& [id, q] : particles_) {
      TrackedParticle part;
      part.cls = q.cls;
      part.site = q.site;
      part.k = q.k;
      part.dual_id = q.dual_id;
      part.label = q.label;
      part.jumps = q.jumps;
      part.children = q.children;
      st.tracked.emplace(id, part);
    }
    st.next_id = next_id_;
    return st;
  }

  double clock() const { return clock_; }

 private:
  struct Deme {
    DemeState s0;
    std::vector<std::uint64_t> list[4];  // indexed by CouplingClass
    ChannelRates rates;
    int dirs = 2;
  };

  bool inside(int site) const { return site >= -M_ && site <= M_; }
  std::size_t idx(int site) const { return static_cast<std::size_t>(site + M_); }
  int site_of(std::size_t i) const { return static_cast<int>(i) - M_; }

  Particle& pt(std::uint64_t id) {
    auto it = particles_.find(id);
    if (it == particles_.end()) {
      throw InvariantBroken("dangling particle id " + std::to_string(id));
    }
    return it->second;
  }

  void list_add(Deme& d, std::uint64_t id) {
    Particle& q = particles_.at(id);
    auto& lst = d.list[static_cast<int>(q.cls)];
    q.pos = static_cast<std::uint32_t>(lst.size());
    lst.push_back(id);
  }

  void list_remove(Deme& d, std::uint64_t id) {
    Particle& q = particles_.at(id);
    auto& lst = d.list[static_cast<int>(q.cls)];
    std::uint32_t pos = q.pos;
    lst[pos] = lst.back();
    particles_.at(lst[pos]).pos = pos;
    lst.pop_back();
  }

  void diff_apply(int site, int k, int side, int delta) {
    auto& deme_diff = diff_[site];
    std::int64_t& v = deme_diff[k];
    std::int64_t before = v;
    v += side == 1 ? delta : -delta;
    std::int64_t& nz = deme_diff_nonzero_[site];
    if (before == 0 && v != 0) {
      if (nz++ == 0 && std::abs(site) <= hit_sites_) {
        ++hit_count_;
        if (!spread_.hit) {
          spread_.hit = true;
          spread_.first_hit_time = clock_;
        }
      }
    } else if (before != 0 && v == 0) {
      deme_diff.erase(k);
      if (--nz == 0 && std::abs(site) <= hit_sites_) --hit_count_;
    }
  }

  std::uint64_t diff_mass() const {
    std::uint64_t mass = 0;
    for (const auto& [site, ks] : diff_) {
      for (const auto& [k, v] : ks) {
        mass += static_cast<std::uint64_t>(std::abs(v));
      }
    }
    return mass;
  }

  void refresh(std::size_t i) {
    Deme& d = demes_[i];
    DemeAggregates g;
    g.n0 = d.s0.total();
    for (const auto& [k, n] : d.s0.counts) {
      if (k <= t_.K) g.s0w += p_.fitness.at(k) * static_cast<double>(n);
    }
    g.n1 = static_cast<std::int64_t>(d.list[0].size());
    g.n2 = static_cast<std::int64_t>(d.list[1].size());
    std::int64_t np1 = static_cast<std::int64_t>(d.list[2].size());
    std::int64_t np2 = static_cast<std::int64_t>(d.list[3].size());
    if (np1 != np2) {
      throw InvariantBroken("dual balance violated at site " +
                            std::to_string(site_of(i)));
    }
    g.np = np1;
    for (int cls : {0, 2}) {
      for (std::uint64_t id : d.list[cls]) {
        const Particle& q = particles_.at(id);
        if (q.k <= t_.K) g.w1 += p_.fitness.at(q.k);
      }
    }
    for (int cls : {1, 3}) {
      for (std::uint64_t id : d.list[cls]) {
        const Particle& q = particles_.at(id);
        if (q.k <= t_.K) g.w2 += p_.fitness.at(q.k);
      }
    }
    d.rates = rates_from(g, p_);
    int site = site_of(i);
    d.dirs = (inside(site - 1) ? 1 : 0) + (inside(site + 1) ? 1 : 0);
    tree_.set(i, d.rates.total(d.dirs));
  }

  void assert_deme_invariants(std::size_t i) const {
    const Deme& d = demes_[i];
    if (d.list[2].size() != d.list[3].size()) {
      throw InvariantBroken("dual balance violated at site " +
                            std::to_string(site_of(i)));
    }
    for (int cls : {2, 3}) {
      for (std::uint64_t id : d.list[cls]) {
        const Particle& q = particles_.at(id);
        auto dual_it = particles_.find(q.dual_id);
        if (dual_it == particles_.end()) {
          throw InvariantBroken("dual pair lost its partner");
        }
        const Particle& dual = dual_it->second;
        if (!is_partial(dual.cls) || side_of(dual.cls) == side_of(q.cls) ||
            dual.dual_id != id || dual.site != q.site) {
          throw InvariantBroken("dual pair inconsistent at site " +
                                std::to_string(q.site));
        }
      }
    }
  }

  void check_invariants_everywhere() const {
    for (std::size_t i = 0; i < demes_.size(); ++i) assert_deme_invariants(i);
  }

  Configuration marginal(int side) const {
    Configuration c;
    for (const auto& [site, deme] : exterior_s0_) {
      for (const auto& [k, n] : deme.counts) c.add(site, k, n);
    }
    for (std::size_t i = 0; i < demes_.size(); ++i) {
      for (const auto& [k, n] : demes_[i].s0.counts) c.add(site_of(i), k, n);
    }
    for (const auto& [id, q] : particles_) {
      if (side_of(q.cls) == side) c.add(q.site, q.k, 1);
    }
    c.normalize();
    return c;
  }

  Configuration class_config(CouplingClass cls) const {
    Configuration c;
    for (const auto& [id, q] : particles_) {
      if (q.cls == cls) c.add(q.site, q.k, 1);
    }
    c.normalize();
    return c;
  }

  void capture_until(double upto) {
    while (next_snapshot_ < snapshot_times_.size() &&
           snapshot_times_[next_snapshot_] < upto) {
      CouplingSnapshot snap;
      snap.time = snapshot_times_[next_snapshot_];
      snap.marginal1 = marginal(1);
      snap.marginal2 = marginal(2);
      Configuration c0;
      for (const auto& [site, deme] : exterior_s0_) {
        for (const auto& [k, n] : deme.counts) c0.add(site, k, n);
      }
      for (std::size_t i = 0; i < demes_.size(); ++i) {
        for (const auto& [k, n] : demes_[i].s0.counts) c0.add(site_of(i), k, n);
      }
      c0.normalize();
      snap.class0 = c0;
      snap.class1 = class_config(CouplingClass::Infected1);
      snap.class2 = class_config(CouplingClass::Infected2);
      snap.partial1 = class_config(CouplingClass::Partial1);
      snap.partial2 = class_config(CouplingClass::Partial2);
      snapshots_.push_back(std::move(snap));
      ++next_snapshot_;
    }
  }

  void note_event(int site, const char* channel) {
    if (opt_.record_events) {
      events_.push_back(CouplingEvent{clock_, site, channel});
    }
  }

  // --- draws -----------------------------------------------------------

  int draw_s0_type_uniform(const Deme& d) {
    double r = rng_.uniform() * static_cast<double>(d.s0.total());
    int last = 0;
    for (const auto& [k, n] : d.s0.counts) {
      if (n <= 0) continue;
      last = k;
      if (r <= static_cast<double>(n)) return k;
      r -= static_cast<double>(n);
    }
    return last;
  }

  int draw_s0_type_weighted(const Deme& d) {
    double w = 0.0;
    for (const auto& [k, n] : d.s0.counts) {
      if (k <= t_.K) w += p_.fitness.at(k) * static_cast<double>(n);
    }
    double r = rng_.uniform() * w;
    int last = 0;
    for (const auto& [k, n] : d.s0.counts) {
      if (k > t_.K || n <= 0) continue;
      double mass = p_.fitness.at(k) * static_cast<double>(n);
      if (mass <= 0.0) continue;
      last = k;
      if (r <= mass) return k;
      r -= mass;
    }
    return last;
  }

  std::uint64_t draw_uniform_id(const std::vector<std::uint64_t>& lst) {
    return lst[static_cast<std::size_t>(rng_.below(lst.size()))];
  }

  /// Parent among classes {i, i*} weighted by 1{k<=K} s_k.
  std::uint64_t draw_side_parent(const Deme& d, int side, double total_w) {
    double r = rng_.uniform() * total_w;
    std::uint64_t last = 0;
    for (int cls : side == 1 ? std::array<int, 2>{0, 2}
                             : std::array<int, 2>{1, 3}) {
      for (std::uint64_t id : d.list[cls]) {
        const Particle& q = particles_.at(id);
        if (q.k > t_.K) continue;
        double w = p_.fitness.at(q.k);
        if (w <= 0.0) continue;
        last = id;
        if (r <= w) return id;
        r -= w;
      }
    }
    return last;
  }

  /// Mutation coin; false when the offspring is deleted (type would exceed K).
  bool offspring_type(int parent_k, int& out_k) {
    out_k = parent_k;
    if (rng_.bernoulli(p_.mu)) {
      if (parent_k + 1 > t_.K) return false;
      out_k = parent_k + 1;
    }
    return true;
  }

  // --- mutations of tracked state --------------------------------------

  std::uint64_t tracked_add(int site, int k, CouplingClass cls,
                            const Particle* parent_ptr) {
    Particle q;
    q.cls = cls;
    q.site = site;
    q.k = k;
    if (parent_ptr != nullptr) {
      q.jumps = parent_ptr->jumps;
      spread_.max_jumps = std::max(spread_.max_jumps, q.jumps);
    }
    std::uint64_t id = next_id_++;
    particles_.emplace(id, q);
    list_add(demes_[idx(site)], id);
    diff_apply(site, k, side_of(cls), +1);
    return id;
  }

  void assign_child_label(std::uint64_t parent_id, std::uint64_t child_id) {
    if (!opt_.track_labels) return;
    Particle& parent = pt(parent_id);
    Particle& child = pt(child_id);
    child.label.root = parent.label.root;
    child.label.path = parent.label.path;
    child.label.path.push_back(++parent.children);
  }

  void tracked_remove(std::uint64_t id) {
    Particle& q = pt(id);
    list_remove(demes_[idx(q.site)], id);
    diff_apply(q.site, q.k, side_of(q.cls), -1);
    particles_.erase(id);
  }

  void tracked_move(std::uint64_t id, int to) {
    Particle& q = pt(id);
    int from = q.site;
    list_remove(demes_[idx(from)], id);
    diff_apply(from, q.k, side_of(q.cls), -1);
    q.site = to;
    list_add(demes_[idx(to)], id);
    diff_apply(to, q.k, side_of(q.cls), +1);
    q.jumps += 1;
    spread_.max_jumps = std::max(spread_.max_jumps, q.jumps);
  }

  void retype(std::uint64_t id, CouplingClass to) {
    Particle& q = pt(id);
    Deme& d = demes_[idx(q.site)];
    list_remove(d, id);
    q.cls = to;  // same side; the marginal difference is unchanged
    list_add(d, id);
  }

  // --- event application ------------------------------------------------

  void step(double total) {
    std::size_t i = tree_.sample(rng_.uniform() * total);
    Deme& d = demes_[i];
    int site = site_of(i);
    bool left_ok = inside(site - 1);
    bool right_ok = inside(site + 1);
    const ChannelRates& r = d.rates;

    if (opt_.guard_checks) run_guard(i);

    enum Channel {
      kMig0L, kMig0R, kMig1L, kMig1R, kMig2L, kMig2R, kMigPL, kMigPR,
      kBirth0, kBirth1, kBirth2,
      kInduce11, kInduce12, kInduce21, kInduce22,
      kDie0, kDie1, kDie2, kDiePair,
      kTransmit11, kTransmit12, kTransmit21, kTransmit22,
      kPartial11, kPartial12, kPartial21, kPartial22,
      kChannels
    };
    double rates[kChannels] = {
        left_ok ? r.mig0 : 0.0,  right_ok ? r.mig0 : 0.0,
        left_ok ? r.mig1 : 0.0,  right_ok ? r.mig1 : 0.0,
        left_ok ? r.mig2 : 0.0,  right_ok ? r.mig2 : 0.0,
        left_ok ? r.migp : 0.0,  right_ok ? r.migp : 0.0,
        r.birth0, r.birth1, r.birth2,
        r.induce[0][0], r.induce[0][1], r.induce[1][0], r.induce[1][1],
        r.die0, r.die1, r.die2, r.die_pair,
        r.transmit[0][0], r.transmit[0][1], r.transmit[1][0], r.transmit[1][1],
        r.partial[0][0], r.partial[0][1], r.partial[1][0], r.partial[1][1]};

    double scan = rng_.uniform() * d.rates.total(d.dirs);
    int chosen = -1;
    int last_positive = -1;
    for (int c = 0; c < kChannels; ++c) {
      if (rates[c] <= 0.0) continue;
      last_positive = c;
      if (scan <= rates[c]) {
        chosen = c;
        break;
      }
      scan -= rates[c];
    }
    if (chosen < 0) chosen = last_positive;
    if (chosen < 0) {
      refresh(i);  // stale leaf
      return;
    }

    std::size_t touched2 = i;  // second deme to refresh (migrations)
    switch (chosen) {
      case kMig0L:
      case kMig0R: {
        int to = site + (chosen == kMig0L ? -1 : +1);
        int k = draw_s0_type_uniform(d);
        d.s0.add(k, -1);
        demes_[idx(to)].s0.add(k, +1);
        touched2 = idx(to);
        note_event(site, "migrate0");
        break;
      }
      case kMig1L:
      case kMig1R:
      case kMig2L:
      case kMig2R: {
        bool left = chosen == kMig1L || chosen == kMig2L;
        int cls = (chosen == kMig1L || chosen == kMig1R) ? 0 : 1;
        int to = site + (left ? -1 : +1);
        std::uint64_t id = draw_uniform_id(d.list[cls]);
        tracked_move(id, to);
        touched2 = idx(to);
        note_event(site, cls == 0 ? "migrate1" : "migrate2");
        break;
      }
      case kMigPL:
      case kMigPR: {
        int to = site + (chosen == kMigPL ? -1 : +1);
        std::uint64_t id1 = draw_uniform_id(d.list[2]);
        std::uint64_t id2 = pt(id1).dual_id;
        tracked_move(id1, to);
        tracked_move(id2, to);
        touched2 = idx(to);
        note_event(site, "migrate_pair");
        break;
      }
      case kBirth0: {
        int parent_k = draw_s0_type_weighted(d);
        int k;
        if (offspring_type(parent_k, k)) d.s0.add(k, +1);
        note_event(site, "birth0");
        break;
      }
      case kBirth1:
      case kBirth2: {
        int side = chosen == kBirth1 ? 1 : 2;
        double w = side == 1 ? birth_weight(d, 1) : birth_weight(d, 2);
        std::uint64_t parent = draw_side_parent(d, side, w);
        int k;
        if (offspring_type(pt(parent).k, k)) {
          CouplingClass cls =
              side == 1 ? CouplingClass::Infected1 : CouplingClass::Infected2;
          std::uint64_t child = tracked_add(site, k, cls, &pt(parent));
          assign_child_label(parent, child);
        }
        note_event(site, side == 1 ? "birth1" : "birth2");
        break;
      }
      case kInduce11:
      case kInduce12:
      case kInduce21:
      case kInduce22: {
        int i1 = (chosen == kInduce11 || chosen == kInduce12) ? 1 : 2;
        int i2 = (chosen == kInduce11 || chosen == kInduce21) ? 1 : 2;
        std::uint64_t parent = draw_uniform_id(d.list[i1 - 1]);
        int kappa = draw_s0_type_weighted(d);
        int k;
        if (offspring_type(kappa, k)) {
          CouplingClass cls =
              i2 == 1 ? CouplingClass::Infected1 : CouplingClass::Infected2;
          std::uint64_t child = tracked_add(site, k, cls, &pt(parent));
          assign_child_label(parent, child);
        }
        note_event(site, "induce");
        break;
      }
      case kDie0: {
        int k = draw_s0_type_uniform(d);
        d.s0.add(k, -1);
        note_event(site, "die0");
        break;
      }
      case kDie1:
      case kDie2: {
        std::uint64_t id = draw_uniform_id(d.list[chosen == kDie1 ? 0 : 1]);
        tracked_remove(id);
        note_event(site, chosen == kDie1 ? "die1" : "die2");
        break;
      }
      case kDiePair: {
        std::uint64_t id1 = draw_uniform_id(d.list[2]);
        std::uint64_t id2 = pt(id1).dual_id;
        tracked_remove(id1);
        tracked_remove(id2);
        note_event(site, "die_pair");
        break;
      }
      case kTransmit11:
      case kTransmit12:
      case kTransmit21:
      case kTransmit22: {
        int i1 = (chosen == kTransmit11 || chosen == kTransmit12) ? 1 : 2;
        int i2 = (chosen == kTransmit11 || chosen == kTransmit21) ? 1 : 2;
        std::uint64_t transmitter = draw_uniform_id(d.list[i1 - 1]);
        int target_k = draw_s0_type_uniform(d);
        d.s0.add(target_k, -1);
        if (i1 != i2) {
          // Infection: the susceptible survives only in marginal 3-i2.
          CouplingClass cls = (3 - i2) == 1 ? CouplingClass::Infected1
                                            : CouplingClass::Infected2;
          std::uint64_t child = tracked_add(site, target_k, cls, &pt(transmitter));
          assign_child_label(transmitter, child);
        } else {
          // Partial recovery: target and transmitter become a dual pair.
          CouplingClass target_cls = (3 - i2) == 1 ? CouplingClass::Partial1
                                                   : CouplingClass::Partial2;
          std::uint64_t child = tracked_add(site, target_k, target_cls,
                                            &pt(transmitter));
          assign_child_label(transmitter, child);
          retype(transmitter, i1 == 1 ? CouplingClass::Partial1
                                      : CouplingClass::Partial2);
          pt(transmitter).dual_id = child;
          pt(child).dual_id = transmitter;
        }
        note_event(site, "transmit");
        break;
      }
      case kPartial11:
      case kPartial12:
      case kPartial21:
      case kPartial22: {
        int i1 = (chosen == kPartial11 || chosen == kPartial12) ? 1 : 2;
        int i2 = (chosen == kPartial11 || chosen == kPartial21) ? 1 : 2;
        // A class i2* particle dies.
        std::uint64_t dying = draw_uniform_id(d.list[i2 == 1 ? 2 : 3]);
        std::uint64_t partner = pt(dying).dual_id;
        tracked_remove(dying);
        if (i1 != i2) {
          // Reinfection: the surviving dual becomes infected again.
          retype(partner, (3 - i2) == 1 ? CouplingClass::Infected1
                                        : CouplingClass::Infected2);
          pt(partner).dual_id = 0;
          spread_.reinfections += 1;
        } else {
          // Replacement: a class i2 particle takes over the dual role.
          auto& candidates = d.list[i2 - 1];
          if (candidates.empty()) {
            throw InvariantBroken("replacement without a class-" +
                                  std::to_string(i2) + " particle");
          }
          std::uint64_t q = draw_uniform_id(candidates);
          retype(q, i2 == 1 ? CouplingClass::Partial1 : CouplingClass::Partial2);
          pt(q).dual_id = partner;
          pt(partner).dual_id = q;
        }
        note_event(site, i1 != i2 ? "reinfection" : "replacement");
        break;
      }
      default:
        break;
    }
    refresh(i);
    if (touched2 != i) refresh(touched2);
    assert_deme_invariants(i);
    if (touched2 != i) assert_deme_invariants(touched2);
  }

  double birth_weight(const Deme& d, int side) const {
    double w = 0.0;
    for (int cls : side == 1 ? std::array<int, 2>{0, 2}
                             : std::array<int, 2>{1, 3}) {
      for (std::uint64_t id : d.list[cls]) {
        const Particle& q = particles_.at(id);
        if (q.k <= t_.K) w += p_.fitness.at(q.k);
      }
    }
    return w;
  }

  /// Lemma consequences at a high-density deme, evaluated on the cached
  /// rates so adversarial runs stay cheap.
  void run_guard(std::size_t i) {
    const Deme& d = demes_[i];
    std::int64_t n0 = d.s0.total();
    std::int64_t np = static_cast<std::int64_t>(d.list[2].size());
    std::int64_t ninf[2] = {static_cast<std::int64_t>(d.list[0].size()),
                            static_cast<std::int64_t>(d.list[1].size())};
    std::int64_t marg[2] = {n0 + ninf[0] + np, n0 + ninf[1] + np};
    double threshold = static_cast<double>(p_.N) * u_eps_;
    if (static_cast<double>(std::max(marg[0], marg[1])) < threshold) return;
    ++guard_checks_done_;
    const ChannelRates& r = d.rates;
    if (r.transmit[0][1] != 0.0 || r.transmit[1][0] != 0.0 ||
        r.partial[0][1] != 0.0 || r.partial[1][0] != 0.0 ||
        r.induce[0][1] != 0.0 || r.induce[1][0] != 0.0) {
      throw GuardViolation("cross-class rate nonzero at high-density site " +
                           std::to_string(site_of(i)));
    }
    double qm[2] = {q_scaled(p_.q_minus, p_.N, static_cast<double>(marg[0])),
                    q_scaled(p_.q_minus, p_.N, static_cast<double>(marg[1]))};
    double qm_min = std::min(qm[0], qm[1]);
    for (int side = 0; side < 2; ++side) {
      if (static_cast<double>(marg[side]) < threshold) continue;
      double qp_i = q_scaled(p_.q_plus, p_.N, static_cast<double>(marg[side]));
      double b_inf = qp_i;  // worst case over k (s_0 = 1)
      double per = ninf[side] > 0 ? 1.0 / static_cast<double>(ninf[side]) : 0.0;
      double b_induce = r.induce[side][side] * per;
      double d_transmit = r.transmit[side][side] * per;
      double d_partial = np > 0 ? r.partial[side][side] / static_cast<double>(np)
                                : (ninf[side] > ninf[1 - side]
                                       ? positive_part(qm[side] - qm[1 - side])
                                       : 0.0);
      double denom1 = b_inf + b_induce + qm[side] + d_transmit;
      double denom2 = b_inf + qm_min + d_partial;
      double ratio1 = denom1 > 0.0 ? (b_inf + b_induce) / denom1 : 0.0;
      double ratio2 = denom2 > 0.0 ? b_inf / denom2 : 0.0;
      if (ratio1 > opt_.eps + 1e-12 || ratio2 > opt_.eps + 1e-12) {
        throw GuardViolation("rate-ratio bound exceeded at site " +
                             std::to_string(site_of(i)));
      }
    }
  }

  ModelParams p_;
  TruncationParams t_;
  CouplingOptions opt_;
  int M_;
  RngStream rng_;
  int hit_sites_;
  std::vector<Deme> demes_;
  SumTree tree_;
  std::map<int, DemeState> exterior_s0_;
  std::vector<std::uint64_t> frozen_tracked_;
  std::unordered_map<std::uint64_t, Particle> particles_;
  std::uint64_t next_id_ = 1;
  double clock_ = 0.0;
  double u_eps_ = 0.0;
  std::uint64_t guard_checks_done_ = 0;

  // difference of the marginals: side-1 minus side-2 per (site, k)
  std::map<int, std::map<int, std::int64_t>> diff_;
  std::map<int, std::int64_t> deme_diff_nonzero_;
  int hit_count_ = 0;

  SpreadReport spread_;
  std::vector<double> snapshot_times_;
  std::size_t next_snapshot_ = 0;
  std::vector<CouplingSnapshot> snapshots_;
  std::vector<CouplingEvent> events_;
};

}  // namespace

CouplingResult simulate_coupling(const Configuration& a, const Configuration& b,
                                 const ModelParams& p, const TruncationParams& t,
                                 const CouplingOptions& opt) {
  CouplingState st = init_coupling(a, b);
  CouplingSim sim(st, p, t, opt);
  return sim.run();
}

bool coupling_step(CouplingState& state, double& clock, const ModelParams& p,
                   const TruncationParams& t, std::uint64_t seed,
                   std::uint64_t replicate) {
  CouplingOptions opt;
  opt.seed = seed;
  opt.replicate = replicate;
  opt.horizon = std::numeric_limits<double>::infinity();
  CouplingSim sim(state, p, t, opt);
  bool stepped = sim.single_step();
  state = sim.export_state();
  clock += sim.clock();
  return stepped;
}

}  // namespace ratchet
