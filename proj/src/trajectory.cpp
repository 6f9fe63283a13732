#include "ratchet/trajectory.hpp"

#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "ratchet/errors.hpp"
#include "ratchet/text_format.hpp"

namespace ratchet {

const char* event_kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::MigrateLeft: return "migrate_left";
    case EventKind::MigrateRight: return "migrate_right";
    case EventKind::Birth: return "birth";
    case EventKind::Death: return "death";
  }
  return "?";
}

namespace {

void apply_event(Configuration& c, const EventRecord& ev) {
  switch (ev.kind) {
    case EventKind::MigrateLeft:
      c.remove(ev.site, ev.k);
      c.add(ev.site - 1, ev.k);
      break;
    case EventKind::MigrateRight:
      c.remove(ev.site, ev.k);
      c.add(ev.site + 1, ev.k);
      break;
    case EventKind::Birth:
      c.add(ev.site, ev.k);
      break;
    case EventKind::Death:
      c.remove(ev.site, ev.k);
      break;
  }
  if (c.deme_total(ev.site) != ev.post_total) {
    throw SnapshotMismatch("replay: post-event total mismatch at site " +
                           std::to_string(ev.site) + ", t=" +
                           format_double(ev.time));
  }
}

}  // namespace

Configuration replay(const Trajectory& traj) {
  Configuration c = traj.initial;
  std::size_t next_snapshot = 0;
  double prev_time = 0.0;
  auto check_snapshots_until = [&](double t) {
    while (next_snapshot < traj.snapshots.size() &&
           traj.snapshots[next_snapshot].first < t) {
      if (!(traj.snapshots[next_snapshot].second == c)) {
        throw SnapshotMismatch("replay: snapshot at t=" +
                               format_double(traj.snapshots[next_snapshot].first) +
                               " differs");
      }
      ++next_snapshot;
    }
  };
  for (const auto& ev : traj.events) {
    if (ev.time < prev_time) {
      throw SnapshotMismatch("replay: event times not increasing");
    }
    check_snapshots_until(ev.time);
    apply_event(c, ev);
    prev_time = ev.time;
  }
  check_snapshots_until(traj.horizon + 1.0);
  if (!traj.final_config.demes.empty() || traj.events.empty()) {
    Configuration want = traj.final_config;
    Configuration got = c;
    want.normalize();
    got.normalize();
    if (!(want == got)) {
      throw SnapshotMismatch("replay: final configuration differs");
    }
  }
  return c;
}

Configuration state_at(const Trajectory& traj, double t) {
  Configuration c = traj.initial;
  for (const auto& ev : traj.events) {
    if (ev.time > t) break;
    apply_event(c, ev);
  }
  return c;
}

namespace {

template <class T>
void put_raw(std::string& out, const T& v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get_raw(std::string_view bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) {
    throw ParseError("trajectory: truncated record stream", 0, 0);
  }
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::string fitness_to_text(const FitnessSpec& f) {
  if (f.is_geometric()) return "geometric " + format_double(f.geometric_s());
  std::string out = "explicit";
  for (double v : f.values()) out += " " + format_double(v);
  return out;
}

FitnessSpec fitness_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string kind;
  is >> kind;
  if (kind == "geometric") {
    double s;
    is >> s;
    return FitnessSpec::geometric(s);
  }
  std::vector<double> values;
  double v;
  while (is >> v) values.push_back(v);
  return FitnessSpec::explicit_list(std::move(values));
}

std::string poly_to_text(const Polynomial& p) {
  std::string out;
  for (std::size_t i = 0; i < p.coeffs().size(); ++i) {
    if (i) out += " ";
    out += format_double(p.coeffs()[i]);
  }
  return out.empty() ? "0" : out;
}

Polynomial poly_from_text(const std::string& text) {
  std::istringstream is(text);
  std::vector<double> coeffs;
  double v;
  while (is >> v) coeffs.push_back(v);
  return Polynomial(std::move(coeffs));
}

constexpr char kHeader[] = "ratchet-trajectory v1";

}  // namespace

std::string trajectory_to_bytes(const Trajectory& traj) {
  std::ostringstream head;
  head << kHeader << "\n";
  head << "L " << format_double(traj.params.L) << "\n";
  head << "m " << format_double(traj.params.m) << "\n";
  head << "N " << traj.params.N << "\n";
  head << "mu " << format_double(traj.params.mu) << "\n";
  head << "fitness " << fitness_to_text(traj.params.fitness) << "\n";
  head << "q_plus " << poly_to_text(traj.params.q_plus) << "\n";
  head << "q_minus " << poly_to_text(traj.params.q_minus) << "\n";
  head << "lambda " << format_double(traj.trunc.lambda) << "\n";
  head << "K " << traj.trunc.K << "\n";
  if (traj.trunc.kappa) head << "kappa " << *traj.trunc.kappa << "\n";
  head << "seed " << traj.seed << "\n";
  head << "replicate " << traj.replicate << "\n";
  head << "horizon " << format_double(traj.horizon) << "\n";
  head << "mutation_free " << (traj.mutation_free ? 1 : 0) << "\n";

  auto config_block = [&](const std::string& tag, const Configuration& c) {
    std::string text = configuration_to_text(c, traj.params.L);
    head << tag << " " << text.size() << "\n" << text;
  };
  config_block("initial", traj.initial);
  config_block("final", traj.final_config);
  head << "snapshots " << traj.snapshots.size() << "\n";
  for (const auto& [t, c] : traj.snapshots) {
    head << "at " << format_double(t) << "\n";
    config_block("snapshot", c);
  }
  head << "events " << traj.events.size() << "\n";

  std::string out = head.str();
  for (const auto& ev : traj.events) {
    std::uint32_t len = sizeof(double) + sizeof(std::int32_t) + 2 +
                        sizeof(std::int32_t) + sizeof(std::int64_t);
    put_raw(out, len);
    put_raw(out, ev.time);
    put_raw(out, static_cast<std::int32_t>(ev.site));
    put_raw(out, static_cast<std::uint8_t>(ev.kind));
    put_raw(out, static_cast<std::uint8_t>(ev.mutated ? 1 : 0));
    put_raw(out, static_cast<std::int32_t>(ev.k));
    put_raw(out, ev.post_total);
  }
  return out;
}

Trajectory trajectory_from_bytes(std::string_view bytes) {
  Trajectory traj;
  std::size_t pos = 0;
  int lineno = 0;
  auto next_line = [&]() -> std::string {
    auto nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) {
      throw ParseError("trajectory: unexpected end of header", lineno + 1, 1);
    }
    std::string line(bytes.substr(pos, nl - pos));
    pos = nl + 1;
    ++lineno;
    return line;
  };
  if (next_line() != kHeader) throw ParseError("trajectory: bad header", 1, 1);

  std::size_t n_events = 0;
  bool saw_events = false;
  while (!saw_events) {
    std::string line = next_line();
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    auto rest_of = [&]() {
      std::string r;
      std::getline(ls, r);
      return r.empty() ? r : r.substr(1);
    };
    if (tag == "L") ls >> traj.params.L;
    else if (tag == "m") ls >> traj.params.m;
    else if (tag == "N") ls >> traj.params.N;
    else if (tag == "mu") ls >> traj.params.mu;
    else if (tag == "fitness") traj.params.fitness = fitness_from_text(rest_of());
    else if (tag == "q_plus") traj.params.q_plus = poly_from_text(rest_of());
    else if (tag == "q_minus") traj.params.q_minus = poly_from_text(rest_of());
    else if (tag == "lambda") ls >> traj.trunc.lambda;
    else if (tag == "K") ls >> traj.trunc.K;
    else if (tag == "kappa") {
      std::int64_t kap;
      ls >> kap;
      traj.trunc.kappa = kap;
    } else if (tag == "seed") ls >> traj.seed;
    else if (tag == "replicate") ls >> traj.replicate;
    else if (tag == "horizon") ls >> traj.horizon;
    else if (tag == "mutation_free") {
      int v;
      ls >> v;
      traj.mutation_free = v != 0;
    } else if (tag == "initial" || tag == "final" || tag == "snapshot") {
      std::size_t len;
      ls >> len;
      if (pos + len > bytes.size()) {
        throw ParseError("trajectory: truncated configuration block", lineno, 1);
      }
      auto parsed = configuration_from_text(bytes.substr(pos, len));
      pos += len;
      if (tag == "initial") traj.initial = parsed.config;
      else if (tag == "final") traj.final_config = parsed.config;
      else traj.snapshots.back().second = parsed.config;
    } else if (tag == "snapshots") {
      // count only; entries follow as "at"/"snapshot" pairs
    } else if (tag == "at") {
      double t;
      ls >> t;
      traj.snapshots.emplace_back(t, Configuration{});
    } else if (tag == "events") {
      ls >> n_events;
      saw_events = true;
    } else {
      throw ParseError("trajectory: unknown header tag '" + tag + "'", lineno, 1);
    }
  }

  traj.events.reserve(n_events);
  for (std::size_t i = 0; i < n_events; ++i) {
    auto len = get_raw<std::uint32_t>(bytes, pos);
    std::size_t start = pos;
    EventRecord ev;
    ev.time = get_raw<double>(bytes, pos);
    ev.site = get_raw<std::int32_t>(bytes, pos);
    ev.kind = static_cast<EventKind>(get_raw<std::uint8_t>(bytes, pos));
    ev.mutated = get_raw<std::uint8_t>(bytes, pos) != 0;
    ev.k = get_raw<std::int32_t>(bytes, pos);
    ev.post_total = get_raw<std::int64_t>(bytes, pos);
    if (pos - start != len) {
      throw ParseError("trajectory: record length mismatch", 0, 0);
    }
    traj.events.push_back(ev);
  }
  return traj;
}

void write_trajectory(std::ostream& os, const Trajectory& traj) {
  std::string bytes = trajectory_to_bytes(traj);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Trajectory read_trajectory(std::istream& is) {
  std::ostringstream buf;
  buf << is.rdbuf();
  std::string bytes = buf.str();
  return trajectory_from_bytes(bytes);
}

}  // namespace ratchet
