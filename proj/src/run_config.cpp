#include "ratchet/run_config.hpp"

#include <fstream>
#include <sstream>

#include "ratchet/errors.hpp"
#include "ratchet/text_format.hpp"

namespace ratchet {

namespace {

struct Line {
  int number = 0;
  std::string section;
  std::string key;
  std::string value;
  int value_column = 1;
};

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<Line> tokenize(const std::string& text) {
  std::vector<Line> lines;
  std::istringstream is(text);
  std::string raw;
  int number = 0;
  std::string section;
  while (std::getline(is, raw)) {
    ++number;
    std::string stripped = raw;
    std::size_t hash = stripped.find('#');
    if (hash != std::string::npos) stripped = stripped.substr(0, hash);
    stripped = trim(stripped);
    if (stripped.empty()) continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']') {
        throw ParseError("unterminated section header", number, 1);
      }
      section = trim(stripped.substr(1, stripped.size() - 2));
      if (section.empty()) throw ParseError("empty section name", number, 1);
      continue;
    }
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected key = value", number, 1);
    }
    Line line;
    line.number = number;
    line.section = section;
    line.key = trim(stripped.substr(0, eq));
    line.value = trim(stripped.substr(eq + 1));
    line.value_column = static_cast<int>(raw.find('=')) + 2;
    if (line.key.empty()) throw ParseError("empty key", number, 1);
    if (line.section.empty()) {
      throw ParseError("key outside any [section]", number, 1);
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

double parse_real(const Line& line) {
  double v;
  if (!parse_double(line.value, v)) {
    throw ParseError("bad real value '" + line.value + "' for " + line.key,
                     line.number, line.value_column);
  }
  return v;
}

std::int64_t parse_int(const Line& line) {
  try {
    std::size_t used = 0;
    std::int64_t v = std::stoll(line.value, &used);
    if (used != line.value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (...) {
    throw ParseError("bad integer '" + line.value + "' for " + line.key,
                     line.number, line.value_column);
  }
}

bool parse_bool(const Line& line) {
  if (line.value == "true" || line.value == "1") return true;
  if (line.value == "false" || line.value == "0") return false;
  throw ParseError("bad boolean '" + line.value + "' for " + line.key,
                   line.number, line.value_column);
}

std::vector<double> parse_reals(const Line& line) {
  std::istringstream is(line.value);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) {
    double v;
    if (!parse_double(tok, v)) {
      throw ParseError("bad real '" + tok + "' in list for " + line.key,
                       line.number, line.value_column);
    }
    out.push_back(v);
  }
  return out;
}

std::vector<int> parse_ints(const Line& line) {
  std::vector<int> out;
  for (double v : parse_reals(line)) out.push_back(static_cast<int>(v));
  return out;
}

/// "(5,3) (10,6) (20,12)" -> [(5,3), (10,6), (20,12)]
std::vector<std::pair<double, int>> parse_schedule(const Line& line) {
  std::vector<std::pair<double, int>> out;
  std::istringstream is(line.value);
  std::string tok;
  while (is >> tok) {
    if (tok.size() < 5 || tok.front() != '(' || tok.back() != ')') {
      throw ParseError("bad schedule entry '" + tok + "', expected (lambda,K)",
                       line.number, line.value_column);
    }
    std::string body = tok.substr(1, tok.size() - 2);
    std::size_t comma = body.find(',');
    if (comma == std::string::npos) {
      throw ParseError("bad schedule entry '" + tok + "'", line.number,
                       line.value_column);
    }
    double lambda;
    if (!parse_double(body.substr(0, comma), lambda)) {
      throw ParseError("bad lambda in '" + tok + "'", line.number,
                       line.value_column);
    }
    int K = 0;
    try {
      K = std::stoi(body.substr(comma + 1));
    } catch (...) {
      throw ParseError("bad K in '" + tok + "'", line.number,
                       line.value_column);
    }
    out.emplace_back(lambda, K);
  }
  return out;
}

/// "site k count; site k count; ..."
std::vector<std::array<std::int64_t, 3>> parse_cells(const Line& line) {
  std::vector<std::array<std::int64_t, 3>> out;
  std::istringstream groups(line.value);
  std::string group;
  while (std::getline(groups, group, ';')) {
    group = trim(group);
    if (group.empty()) continue;
    std::istringstream gs(group);
    std::array<std::int64_t, 3> cell{};
    if (!(gs >> cell[0] >> cell[1] >> cell[2])) {
      throw ParseError("bad cell '" + group + "', expected: site k count",
                       line.number, line.value_column);
    }
    std::string rest;
    if (gs >> rest) {
      throw ParseError("trailing tokens in cell '" + group + "'", line.number,
                       line.value_column);
    }
    if (cell[1] < 0) {
      throw ParseError("negative mutation count in cell", line.number,
                       line.value_column);
    }
    out.push_back(cell);
  }
  return out;
}

FitnessSpec parse_fitness(const Line& line) {
  std::istringstream is(line.value);
  std::string kind;
  is >> kind;
  if (kind == "geometric") {
    double s;
    if (!(is >> s)) {
      throw ParseError("fitness = geometric <s>", line.number,
                       line.value_column);
    }
    return FitnessSpec::geometric(s);
  }
  if (kind == "explicit") {
    std::vector<double> values;
    double v;
    while (is >> v) values.push_back(v);
    if (values.empty()) {
      throw ParseError("fitness = explicit <s_0> [s_1 ...]", line.number,
                       line.value_column);
    }
    return FitnessSpec::explicit_list(std::move(values));
  }
  throw ParseError("unknown fitness kind '" + kind + "'", line.number,
                   line.value_column);
}

Configuration materialize_init(RunConfig& cfg, int line_number) {
  Configuration c;
  if (cfg.init_kind == "empty") {
    return c;
  }
  if (cfg.init_kind == "uniform") {
    if (cfg.init_half_width < 0.0 || cfg.init_occupancy <= 0) {
      throw ParseError("uniform init needs occupancy > 0 and half_width >= 0",
                       line_number, 1);
    }
    return uniform_block(cfg.model.L, cfg.init_half_width, cfg.init_occupancy);
  }
  if (cfg.init_kind == "inline") {
    for (const auto& cell : cfg.init_cells) {
      c.add(static_cast<int>(cell[0]), static_cast<int>(cell[1]), cell[2]);
    }
    return c;
  }
  if (cfg.init_kind == "file") {
    std::ifstream in(cfg.init_path);
    if (!in) {
      throw ParseError("cannot open init file '" + cfg.init_path + "'",
                       line_number, 1);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    auto parsed = configuration_from_text(buf.str());
    return parsed.config;
  }
  throw ParseError("unknown init kind '" + cfg.init_kind + "'", line_number, 1);
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  bool have_q_plus = false;
  bool have_q_minus = false;
  int init_line = 0;
  for (const Line& line : tokenize(text)) {
    const std::string& s = line.section;
    const std::string& k = line.key;
    auto unknown = [&]() -> ParseError {
      return ParseError("unknown key '" + k + "' in section [" + s + "]",
                        line.number, 1);
    };
    if (s == "model") {
      if (k == "L") cfg.model.L = parse_real(line);
      else if (k == "m") cfg.model.m = parse_real(line);
      else if (k == "N") cfg.model.N = parse_int(line);
      else if (k == "mu") cfg.model.mu = parse_real(line);
      else if (k == "fitness") cfg.model.fitness = parse_fitness(line);
      else if (k == "q_plus") {
        cfg.model.q_plus = Polynomial(parse_reals(line));
        have_q_plus = true;
      } else if (k == "q_minus") {
        cfg.model.q_minus = Polynomial(parse_reals(line));
        have_q_minus = true;
      } else throw unknown();
    } else if (s == "truncation") {
      if (k == "lambda") cfg.trunc.lambda = parse_real(line);
      else if (k == "K") cfg.trunc.K = static_cast<int>(parse_int(line));
      else if (k == "kappa") cfg.trunc.kappa = parse_int(line);
      else if (k == "schedule") cfg.schedule = parse_schedule(line);
      else throw unknown();
    } else if (s == "init") {
      init_line = line.number;
      if (k == "kind") cfg.init_kind = line.value;
      else if (k == "occupancy") cfg.init_occupancy = parse_int(line);
      else if (k == "half_width") cfg.init_half_width = parse_real(line);
      else if (k == "cells") cfg.init_cells = parse_cells(line);
      else if (k == "path") cfg.init_path = line.value;
      else throw unknown();
    } else if (s == "run") {
      if (k == "horizon") cfg.horizon = parse_real(line);
      else if (k == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(line));
      else if (k == "replicates") {
        cfg.replicates = static_cast<std::uint64_t>(parse_int(line));
      } else if (k == "observe") cfg.observe = parse_reals(line);
      else if (k == "threads") {
        cfg.threads = static_cast<unsigned>(parse_int(line));
      } else if (k == "event_cap") {
        cfg.event_cap = static_cast<std::uint64_t>(parse_int(line));
      } else if (k == "save_trajectories") {
        cfg.save_trajectories = parse_bool(line);
      } else if (k == "out") cfg.out_dir = line.value;
      else throw unknown();
    } else if (s == "couple") {
      if (k == "eps") cfg.eps = parse_real(line);
      else if (k == "r") cfg.hit_radius = parse_real(line);
      else if (k == "b_add") cfg.b_add = parse_cells(line);
      else if (k == "b_remove") cfg.b_remove = parse_cells(line);
      else throw unknown();
    } else if (s == "spread") {
      if (k == "R_grid") cfg.r_grid = parse_reals(line);
      else if (k == "r") cfg.hit_radius = parse_real(line);
      else if (k == "eps") cfg.eps = parse_real(line);
      else throw unknown();
    } else if (s == "moments") {
      if (k == "p") cfg.exponents = parse_ints(line);
      else if (k == "sites") cfg.probe_sites = parse_ints(line);
      else if (k == "T") cfg.moment_time = parse_real(line);
      else throw unknown();
    } else if (s == "greens") {
      if (k == "site") cfg.greens_site = static_cast<int>(parse_int(line));
      else if (k == "kset") {
        cfg.greens_kset.clear();
        for (int v : parse_ints(line)) cfg.greens_kset.insert(v);
      } else if (k == "grid") cfg.greens_grid = static_cast<int>(parse_int(line));
      else throw unknown();
    } else if (s == "converge") {
      if (k == "window") cfg.window = parse_real(line);
      else throw unknown();
    } else if (s == "duality") {
      if (k == "instances") cfg.duality_instances = static_cast<int>(parse_int(line));
      else if (k == "sites") cfg.duality_sites = static_cast<int>(parse_int(line));
      else if (k == "max_particles") {
        cfg.duality_max_particles = static_cast<int>(parse_int(line));
      } else throw unknown();
    } else {
      throw ParseError("unknown section [" + s + "]", line.number, 1);
    }
  }
  if (!have_q_plus || !have_q_minus) {
    throw ParseError("section [model] must define q_plus and q_minus", 1, 1);
  }
  ValidationReport report = validate_params(cfg.model);
  if (!report.ok()) {
    throw ValidationError("model parameters violate standing assumptions:\n" +
                          report.to_string());
  }
  if (!cfg.schedule.empty()) {
    for (std::size_t i = 1; i < cfg.schedule.size(); ++i) {
      if (cfg.schedule[i].first <= cfg.schedule[i - 1].first ||
          cfg.schedule[i].second <= cfg.schedule[i - 1].second) {
        throw ValidationError("truncation schedule must be increasing");
      }
    }
  }
  if (cfg.horizon < 0.0) throw ValidationError("horizon must be >= 0");
  cfg.init = materialize_init(cfg, init_line);
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

namespace {

std::string cells_to_string(const std::vector<std::array<std::int64_t, 3>>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += "; ";
    out += std::to_string(cells[i][0]) + " " + std::to_string(cells[i][1]) +
           " " + std::to_string(cells[i][2]);
  }
  return out;
}

}  // namespace

std::string render_resolved(const RunConfig& cfg) {
  std::ostringstream os;
  os << "[model]\n";
  os << "L = " << format_double(cfg.model.L) << "\n";
  os << "m = " << format_double(cfg.model.m) << "\n";
  os << "N = " << cfg.model.N << "\n";
  os << "mu = " << format_double(cfg.model.mu) << "\n";
  if (cfg.model.fitness.is_geometric()) {
    os << "fitness = geometric " << format_double(cfg.model.fitness.geometric_s())
       << "\n";
  } else {
    os << "fitness = explicit";
    for (double v : cfg.model.fitness.values()) os << " " << format_double(v);
    os << "\n";
  }
  auto poly_line = [&](const char* name, const Polynomial& p) {
    os << name << " =";
    if (p.coeffs().empty()) os << " 0";
    for (double c : p.coeffs()) os << " " << format_double(c);
    os << "\n";
  };
  poly_line("q_plus", cfg.model.q_plus);
  poly_line("q_minus", cfg.model.q_minus);

  os << "\n[truncation]\n";
  os << "lambda = " << format_double(cfg.trunc.lambda) << "\n";
  os << "K = " << cfg.trunc.K << "\n";
  if (cfg.trunc.kappa) os << "kappa = " << *cfg.trunc.kappa << "\n";
  if (!cfg.schedule.empty()) {
    os << "schedule =";
    for (const auto& [lambda, K] : cfg.schedule) {
      os << " (" << format_double(lambda) << "," << K << ")";
    }
    os << "\n";
  }

  os << "\n[init]\n";
  os << "kind = " << cfg.init_kind << "\n";
  if (cfg.init_kind == "uniform") {
    os << "occupancy = " << cfg.init_occupancy << "\n";
    os << "half_width = " << format_double(cfg.init_half_width) << "\n";
  }
  if (cfg.init_kind == "inline") {
    os << "cells = " << cells_to_string(cfg.init_cells) << "\n";
  }
  if (cfg.init_kind == "file") os << "path = " << cfg.init_path << "\n";

  os << "\n[run]\n";
  os << "horizon = " << format_double(cfg.horizon) << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "replicates = " << cfg.replicates << "\n";
  if (!cfg.observe.empty()) {
    os << "observe =";
    for (double t : cfg.observe) os << " " << format_double(t);
    os << "\n";
  }
  os << "threads = " << cfg.threads << "\n";
  os << "event_cap = " << cfg.event_cap << "\n";
  os << "save_trajectories = " << (cfg.save_trajectories ? "true" : "false")
     << "\n";
  os << "out = " << cfg.out_dir << "\n";

  os << "\n[couple]\n";
  os << "eps = " << format_double(cfg.eps) << "\n";
  os << "r = " << format_double(cfg.hit_radius) << "\n";
  if (!cfg.b_add.empty()) os << "b_add = " << cells_to_string(cfg.b_add) << "\n";
  if (!cfg.b_remove.empty()) {
    os << "b_remove = " << cells_to_string(cfg.b_remove) << "\n";
  }

  os << "\n[spread]\n";
  os << "R_grid =";
  for (double r : cfg.r_grid) os << " " << format_double(r);
  os << "\n";

  os << "\n[moments]\n";
  os << "p =";
  for (int p : cfg.exponents) os << " " << p;
  os << "\n";
  os << "sites =";
  for (int site : cfg.probe_sites) os << " " << site;
  os << "\n";
  os << "T = " << format_double(cfg.moment_time < 0.0 ? cfg.horizon
                                                      : cfg.moment_time)
     << "\n";

  os << "\n[greens]\n";
  os << "site = " << cfg.greens_site << "\n";
  os << "kset =";
  for (int k : cfg.greens_kset) os << " " << k;
  os << "\n";
  os << "grid = " << cfg.greens_grid << "\n";

  os << "\n[converge]\n";
  os << "window = " << format_double(cfg.window) << "\n";

  os << "\n[duality]\n";
  os << "instances = " << cfg.duality_instances << "\n";
  os << "sites = " << cfg.duality_sites << "\n";
  os << "max_particles = " << cfg.duality_max_particles << "\n";
  return os.str();
}

Configuration coupled_partner(const RunConfig& cfg) {
  Configuration b = cfg.init;
  for (const auto& cell : cfg.b_add) {
    b.add(static_cast<int>(cell[0]), static_cast<int>(cell[1]), cell[2]);
  }
  for (const auto& cell : cfg.b_remove) {
    std::int64_t have = b.count(static_cast<int>(cell[0]),
                                static_cast<int>(cell[1]));
    if (have < cell[2]) {
      throw ValidationError("b_remove exceeds available particles at site " +
                            std::to_string(cell[0]));
    }
    b.remove(static_cast<int>(cell[0]), static_cast<int>(cell[1]), cell[2]);
  }
  b.normalize();
  return b;
}

}  // namespace ratchet
