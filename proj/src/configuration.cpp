#include "ratchet/configuration.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <vector>

#include "ratchet/errors.hpp"
#include "ratchet/text_format.hpp"

namespace ratchet {

void Configuration::add(int site, int k, std::int64_t n) {
  if (n == 0) return;
  demes[site].add(k, n);
  if (demes[site].empty()) demes.erase(site);
  support_radius = std::max(support_radius, std::abs(site));
}

void Configuration::remove(int site, int k, std::int64_t n) { add(site, k, -n); }

void Configuration::normalize() {
  for (auto it = demes.begin(); it != demes.end();) {
    it = it->second.empty() ? demes.erase(it) : std::next(it);
  }
  int r = 0;
  for (const auto& [site, deme] : demes) r = std::max(r, std::abs(site));
  support_radius = r;
}

namespace {

double site_weight(int site, double L, int p = 1) {
  double x = std::abs(static_cast<double>(site)) / L;
  double w = (1.0 + x) * (1.0 + x);
  double acc = 1.0;
  for (int i = 0; i < p; ++i) acc *= w;
  return acc;
}

}  // namespace

double norm_S(const Configuration& c, double L) {
  double acc = 0.0;
  for (const auto& [site, deme] : c.demes) {
    acc += static_cast<double>(deme.total()) / site_weight(site, L);
  }
  return acc;
}

double dist_S(const Configuration& a, const Configuration& b, double L) {
  double acc = 0.0;
  auto ia = a.demes.begin();
  auto ib = b.demes.begin();
  auto l1_diff = [](const DemeState& u, const DemeState& v) {
    std::int64_t d = 0;
    auto iu = u.counts.begin();
    auto iv = v.counts.begin();
    while (iu != u.counts.end() || iv != v.counts.end()) {
      if (iv == v.counts.end() || (iu != u.counts.end() && iu->first < iv->first)) {
        d += std::abs(iu->second);
        ++iu;
      } else if (iu == u.counts.end() || iv->first < iu->first) {
        d += std::abs(iv->second);
        ++iv;
      } else {
        d += std::abs(iu->second - iv->second);
        ++iu;
        ++iv;
      }
    }
    return d;
  };
  static const DemeState kEmpty{};
  while (ia != a.demes.end() || ib != b.demes.end()) {
    int site;
    const DemeState* u = &kEmpty;
    const DemeState* v = &kEmpty;
    if (ib == b.demes.end() || (ia != a.demes.end() && ia->first < ib->first)) {
      site = ia->first;
      u = &ia->second;
      ++ia;
    } else if (ia == a.demes.end() || ib->first < ia->first) {
      site = ib->first;
      v = &ib->second;
      ++ib;
    } else {
      site = ia->first;
      u = &ia->second;
      v = &ib->second;
      ++ia;
      ++ib;
    }
    acc += static_cast<double>(l1_diff(*u, *v)) / site_weight(site, L);
  }
  return acc;
}

double psi_p(const Configuration& c, int p, double L) {
  double acc = 0.0;
  for (const auto& [site, deme] : c.demes) {
    double t = static_cast<double>(deme.total());
    double num = 1.0;
    for (int i = 0; i < p; ++i) num *= t;
    acc += num / site_weight(site, L, p);
  }
  return acc;
}

S0Report in_S0(const Configuration& c) {
  S0Report report;
  for (const auto& [site, deme] : c.demes) {
    report.sup_deme_total = std::max(report.sup_deme_total, deme.total());
    if (!deme.counts.empty()) {
      report.max_mutation_count =
          std::max(report.max_mutation_count, deme.counts.rbegin()->first);
    }
  }
  return report;
}

std::string configuration_to_text(const Configuration& c, double L) {
  std::ostringstream os;
  os << "ratchet-configuration v1\n";
  os << "L " << format_double(L) << "\n";
  os << "support_radius " << c.support_radius << "\n";
  for (const auto& [site, deme] : c.demes) {
    for (const auto& [k, n] : deme.counts) {
      if (n != 0) os << site << " " << k << " " << n << "\n";
    }
  }
  return os.str();
}

ParsedConfiguration configuration_from_text(std::string_view text) {
  ParsedConfiguration out;
  std::istringstream is{std::string(text)};
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what, int col = 1) -> ParseError {
    return ParseError("configuration: " + what, lineno, col);
  };
  if (!std::getline(is, line) || line != "ratchet-configuration v1") {
    lineno = 1;
    throw fail("missing header");
  }
  lineno = 1;
  bool have_l = false;
  bool have_radius = false;
  int radius = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string first;
    ls >> first;
    if (first == "L") {
      if (!(ls >> out.L) || !(out.L > 0.0)) throw fail("bad L value");
      have_l = true;
    } else if (first == "support_radius") {
      if (!(ls >> radius) || radius < 0) throw fail("bad support_radius");
      have_radius = true;
    } else {
      int site = 0;
      int k = 0;
      std::int64_t n = 0;
      auto [p1, e1] = std::from_chars(first.data(), first.data() + first.size(), site);
      if (e1 != std::errc{} || p1 != first.data() + first.size()) {
        throw fail("bad site index '" + first + "'");
      }
      if (!(ls >> k >> n) || k < 0 || n <= 0) throw fail("bad (k, count) pair");
      std::string rest;
      if (ls >> rest) throw fail("trailing tokens");
      out.config.add(site, k, n);
    }
  }
  if (!have_l || !have_radius) {
    throw ParseError("configuration: header incomplete", lineno, 1);
  }
  out.config.support_radius = std::max(out.config.support_radius, radius);
  return out;
}

Configuration uniform_block(double L, double half_width, std::int64_t occupancy) {
  Configuration c;
  int lo = static_cast<int>(std::ceil(-half_width * L - 1e-9));
  int hi = static_cast<int>(std::floor(half_width * L + 1e-9));
  for (int site = lo; site <= hi; ++site) c.add(site, 0, occupancy);
  return c;
}

}  // namespace ratchet
