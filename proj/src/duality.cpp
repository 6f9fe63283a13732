#include "ratchet/duality.hpp"

#include <algorithm>
#include <cmath>

#include "ratchet/engine.hpp"
#include "ratchet/errors.hpp"
#include "ratchet/parallel.hpp"
#include "ratchet/rates.hpp"

namespace ratchet {

double poisson_poly(std::int64_t N, std::int64_t j, std::int64_t i) {
  if (j <= 0 || i < 0) return 1.0;
  double acc = 1.0;
  double scale = static_cast<double>(N);
  for (std::int64_t f = 0; f < j; ++f) {
    acc *= static_cast<double>(i - f) / scale;
    if (acc == 0.0) break;
  }
  return acc;
}

double duality_fn(const CountConfig& xi, const CountConfig& zeta,
                  std::int64_t N) {
  double acc = 1.0;
  for (const auto& [site, j] : xi) {
    if (j <= 0) continue;
    auto it = zeta.find(site);
    std::int64_t i = it == zeta.end() ? 0 : it->second;
    acc *= poisson_poly(N, j, i);
    if (acc == 0.0) break;
  }
  return acc;
}

namespace {

std::int64_t count_at(const CountConfig& c, int site) {
  auto it = c.find(site);
  return it == c.end() ? 0 : it->second;
}

CountConfig with_move(const CountConfig& c, int from, int to) {
  CountConfig out = c;
  if (--out[from] == 0) out.erase(from);
  ++out[to];
  return out;
}

}  // namespace

double migration_generator_apply(GeneratorSide side, const CountConfig& xi,
                                 const CountConfig& zeta, const ModelParams& p,
                                 const TruncationParams& t) {
  const CountConfig& moving = side == GeneratorSide::First ? xi : zeta;
  int M = t.max_site_index(p.L);
  double acc = 0.0;
  double base = duality_fn(xi, zeta, p.N);
  for (const auto& [site, n] : moving) {
    if (n <= 0) continue;
    if (site < -M || site > M) continue;  // frozen outside the box
    for (int dz : {-1, +1}) {
      int target = site + dz;
      if (target < -M || target > M) continue;
      CountConfig moved = with_move(moving, site, target);
      double value = side == GeneratorSide::First
                         ? duality_fn(moved, zeta, p.N)
                         : duality_fn(xi, moved, p.N);
      acc += static_cast<double>(n) * (value - base);
    }
  }
  return 0.5 * p.m * acc;
}

Matrix Matrix::identity(int n) {
  Matrix m;
  m.n = n;
  m.a.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

Matrix Matrix::multiply(const Matrix& other) const {
  Matrix out;
  out.n = n;
  out.a.assign(a.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      double v = at(i, k);
      if (v == 0.0) continue;
      for (int j = 0; j < n; ++j) out.at(i, j) += v * other.at(k, j);
    }
  }
  return out;
}

Matrix matrix_exponential(const Matrix& q, double time) {
  int n = q.n;
  Matrix a = q;
  for (double& v : a.a) v *= time;
  double norm = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += std::abs(a.at(i, j));
    norm = std::max(norm, row);
  }
  int squarings = 0;
  while (norm > 0.5) {
    norm *= 0.5;
    ++squarings;
  }
  double scale = std::ldexp(1.0, -squarings);
  for (double& v : a.a) v *= scale;

  // Taylor kernel; ||a|| <= 1/2 makes 24 terms far below 1e-10.
  Matrix result = Matrix::identity(n);
  Matrix term = Matrix::identity(n);
  for (int j = 1; j <= 24; ++j) {
    term = term.multiply(a);
    for (double& v : term.a) v /= static_cast<double>(j);
    for (std::size_t i = 0; i < result.a.size(); ++i) result.a[i] += term.a[i];
  }
  for (int s = 0; s < squarings; ++s) result = result.multiply(result);
  return result;
}

double RwKernel::probability(int from_site, int to_site) const {
  auto lookup = [&](int site) -> int {
    auto it = std::lower_bound(sites.begin(), sites.end(), site);
    if (it == sites.end() || *it != site) return -1;
    return static_cast<int>(it - sites.begin());
  };
  int r = lookup(from_site);
  int c = lookup(to_site);
  if (r < 0 || c < 0) return from_site == to_site ? 1.0 : 0.0;
  return transition.at(r, c);
}

RwKernel rw_kernel(const ModelParams& p, const TruncationParams& t,
                   double time) {
  int M = t.max_site_index(p.L);
  int n = 2 * M + 1;
  if (n > 2000) {
    throw SizeLimit("rw_kernel: active box has " + std::to_string(n) +
                    " sites; dense exponentiation capped at 2000");
  }
  RwKernel kernel;
  kernel.time = time;
  kernel.sites.resize(n);
  for (int i = 0; i < n; ++i) kernel.sites[i] = i - M;
  kernel.generator.n = n;
  kernel.generator.a.assign(static_cast<std::size_t>(n) * n, 0.0);
  double half = 0.5 * p.m;
  for (int i = 0; i < n; ++i) {
    if (i > 0) {
      kernel.generator.at(i, i - 1) = half;
      kernel.generator.at(i, i) -= half;
    }
    if (i + 1 < n) {
      kernel.generator.at(i, i + 1) = half;
      kernel.generator.at(i, i) -= half;
    }
  }
  kernel.transition = matrix_exponential(kernel.generator, time);
  return kernel;
}

McEstimate correlation_mc(const Configuration& init, const CountConfig& xi,
                          const ModelParams& p, const TruncationParams& t,
                          double time, std::uint64_t replicates,
                          std::uint64_t seed, unsigned threads) {
  CountConfig zeta0 = zeta_init_from(init, p, t);
  auto values = run_replicates<double>(replicates, threads, [&](std::uint64_t rep) {
    if (time <= 0.0) return duality_fn(xi, zeta0, p.N);
    SimulateOptions opt;
    opt.horizon = time;
    opt.seed = seed;
    opt.replicate = rep;
    opt.record_events = false;
    Trajectory traj = simulate_zeta(zeta0, p, t, opt);
    CountConfig zeta_t;
    for (const auto& [site, deme] : traj.final_config.demes) {
      zeta_t[site] = deme.total();
    }
    return duality_fn(xi, zeta_t, p.N);
  });
  MeanSe ms = mean_se(values);
  return {ms.mean, ms.se, ms.n};
}

namespace {

/// (L^n_r phi_I^y)(eta): net expected drift of sum_{k in I} eta_k(y).
double reaction_drift(const DemeState& u, const std::set<int>& mutation_set,
                      const ModelParams& p, const TruncationParams& t) {
  if (u.empty()) return 0.0;
  double acc = 0.0;
  for (int k : mutation_set) {
    if (k <= t.K) acc += birth_rate(k, u, p, t.K);
    acc -= death_rate(k, u, p);
  }
  return acc;
}

}  // namespace

GreensReport greens_check(const Configuration& init,
                          const std::set<int>& mutation_set, int site,
                          const ModelParams& p, const TruncationParams& t,
                          double time, std::uint64_t replicates,
                          std::uint64_t seed, int quadrature_grid,
                          unsigned threads) {
  GreensReport report;
  if (mutation_set.empty() || replicates == 0) return report;
  int grid = std::max(2, quadrature_grid);

  std::vector<double> times(grid);
  for (int j = 0; j < grid; ++j) {
    times[j] = time * static_cast<double>(j) / (grid - 1);
  }
  // Kernel rows from `site` at every time gap T - t_j.
  int M = t.max_site_index(p.L);
  std::vector<std::vector<double>> kernel_rows(grid);
  for (int j = 0; j < grid; ++j) {
    RwKernel k = rw_kernel(p, t, time - times[j]);
    std::vector<double> row(static_cast<std::size_t>(2 * M + 1));
    for (int i = 0; i < 2 * M + 1; ++i) {
      row[i] = k.probability(site, i - M);
    }
    kernel_rows[j] = std::move(row);
  }

  report.kernel_term = 0.0;
  {
    const auto& row0 = kernel_rows[0];  // P(T)
    for (const auto& [y, deme] : init.demes) {
      if (y < -M || y > M) continue;
      double phi = 0.0;
      for (int k : mutation_set) phi += static_cast<double>(deme.at(k));
      report.kernel_term += row0[static_cast<std::size_t>(y + M)] * phi;
    }
  }

  struct Sample {
    double lhs;
    double integral;
  };
  auto samples = run_replicates<Sample>(replicates, threads, [&](std::uint64_t rep) {
    SimulateOptions opt;
    opt.horizon = time;
    opt.seed = seed;
    opt.replicate = rep;
    opt.record_events = false;
    opt.snapshot_times = times;
    Trajectory traj = simulate_eta_n(init, p, t, opt);
    std::vector<double> g(grid, 0.0);
    for (int j = 0; j < grid; ++j) {
      const Configuration& state =
          j + 1 == grid ? traj.final_config : traj.snapshots[j].second;
      double acc = 0.0;
      for (const auto& [y, deme] : state.demes) {
        if (y < -M || y > M) continue;
        double w = kernel_rows[j][static_cast<std::size_t>(y + M)];
        if (w != 0.0) acc += w * reaction_drift(deme, mutation_set, p, t);
      }
      g[j] = acc;
    }
    double integral = 0.0;
    for (int j = 0; j + 1 < grid; ++j) {
      integral += 0.5 * (g[j] + g[j + 1]) * (times[j + 1] - times[j]);
    }
    double lhs = 0.0;
    for (int k : mutation_set) {
      lhs += static_cast<double>(traj.final_config.count(site, k));
    }
    return Sample{lhs, integral};
  });

  std::vector<double> lhs_vals(samples.size());
  std::vector<double> integral_vals(samples.size());
  std::vector<double> diff_vals(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    lhs_vals[i] = samples[i].lhs;
    integral_vals[i] = samples[i].integral;
    diff_vals[i] = samples[i].lhs - samples[i].integral;
  }
  MeanSe lhs = mean_se(lhs_vals);
  MeanSe integral = mean_se(integral_vals);
  MeanSe diff = mean_se(diff_vals);
  report.lhs_mean = lhs.mean;
  report.lhs_se = lhs.se;
  report.integral_mean = integral.mean;
  report.diff_mean = diff.mean;
  report.diff_se = diff.se;
  double denom = diff.se > 0.0 ? diff.se : 1e-300;
  report.sigma_units = std::abs(diff.mean - report.kernel_term) / denom;
  return report;
}

double poisson_tail_bound(double alpha, double r) {
  if (!(alpha > 0.0) || r < alpha) {
    throw PreconditionViolated("poisson_tail_bound needs r >= alpha > 0");
  }
  return std::exp(r * (1.0 - std::log(r / alpha)));
}

double rw_tail_bound(double L, double m, double T, double distance) {
  if (!(distance > std::exp(2.0) * m * T / L)) {
    throw PreconditionViolated("rw_tail_bound needs distance > e^2 m T / L");
  }
  return std::exp(-L * distance);
}

}  // namespace ratchet
