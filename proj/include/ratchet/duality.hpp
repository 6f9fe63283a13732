#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "ratchet/configuration.hpp"
#include "ratchet/params.hpp"

namespace ratchet {

/// One-type configuration on the active box: site -> particle count.
using CountConfig = std::map<int, std::int64_t>;

/// Scaled Poisson polynomial D^N_j(i): 1 when j <= 0 or i < 0, otherwise the
/// falling factorial i(i-1)...(i-j+1) / N^j.
double poisson_poly(std::int64_t N, std::int64_t j, std::int64_t i);

/// Product over sites of D^N_{xi(x)}(zeta(x)).
double duality_fn(const CountConfig& xi, const CountConfig& zeta,
                  std::int64_t N);

enum class GeneratorSide { First, Second };

/// (m/2) L^n_m applied to the duality function in the chosen variable,
/// evaluated by explicit enumeration of single-particle moves with the
/// boundary suppression of the active box.
double migration_generator_apply(GeneratorSide side, const CountConfig& xi,
                                 const CountConfig& zeta, const ModelParams& p,
                                 const TruncationParams& t);

/// Dense square matrix, row major.
struct Matrix {
  int n = 0;
  std::vector<double> a;
  double& at(int r, int c) { return a[static_cast<std::size_t>(r) * n + c]; }
  double at(int r, int c) const {
    return a[static_cast<std::size_t>(r) * n + c];
  }
  static Matrix identity(int n);
  Matrix multiply(const Matrix& other) const;
};

/// exp(time * Q) by scaling and squaring with a fixed-order Taylor kernel.
Matrix matrix_exponential(const Matrix& q, double time);

/// Reflected random walk on the active box: sites, generator, P(time).
struct RwKernel {
  std::vector<int> sites;  // site indices, ascending
  Matrix generator;
  Matrix transition;       // P(time)
  double time = 0.0;

  double probability(int from_site, int to_site) const;
};

/// Kernel of the rate-m simple random walk with suppressed out-jumps.
/// Throws SizeLimit when the box exceeds 2000 sites.
RwKernel rw_kernel(const ModelParams& p, const TruncationParams& t, double time);

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::uint64_t replicates = 0;
};

/// Monte-Carlo estimate of E[D(xi, zeta^{n,kappa}(time))] over independent
/// dominating-process runs started from the per-deme totals of `init`.
McEstimate correlation_mc(const Configuration& init, const CountConfig& xi,
                          const ModelParams& p, const TruncationParams& t,
                          double time, std::uint64_t replicates,
                          std::uint64_t seed, unsigned threads = 1);

struct GreensReport {
  double lhs_mean = 0.0;       // MC mean of sum_{k in I} eta_k(T, x)
  double lhs_se = 0.0;
  double kernel_term = 0.0;    // sum_y P_x(T, y) phi_I^y(init), deterministic
  double integral_mean = 0.0;  // MC mean of the smoothed reaction integral
  double diff_mean = 0.0;      // mean of per-replicate LHS - integral
  double diff_se = 0.0;
  double sigma_units = 0.0;    // |diff_mean - kernel_term| / diff_se
};

/// Both sides of the Green's-function representation on shared samples.
GreensReport greens_check(const Configuration& init,
                          const std::set<int>& mutation_set, int site,
                          const ModelParams& p, const TruncationParams& t,
                          double time, std::uint64_t replicates,
                          std::uint64_t seed, int quadrature_grid = 64,
                          unsigned threads = 1);

/// Chernoff bound e^{r(1 - log(r/alpha))} for P(Poisson(alpha) >= r);
/// requires r >= alpha.
double poisson_tail_bound(double alpha, double r);

/// e^{-L d}; bounds the probability that the reflected rate-m walk sits a
/// distance >= d from its start by time T. Requires d > e^2 m T / L.
double rw_tail_bound(double L, double m, double T, double distance);

}  // namespace ratchet
