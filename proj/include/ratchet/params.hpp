#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ratchet/poly.hpp"

namespace ratchet {

/// Fitness profile s_k of a particle carrying k mutations.
/// Either the geometric family s_k = (1-s)^k or an explicit list extended by
/// zero beyond its length.
class FitnessSpec {
 public:
  static FitnessSpec geometric(double s) {
    FitnessSpec f;
    f.kind_ = Kind::Geometric;
    f.s_ = s;
    return f;
  }

  static FitnessSpec explicit_list(std::vector<double> values) {
    FitnessSpec f;
    f.kind_ = Kind::Explicit;
    f.values_ = std::move(values);
    return f;
  }

  bool is_geometric() const { return kind_ == Kind::Geometric; }
  double geometric_s() const { return s_; }
  const std::vector<double>& values() const { return values_; }

  /// s_k, defined for every k >= 0.
  double at(int k) const {
    if (k < 0) return 0.0;
    if (kind_ == Kind::Geometric) {
      if (k == 0) return 1.0;
      return std::pow(1.0 - s_, static_cast<double>(k));
    }
    if (static_cast<std::size_t>(k) < values_.size()) return values_[k];
    return 0.0;
  }

 private:
  enum class Kind { Geometric, Explicit };
  Kind kind_ = Kind::Geometric;
  double s_ = 0.5;
  std::vector<double> values_;
};

struct ModelParams {
  double L = 1.0;        // inverse lattice spacing; deme i sits at i/L
  double m = 1.0;        // per-particle migration attempt rate
  std::int64_t N = 1;    // carrying-capacity scale
  double mu = 0.0;       // mutation probability at birth
  FitnessSpec fitness = FitnessSpec::geometric(0.5);
  Polynomial q_plus;     // per-capita birth polynomial, argument u/N
  Polynomial q_minus;    // per-capita death polynomial, argument u/N
};

/// Truncation (lambda_n, K_n) defining the approximating process, plus the
/// optional occupancy cutoff kappa of the kappa-truncated dominating process.
struct TruncationParams {
  double lambda = 10.0;              // half-width of the active box
  int K = 8;                         // reproduction mutation cutoff
  std::optional<std::int64_t> kappa; // birth cutoff occupancy scale

  /// Largest site index inside the box: |i| <= L*lambda.
  int max_site_index(double L) const {
    return static_cast<int>(std::floor(L * lambda + 1e-9));
  }
};

enum class ParamViolation {
  DegreeViolation,
  NegativePolynomial,
  FitnessViolation,
  DomainViolation,
};

struct ParamIssue {
  ParamViolation kind;
  std::string detail;
};

struct ValidationReport {
  std::vector<ParamIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

/// Checks the standing assumptions: s_0 = 1, s_k >= 0 non-increasing and
/// vanishing; q_+, q_- non-negative on [0, inf) with 0 <= deg q_+ < deg q_-;
/// scalar parameter domains.
ValidationReport validate_params(const ModelParams& p);

/// poly(u/N); the scaled per-capita rate.
inline double q_scaled(const Polynomial& poly, std::int64_t N, double u) {
  return poly(u / static_cast<double>(N));
}

namespace presets {

/// q_+ == 1, q_-(u) = u.
ModelParams fisher_kpp(double L = 1.0, double m = 1.0, std::int64_t N = 1,
                       double mu = 0.1, double s = 0.3);

/// q_+(u) = B u + 1, q_-(u) = u (B u + 1); B measures local cooperation.
ModelParams cooperative(double B, double L = 1.0, double m = 1.0,
                        std::int64_t N = 1, double mu = 0.1, double s = 0.3);

}  // namespace presets

}  // namespace ratchet
