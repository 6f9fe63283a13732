#include "ratchet/params.hpp"

#include <sstream>

namespace ratchet {

std::string Polynomial::to_string() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (i) os << ", ";
    os << coeffs_[i];
  }
  os << "]";
  return os.str();
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& issue : issues) {
    switch (issue.kind) {
      case ParamViolation::DegreeViolation: os << "DegreeViolation: "; break;
      case ParamViolation::NegativePolynomial: os << "NegativePolynomial: "; break;
      case ParamViolation::FitnessViolation: os << "FitnessViolation: "; break;
      case ParamViolation::DomainViolation: os << "DomainViolation: "; break;
    }
    os << issue.detail << "\n";
  }
  return os.str();
}

namespace {

void check_fitness(const ModelParams& p, ValidationReport& report) {
  auto fail = [&](const std::string& detail) {
    report.issues.push_back({ParamViolation::FitnessViolation, detail});
  };
  if (p.fitness.is_geometric()) {
    double s = p.fitness.geometric_s();
    if (!(s > 0.0 && s <= 1.0)) {
      fail("geometric selection coefficient must lie in (0, 1], got " +
           std::to_string(s));
    }
    return;
  }
  const auto& v = p.fitness.values();
  if (v.empty()) {
    fail("explicit fitness list is empty");
    return;
  }
  if (v[0] != 1.0) fail("s_0 must equal 1, got " + std::to_string(v[0]));
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k] < 0.0) {
      fail("s_" + std::to_string(k) + " is negative");
      break;
    }
  }
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    if (v[k] < v[k + 1]) {
      fail("fitness increases at k=" + std::to_string(k + 1));
      break;
    }
  }
  // The zero tail makes s_k -> 0 automatic; the final listed value only has
  // to be non-negative, which was checked above.
}

void check_polynomials(const ModelParams& p, ValidationReport& report) {
  if (p.q_plus.is_zero() || p.q_minus.is_zero() ||
      p.q_plus.degree() >= p.q_minus.degree()) {
    report.issues.push_back(
        {ParamViolation::DegreeViolation,
         "need 0 <= deg q_+ < deg q_-, got deg q_+ = " +
             std::to_string(p.q_plus.degree()) +
             ", deg q_- = " + std::to_string(p.q_minus.degree())});
  }
  if (!p.q_plus.non_negative_on_half_line()) {
    report.issues.push_back(
        {ParamViolation::NegativePolynomial, "q_+ takes negative values on [0, inf)"});
  }
  if (!p.q_minus.non_negative_on_half_line()) {
    report.issues.push_back(
        {ParamViolation::NegativePolynomial, "q_- takes negative values on [0, inf)"});
  }
}

void check_domains(const ModelParams& p, ValidationReport& report) {
  auto fail = [&](const std::string& detail) {
    report.issues.push_back({ParamViolation::DomainViolation, detail});
  };
  if (!(p.L > 0.0)) fail("L must be positive");
  if (!(p.m >= 0.0)) fail("m must be non-negative");
  if (p.N < 1) fail("N must be a positive integer");
  if (!(p.mu >= 0.0 && p.mu <= 1.0)) fail("mu must lie in [0, 1]");
}

}  // namespace

ValidationReport validate_params(const ModelParams& p) {
  ValidationReport report;
  check_domains(p, report);
  check_fitness(p, report);
  check_polynomials(p, report);
  return report;
}

namespace presets {

ModelParams fisher_kpp(double L, double m, std::int64_t N, double mu, double s) {
  ModelParams p;
  p.L = L;
  p.m = m;
  p.N = N;
  p.mu = mu;
  p.fitness = FitnessSpec::geometric(s);
  p.q_plus = Polynomial({1.0});
  p.q_minus = Polynomial({0.0, 1.0});
  return p;
}

ModelParams cooperative(double B, double L, double m, std::int64_t N, double mu,
                        double s) {
  ModelParams p;
  p.L = L;
  p.m = m;
  p.N = N;
  p.mu = mu;
  p.fitness = FitnessSpec::geometric(s);
  p.q_plus = Polynomial({1.0, B});
  p.q_minus = Polynomial({0.0, 1.0, B});
  return p;
}

}  // namespace presets

}  // namespace ratchet
