#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace ratchet {

/// Real polynomial with coefficients stored lowest degree first.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
  }

  const std::vector<double>& coeffs() const { return coeffs_; }

  /// Degree, with the zero polynomial mapped to -1.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

  bool is_zero() const { return coeffs_.empty(); }

  double leading_coefficient() const {
    return coeffs_.empty() ? 0.0 : coeffs_.back();
  }

  double operator()(double u) const {
    double acc = 0.0;
    for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * u + coeffs_[i];
    return acc;
  }

  Polynomial derivative() const {
    if (coeffs_.size() <= 1) return Polynomial{};
    std::vector<double> d(coeffs_.size() - 1);
    for (std::size_t i = 1; i < coeffs_.size(); ++i) {
      d[i - 1] = coeffs_[i] * static_cast<double>(i);
    }
    return Polynomial(std::move(d));
  }

  /// Upper bound on the modulus of every real root (Cauchy bound).
  double root_bound() const {
    if (coeffs_.size() <= 1) return 1.0;
    double lead = std::abs(coeffs_.back());
    double mx = 0.0;
    for (std::size_t i = 0; i + 1 < coeffs_.size(); ++i) {
      mx = std::max(mx, std::abs(coeffs_[i]));
    }
    return 1.0 + mx / lead;
  }

  /// Grid check for non-negativity on [lo, hi]; geometric refinement near 0.
  bool non_negative_on(double lo, double hi, int grid_points = 512) const {
    if (is_zero()) return true;
    if ((*this)(lo) < 0.0 || (*this)(hi) < 0.0) return false;
    for (int i = 1; i < grid_points; ++i) {
      double u = lo + (hi - lo) * static_cast<double>(i) / grid_points;
      if ((*this)(u) < 0.0) return false;
    }
    // Geometric grid towards lo catches sign dips close to the left endpoint.
    double span = hi - lo;
    for (int j = 1; j <= 64; ++j) {
      span *= 0.5;
      if ((*this)(lo + span) < 0.0) return false;
    }
    return true;
  }

  /// Grid-validated non-negativity on [0, inf): positive leading coefficient
  /// plus evaluation up to the Cauchy root bound. Exact root isolation is not
  /// attempted.
  bool non_negative_on_half_line() const {
    if (is_zero()) return true;
    if (leading_coefficient() < 0.0) return false;
    return non_negative_on(0.0, root_bound());
  }

  /// Grid-validated monotonicity (non-decreasing) on [lo, inf).
  bool non_decreasing_from(double lo) const {
    Polynomial d = derivative();
    if (d.is_zero()) return true;
    if (d.leading_coefficient() < 0.0) return false;
    return d.non_negative_on(lo, std::max(d.root_bound(), lo + 1.0));
  }

  std::string to_string() const;

 private:
  std::vector<double> coeffs_;
};

}  // namespace ratchet
