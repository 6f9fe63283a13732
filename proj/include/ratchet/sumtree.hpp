#pragma once

#include <cstddef>
#include <vector>

namespace ratchet {

/// Binary sum tree over a fixed number of leaves holding non-negative rates.
/// set() and sample() are O(log n). Ties at cumulative-rate boundaries resolve
/// to the lowest leaf index.
class SumTree {
 public:
  explicit SumTree(std::size_t leaves = 0) { reset(leaves); }

  void reset(std::size_t leaves) {
    size_ = 1;
    while (size_ < leaves) size_ <<= 1;
    if (leaves == 0) size_ = 1;
    leaves_ = leaves;
    node_.assign(2 * size_, 0.0);
  }

  std::size_t leaves() const { return leaves_; }

  double total() const { return node_[1]; }

  double leaf(std::size_t i) const { return node_[size_ + i]; }

  void set(std::size_t i, double value) {
    std::size_t n = size_ + i;
    node_[n] = value;
    for (n >>= 1; n >= 1; n >>= 1) {
      node_[n] = node_[2 * n] + node_[2 * n + 1];
      if (n == 1) break;
    }
  }

  /// Leaf index whose cumulative interval contains r in [0, total()).
  std::size_t sample(double r) const {
    std::size_t n = 1;
    while (n < size_) {
      double left = node_[2 * n];
      double right = node_[2 * n + 1];
      if ((r <= left && left > 0.0) || right <= 0.0) {
        n = 2 * n;
      } else {
        r -= left;
        n = 2 * n + 1;
      }
    }
    return n - size_;
  }

  /// Recompute internal nodes from the leaves; flushes accumulated
  /// floating-point drift in long runs.
  void rebuild() {
    for (std::size_t n = size_ - 1; n >= 1; --n) {
      node_[n] = node_[2 * n] + node_[2 * n + 1];
      if (n == 1) break;
    }
  }

 private:
  std::size_t size_ = 1;
  std::size_t leaves_ = 0;
  std::vector<double> node_;
};

}  // namespace ratchet
