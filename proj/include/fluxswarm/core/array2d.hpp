#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace fluxswarm {

/// Dense 2D array with the first index slowest (row-major over (i, j)).
///
/// Grid quantities use i along the channel (x) and j across it (y), so
/// element (i, j) lives at i * extent1 + j. This is also the on-disk order
/// of snapshot files.
template <typename T>
class Array2D {
 public:
  Array2D() = default;
  Array2D(int n0, int n1, T fill = T{})
      : n0_(n0), n1_(n1), data_(static_cast<std::size_t>(n0) * n1, fill) {}

  int extent0() const { return n0_; }
  int extent1() const { return n1_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(int i, int j) {
    assert(i >= 0 && i < n0_ && j >= 0 && j < n1_);
    return data_[static_cast<std::size_t>(i) * n1_ + j];
  }
  const T& operator()(int i, int j) const {
    assert(i >= 0 && i < n0_ && j >= 0 && j < n1_);
    return data_[static_cast<std::size_t>(i) * n1_ + j];
  }

  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  friend bool operator==(const Array2D&, const Array2D&) = default;

 private:
  int n0_ = 0;
  int n1_ = 0;
  std::vector<T> data_;
};

using Field2D = Array2D<double>;

inline double max_abs(const Field2D& f) {
  double m = 0.0;
  for (double v : f.flat()) m = std::max(m, std::abs(v));
  return m;
}

inline bool all_finite(const Field2D& f) {
  return std::all_of(f.flat().begin(), f.flat().end(), [](double v) { return std::isfinite(v); });
}

}  // namespace fluxswarm
