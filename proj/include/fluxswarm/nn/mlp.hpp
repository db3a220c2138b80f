#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

#include "fluxswarm/core/errors.hpp"

namespace fluxswarm::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Activations of one batched forward pass, kept for the backward pass.
/// Samples are columns.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> hidden;  // post-tanh activations, one per hidden layer
  Matrix output;
};

/// Fully connected network: tanh on every hidden layer, linear output.
///
/// All weights and biases live in one flat vector, layer by layer, each
/// weight matrix column-major (out × in) followed by its bias.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw std::invalid_argument("Mlp needs at least input and output sizes");
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      w_offset_.push_back(n);
      n += static_cast<std::size_t>(sizes_[l]) * sizes_[l + 1];
      b_offset_.push_back(n);
      n += static_cast<std::size_t>(sizes_[l + 1]);
    }
    params_ = Vector::Zero(static_cast<Eigen::Index>(n));
  }

  const std::vector<int>& sizes() const { return sizes_; }
  int n_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  Eigen::Index n_params() const { return params_.size(); }

  Vector& params() { return params_; }
  const Vector& params() const { return params_; }

  Eigen::Map<Matrix> weight(int l) { return {params_.data() + w_offset_[l], sizes_[l + 1], sizes_[l]}; }
  Eigen::Map<const Matrix> weight(int l) const { return {params_.data() + w_offset_[l], sizes_[l + 1], sizes_[l]}; }
  Eigen::Map<Vector> bias(int l) { return {params_.data() + b_offset_[l], sizes_[l + 1]}; }
  Eigen::Map<const Vector> bias(int l) const { return {params_.data() + b_offset_[l], sizes_[l + 1]}; }

  /// Orthogonal weights scaled by the per-layer gain, zero biases.
  void init_orthogonal(std::mt19937_64& rng, const std::vector<double>& gains) {
    if (static_cast<int>(gains.size()) != n_layers()) throw std::invalid_argument("one gain per layer");
    params_.setZero();
    for (int l = 0; l < n_layers(); ++l) weight(l) = orthogonal(sizes_[l + 1], sizes_[l], rng) * gains[l];
  }

  Matrix forward(const Matrix& x, ForwardCache* cache = nullptr) const {
    Matrix h = x;
    if (cache) {
      cache->input = x;
      cache->hidden.clear();
    }
    for (int l = 0; l < n_layers(); ++l) {
      Matrix z = weight(l) * h;
      z.colwise() += bias(l);
      if (l + 1 < n_layers()) {
        h = z.array().tanh().matrix();
        if (cache) cache->hidden.push_back(h);
      } else {
        h = std::move(z);
      }
    }
    if (cache) cache->output = h;
    return h;
  }

  /// Gradient of a scalar loss with respect to all parameters, given
  /// dL/d(output) for the batch that produced `cache`.
  Vector backward(const ForwardCache& cache, const Matrix& d_output) const {
    Vector grad = Vector::Zero(params_.size());
    Matrix delta = d_output;
    for (int l = n_layers() - 1; l >= 0; --l) {
      const Matrix& below = l == 0 ? cache.input : cache.hidden[static_cast<std::size_t>(l - 1)];
      Eigen::Map<Matrix>(grad.data() + w_offset_[l], sizes_[l + 1], sizes_[l]).noalias() = delta * below.transpose();
      Eigen::Map<Vector>(grad.data() + b_offset_[l], sizes_[l + 1]) = delta.rowwise().sum();
      if (l > 0) {
        Matrix up = weight(l).transpose() * delta;
        delta = up.array() * (1.0 - below.array().square());
      }
    }
    return grad;
  }

  /// Random (rows × cols) matrix with orthonormal rows or columns, whichever
  /// is fewer.
  static Matrix orthogonal(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    const int big = std::max(rows, cols);
    const int small = std::min(rows, cols);
    Matrix a(big, small);
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = nd(rng);
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ() * Matrix::Identity(big, small);
    const Matrix r = qr.matrixQR().topLeftCorner(small, small);
    for (int k = 0; k < small; ++k)
      if (r(k, k) < 0.0) q.col(k) *= -1.0;
    return rows >= cols ? q : Matrix(q.transpose());
  }

 private:
  std::vector<int> sizes_;
  std::vector<std::size_t> w_offset_;
  std::vector<std::size_t> b_offset_;
  Vector params_;
};

}  // namespace fluxswarm::nn
