#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fluxswarm/nn/gaussian.hpp"
#include "fluxswarm/nn/mlp.hpp"

namespace fluxswarm::nn {

inline constexpr int kHidden = 256;
inline constexpr int kActionDim = 2;

/// Shared decentralized policy: local observation -> Gaussian over 2 actions.
/// Output rows 0-1 are the mean, rows 2-3 the (unclamped) log std.
struct Actor {
  Mlp net;

  Actor() = default;
  explicit Actor(int obs_dim) : net({obs_dim, kHidden, kHidden, 2 * kActionDim}) {}

  static Actor make(int obs_dim, std::mt19937_64& rng) {
    Actor a(obs_dim);
    a.net.init_orthogonal(rng, {std::numbers::sqrt2, std::numbers::sqrt2, 0.01});
    return a;
  }

  static GaussianHead head(const Matrix& out, Eigen::Index col) {
    GaussianHead h;
    for (int d = 0; d < kActionDim; ++d) {
      h.mean[d] = out(d, col);
      h.log_std[d] = clamp_log_std(out(kActionDim + d, col));
    }
    return h;
  }

  GaussianHead forward_one(const double* obs) const {
    const Matrix x = Eigen::Map<const Vector>(obs, net.input_dim());
    return head(net.forward(x), 0);
  }
};

/// Centralized critic: joint observation -> one value per objective.
struct Critic {
  Mlp net;

  Critic() = default;
  Critic(int joint_obs_dim, int n_objectives) : net({joint_obs_dim, kHidden, kHidden, n_objectives}) {}

  static Critic make(int joint_obs_dim, int n_objectives, std::mt19937_64& rng) {
    Critic c(joint_obs_dim, n_objectives);
    c.net.init_orthogonal(rng, {std::numbers::sqrt2, std::numbers::sqrt2, 1.0});
    return c;
  }
};

/// Gradient of a loss through the Gaussian head into the actor output layer.
/// `d_mean`/`d_log_std` hold dL/dμ and dL/d(clamped log σ) per sample
/// (2 × B); positions whose raw log σ was clamped receive no gradient.
inline Matrix actor_output_grad(const Matrix& raw_out, const Matrix& d_mean, const Matrix& d_log_std) {
  Matrix d(raw_out.rows(), raw_out.cols());
  d.topRows(kActionDim) = d_mean;
  for (Eigen::Index j = 0; j < raw_out.cols(); ++j) {
    for (int k = 0; k < kActionDim; ++k) {
      const double s = raw_out(kActionDim + k, j);
      d(kActionDim + k, j) = (s < kLogStdMin || s > kLogStdMax) ? 0.0 : d_log_std(k, j);
    }
  }
  return d;
}

}  // namespace fluxswarm::nn
