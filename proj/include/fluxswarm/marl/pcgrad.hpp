#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace fluxswarm::marl {

/// Cosine of the angle between two gradients; 0 when either is zero.
inline double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

/// Removes from `g` its component along `ref` when the two conflict
/// (negative dot). Returns whether a projection happened.
inline bool project_conflicting(Eigen::VectorXd& g, const Eigen::VectorXd& ref) {
  const double nn = ref.squaredNorm();
  if (nn == 0.0) return false;
  const double d = g.dot(ref);
  if (d >= 0.0) return false;
  g -= (d / nn) * ref;
  return true;
}

/// Gradient surgery: each objective's gradient is projected, in a random
/// order, onto the normal plane of every original gradient it conflicts
/// with; the modified gradients are summed.
inline Eigen::VectorXd pcgrad_merge(const std::vector<Eigen::VectorXd>& grads, std::mt19937_64& rng) {
  if (grads.empty()) throw std::invalid_argument("pcgrad_merge: no gradients");
  const Eigen::Index n = grads.front().size();
  for (const auto& g : grads)
    if (g.size() != n) throw std::invalid_argument("pcgrad_merge: length mismatch");
  Eigen::VectorXd merged = Eigen::VectorXd::Zero(n);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    order.clear();
    for (std::size_t j = 0; j < grads.size(); ++j)
      if (j != i) order.push_back(j);
    std::shuffle(order.begin(), order.end(), rng);
    Eigen::VectorXd g = grads[i];
    for (std::size_t j : order) project_conflicting(g, grads[j]);
    merged += g;
  }
  return merged;
}

inline Eigen::VectorXd plain_sum(const std::vector<Eigen::VectorXd>& grads) {
  Eigen::VectorXd s = grads.front();
  for (std::size_t i = 1; i < grads.size(); ++i) s += grads[i];
  return s;
}

}  // namespace fluxswarm::marl
