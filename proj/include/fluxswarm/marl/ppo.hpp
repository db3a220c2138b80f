#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace fluxswarm::marl {

inline constexpr double kAdvantageStdFloor = 1e-8;

/// Shifts to zero mean and scales to unit (population) standard deviation,
/// with the standard deviation floored.
inline void normalize_advantages(Eigen::VectorXd& a) {
  if (a.size() == 0) return;
  const double mean = a.mean();
  a.array() -= mean;
  const double sd = std::sqrt(a.squaredNorm() / static_cast<double>(a.size()));
  a /= std::max(sd, kAdvantageStdFloor);
}

struct SurrogateResult {
  double loss = 0.0;
  Eigen::VectorXd d_log_prob;  // dloss/d(new log-prob) per sample
  int clipped = 0;             // samples with |r - 1| > clip
};

/// Negated clipped surrogate, -mean(min(r A, clip(r, 1-e, 1+e) A)), and its
/// gradient. The gradient flows only where the unclipped term is the min.
inline SurrogateResult clipped_surrogate(const Eigen::VectorXd& new_log_prob, const Eigen::VectorXd& old_log_prob,
                                         const Eigen::VectorXd& adv, double clip) {
  const Eigen::Index n = adv.size();
  SurrogateResult res;
  res.d_log_prob = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double r = std::exp(new_log_prob(j) - old_log_prob(j));
    const double rc = std::clamp(r, 1.0 - clip, 1.0 + clip);
    const double unclipped = r * adv(j);
    const double clipped = rc * adv(j);
    if (unclipped <= clipped) {
      res.loss -= unclipped;
      res.d_log_prob(j) = -unclipped / static_cast<double>(n);
    } else {
      res.loss -= clipped;
    }
    res.clipped += std::abs(r - 1.0) > clip;
  }
  res.loss /= static_cast<double>(n);
  return res;
}

/// Sum over heads of the mean squared error; samples are columns. Writes
/// the gradient with respect to `pred` when asked.
inline double critic_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target, Eigen::MatrixXd* d_pred = nullptr) {
  const Eigen::MatrixXd diff = pred - target;
  const double b = static_cast<double>(pred.cols());
  if (d_pred) *d_pred = 2.0 * diff / b;
  return diff.squaredNorm() / b;
}

}  // namespace fluxswarm::marl
