#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace fluxswarm::nn {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

inline double clamp_log_std(double s) { return std::clamp(s, kLogStdMin, kLogStdMax); }

/// Factorized 2D Gaussian policy head.
struct GaussianHead {
  double mean[2] = {0.0, 0.0};
  double log_std[2] = {0.0, 0.0};  // already clamped
};

inline double log_prob(const GaussianHead& h, const double a[2]) {
  double lp = 0.0;
  for (int d = 0; d < 2; ++d) {
    const double z = (a[d] - h.mean[d]) * std::exp(-h.log_std[d]);
    lp += -0.5 * z * z - h.log_std[d] - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  return lp;
}

inline double entropy(const GaussianHead& h) {
  const double c = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
  return 2.0 * c + h.log_std[0] + h.log_std[1];
}

struct ActionSample {
  double raw[2];       // unclamped Gaussian draw, used for log-probabilities
  double executed[2];  // clamped to [-1, 1]
  double log_prob;
};

inline ActionSample sample_action(const GaussianHead& h, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  ActionSample s{};
  for (int d = 0; d < 2; ++d) {
    s.raw[d] = h.mean[d] + std::exp(h.log_std[d]) * nd(rng);
    s.executed[d] = std::clamp(s.raw[d], -1.0, 1.0);
  }
  s.log_prob = log_prob(h, s.raw);
  return s;
}

/// The mean action, clamped; used for deterministic evaluation.
inline ActionSample mode_action(const GaussianHead& h) {
  ActionSample s{};
  for (int d = 0; d < 2; ++d) {
    s.raw[d] = h.mean[d];
    s.executed[d] = std::clamp(h.mean[d], -1.0, 1.0);
  }
  s.log_prob = log_prob(h, s.raw);
  return s;
}

}  // namespace fluxswarm::nn
