#pragma once

#include <Eigen/Dense>

#include <cmath>

namespace fluxswarm::nn {

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long long step = 0;

  explicit AdamState(Eigen::Index n = 0) : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
};

struct AdamSettings {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam; descends along `grad`.
inline void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& st, const AdamSettings& s) {
  ++st.step;
  st.m = s.beta1 * st.m + (1.0 - s.beta1) * grad;
  st.v = s.beta2 * st.v + (1.0 - s.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(st.step));
  params.array() -= s.lr * (st.m.array() / c1) / ((st.v.array() / c2).sqrt() + s.eps);
}

}  // namespace fluxswarm::nn
