#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fluxswarm/nn/adam.hpp"
#include "fluxswarm/nn/gaussian.hpp"
#include "fluxswarm/nn/networks.hpp"

using namespace fluxswarm::nn;

namespace {

Matrix random_matrix(int r, int c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = nd(rng);
  return m;
}

// Nonlinear scalar loss of the network output: sum(C .* Y) + 0.5 * sum(Y.^2).
double probe_loss(const Mlp& net, const Matrix& x, const Matrix& c) {
  const Matrix y = net.forward(x);
  return (c.array() * y.array()).sum() + 0.5 * y.squaredNorm();
}

// Central-difference check on `count` random parameters.
void finite_difference_check(Mlp net, std::mt19937_64& rng, int batch, int count) {
  const Matrix x = random_matrix(net.input_dim(), batch, rng);
  const Matrix c = random_matrix(net.output_dim(), batch, rng);
  ForwardCache cache;
  const Matrix y = net.forward(x, &cache);
  const Vector g = net.backward(cache, c + y);
  std::uniform_int_distribution<Eigen::Index> pick(0, net.n_params() - 1);
  const double h = 1e-5;
  int checked = 0;
  for (int k = 0; k < count; ++k) {
    const Eigen::Index p = pick(rng);
    const double keep = net.params()[p];
    net.params()[p] = keep + h;
    const double up = probe_loss(net, x, c);
    net.params()[p] = keep - h;
    const double down = probe_loss(net, x, c);
    net.params()[p] = keep;
    const double fd = (up - down) / (2 * h);
    const double scale = std::max(std::abs(fd), std::abs(g[p]));
    if (scale < 1e-7) {
      EXPECT_NEAR(g[p], fd, 1e-9) << p;
      continue;
    }
    EXPECT_LE(std::abs(g[p] - fd) / scale, 1e-4) << "param " << p << " analytic " << g[p] << " fd " << fd;
    ++checked;
  }
  EXPECT_GT(checked, count / 2);
}

}  // namespace

TEST(Actor, ZeroParamsGiveZeroHead) {
  Actor a(8);
  const double obs[8] = {0.3, 0.2, 1, -1, 0.1, 0, 0, 0.4};
  const auto h = a.forward_one(obs);
  EXPECT_EQ(h.mean[0], 0.0);
  EXPECT_EQ(h.mean[1], 0.0);
  EXPECT_EQ(h.log_std[0], 0.0);
  EXPECT_EQ(h.log_std[1], 0.0);
}

TEST(Actor, DeterministicAndLipschitzInFirstLayer) {
  std::mt19937_64 rng(1);
  Actor a = Actor::make(8, rng);
  const Matrix x = random_matrix(8, 1, rng);
  const Matrix y0 = a.net.forward(x);
  EXPECT_EQ(y0, a.net.forward(x));
  const double eps = 1e-3;
  Eigen::JacobiSVD<Matrix> s2(a.net.weight(1)), s3(a.net.weight(2));
  const double bound = eps * x.cwiseAbs().maxCoeff() * s2.singularValues()(0) * s3.singularValues()(0);
  for (int trial = 0; trial < 20; ++trial) {
    Actor b = a;
    b.net.weight(0)(trial % kHidden, trial % 8) += eps;
    EXPECT_LE((b.net.forward(x) - y0).norm(), bound * (1 + 1e-12));
  }
}

TEST(Critic, ZeroHeadsIndependentAndOrderSensitive) {
  Critic zero(128, 3);
  const Matrix x0 = Matrix::Ones(128, 1);
  EXPECT_EQ(zero.net.forward(x0), Matrix::Zero(3, 1));
  std::mt19937_64 rng(2);
  Critic c = Critic::make(128, 3, rng);
  const Matrix x = random_matrix(128, 1, rng);
  const Matrix v = c.net.forward(x);
  Critic d = c;
  d.net.weight(2).row(1).setZero();
  d.net.bias(2)(1) = 0.0;
  const Matrix w = d.net.forward(x);
  EXPECT_EQ(w(0), v(0));
  EXPECT_EQ(w(2), v(2));
  EXPECT_EQ(w(1), 0.0);
  Matrix perm = x;
  perm.topRows(8).swap(perm.middleRows(8, 8));
  EXPECT_NE(c.net.forward(perm), v);
}

TEST(Gradient, LinearLayerMatchesInput) {
  Mlp lin({3, 1});
  std::mt19937_64 rng(3);
  lin.params() = random_matrix(4, 1, rng);
  Matrix x(3, 1);
  x << 0.5, -2.0, 7.0;
  ForwardCache cache;
  lin.forward(x, &cache);
  const Vector g = lin.backward(cache, Matrix::Ones(1, 1));
  EXPECT_EQ(g.head(3), Vector(x.col(0)));
  EXPECT_EQ(g(3), 1.0);
  EXPECT_EQ(lin.backward(cache, Matrix::Zero(1, 1)), Vector::Zero(4));
}

TEST(Gradient, ActorFiniteDifferences) {
  std::mt19937_64 rng(4);
  Actor a = Actor::make(8, rng);
  a.net.params() += random_matrix(static_cast<int>(a.net.n_params()), 1, rng, 0.05);
  finite_difference_check(a.net, rng, 16, 100);
}

TEST(Gradient, CriticFiniteDifferences) {
  std::mt19937_64 rng(5);
  Critic c = Critic::make(128, 3, rng);
  finite_difference_check(c.net, rng, 8, 100);
}

TEST(Gradient, ThroughGaussianLogProb) {
  std::mt19937_64 rng(6);
  Actor a = Actor::make(8, rng);
  a.net.params() += random_matrix(static_cast<int>(a.net.n_params()), 1, rng, 0.05);
  const int B = 12;
  const Matrix x = random_matrix(8, B, rng);
  const Matrix acts = random_matrix(2, B, rng, 0.5);
  const Vector adv = random_matrix(B, 1, rng);
  auto loss = [&](const Mlp& net) {
    const Matrix out = net.forward(x);
    double l = 0.0;
    for (int j = 0; j < B; ++j) {
      const auto h = Actor::head(out, j);
      const double av[2] = {acts(0, j), acts(1, j)};
      l -= adv(j) * log_prob(h, av) / B;
    }
    return l;
  };
  ForwardCache cache;
  const Matrix out = a.net.forward(x, &cache);
  Matrix dm(2, B), ds(2, B);
  for (int j = 0; j < B; ++j) {
    const auto h = Actor::head(out, j);
    for (int d = 0; d < 2; ++d) {
      const double inv_var = std::exp(-2 * h.log_std[d]);
      const double diff = acts(d, j) - h.mean[d];
      dm(d, j) = -adv(j) / B * diff * inv_var;
      ds(d, j) = -adv(j) / B * (diff * diff * inv_var - 1.0);
    }
  }
  const Vector g = a.net.backward(cache, actor_output_grad(out, dm, ds));
  std::uniform_int_distribution<Eigen::Index> pick(0, a.net.n_params() - 1);
  for (int k = 0; k < 100; ++k) {
    const Eigen::Index p = pick(rng);
    Mlp n = a.net;
    n.params()[p] += 1e-5;
    const double up = loss(n);
    n.params()[p] -= 2e-5;
    const double fd = (up - loss(n)) / 2e-5;
    const double scale = std::max(std::abs(fd), std::abs(g[p]));
    if (scale < 1e-7) {
      EXPECT_NEAR(g[p], fd, 1e-9);
    } else {
      EXPECT_LE(std::abs(g[p] - fd) / scale, 1e-4) << p;
    }
  }
}

TEST(Gaussian, LogProbAtModeAndConcentration) {
  GaussianHead h;
  h.mean[0] = 0.3;
  h.mean[1] = -0.2;
  h.log_std[0] = std::log(0.5);
  h.log_std[1] = std::log(2.0);
  EXPECT_NEAR(log_prob(h, h.mean), -(std::log(0.5) + std::log(2.0)) - std::log(2 * std::numbers::pi), 1e-14);
  GaussianHead narrow = h;
  narrow.log_std[0] = narrow.log_std[1] = -4.0;
  std::mt19937_64 rng(7);
  const auto s = sample_action(narrow, rng);
  EXPECT_NEAR(s.raw[0], 0.3, 0.2);
  EXPECT_GT(log_prob(narrow, narrow.mean), log_prob(h, h.mean));
}

TEST(Gaussian, ExecutedActionClampedLogProbUsesRaw) {
  GaussianHead h;
  h.mean[0] = 3.0;
  std::mt19937_64 rng(8);
  const auto s = sample_action(h, rng);
  EXPECT_EQ(s.executed[0], std::clamp(s.raw[0], -1.0, 1.0));
  EXPECT_EQ(s.log_prob, log_prob(h, s.raw));
}

TEST(Gaussian, MonteCarloMeanAndEntropy) {
  GaussianHead h;
  h.mean[0] = 0.25;
  h.mean[1] = -0.4;
  h.log_std[0] = std::log(0.3);
  h.log_std[1] = std::log(0.8);
  std::mt19937_64 rng(9);
  const int n = 100000;
  double s0 = 0, s1 = 0, lp = 0, lp2 = 0;
  for (int k = 0; k < n; ++k) {
    const auto a = sample_action(h, rng);
    s0 += a.raw[0];
    s1 += a.raw[1];
    lp += a.log_prob;
    lp2 += a.log_prob * a.log_prob;
  }
  EXPECT_NEAR(s0 / n, 0.25, 4 * 0.3 / std::sqrt(n));
  EXPECT_NEAR(s1 / n, -0.4, 4 * 0.8 / std::sqrt(n));
  const double mean_lp = lp / n;
  const double se = std::sqrt((lp2 / n - mean_lp * mean_lp) / n);
  EXPECT_NEAR(-mean_lp, entropy(h), 3 * se);
}

TEST(Gaussian, EntropyClosedForm) {
  GaussianHead h;
  EXPECT_NEAR(entropy(h), 2.8378770664093453, 1e-12);
  GaussianHead d = h;
  d.log_std[0] = d.log_std[1] = std::log(2.0);
  EXPECT_NEAR(entropy(d) - entropy(h), 2 * std::log(2.0), 1e-14);
  GaussianHead m = h;
  m.mean[0] = 5.0;
  EXPECT_EQ(entropy(m), entropy(h));
}

TEST(Gaussian, DensityIntegratesToOneOnSlices) {
  GaussianHead h;
  h.mean[0] = 0.1;
  h.mean[1] = 0.2;
  h.log_std[0] = std::log(0.4);
  h.log_std[1] = std::log(0.7);
  // Slice through a1 = mean: integral over a0 equals the a1 marginal density there.
  const double lo = h.mean[0] - 10 * 0.4, hi = h.mean[0] + 10 * 0.4;
  const int n = 20000;
  const double step = (hi - lo) / n;
  double acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double a[2] = {lo + k * step, h.mean[1]};
    acc += (k == 0 || k == n ? 0.5 : 1.0) * std::exp(log_prob(h, a));
  }
  EXPECT_NEAR(acc * step * 0.7 * std::sqrt(2 * std::numbers::pi), 1.0, 1e-3);
}

TEST(Adam, FirstStepZeroGradAndAccumulation) {
  Vector p(3);
  p << 1.0, -2.0, 0.5;
  Vector g(3);
  g << 0.3, -4.0, 1e-3;
  AdamState st(3);
  AdamSettings s;
  Vector q = p;
  adam_step(q, g, st, s);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(q(k) - p(k), -s.lr * g(k) / (std::abs(g(k)) + s.eps), 1e-15);

  Vector z = p;
  AdamState st0(3);
  adam_step(z, Vector::Zero(3), st0, s);
  EXPECT_EQ(z, p);
  EXPECT_EQ(st0.step, 1);

  // Scalar hand computation of two identical steps with g = 1.
  Vector x = Vector::Zero(1);
  AdamState sx(1);
  adam_step(x, Vector::Ones(1), sx, s);
  const double first = x(0);
  adam_step(x, Vector::Ones(1), sx, s);
  const double m2 = 0.1 * 0.9 + 0.1, v2 = 0.001 * 0.999 + 0.001;
  const double step2 = 1e-3 * (m2 / (1 - 0.81)) / (std::sqrt(v2 / (1 - 0.999 * 0.999)) + 1e-8);
  EXPECT_NEAR(x(0) - first, -step2, 1e-18);
  EXPECT_NEAR(first, -1e-3 / (1 + 1e-8), 1e-18);
}

TEST(Init, OrthogonalGainsAndDeterminism) {
  std::mt19937_64 r1(10), r2(10), r3(11);
  const Actor a = Actor::make(8, r1);
  const Actor b = Actor::make(8, r2);
  const Actor c = Actor::make(8, r3);
  EXPECT_EQ(a.net.params(), b.net.params());
  EXPECT_NE(a.net.params(), c.net.params());
  const Matrix w = a.net.weight(1);
  EXPECT_LE((w.transpose() * w - 2.0 * Matrix::Identity(kHidden, kHidden)).cwiseAbs().maxCoeff(), 1e-12);
  const Matrix w0 = a.net.weight(0);  // 256 x 8: orthonormal columns
  EXPECT_LE((w0.transpose() * w0 - 2.0 * Matrix::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-12);
  const Matrix w2 = a.net.weight(2);  // 4 x 256: orthonormal rows scaled by 0.01
  EXPECT_LE((w2 * w2.transpose() - 1e-4 * Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(a.net.bias(0), Vector::Zero(kHidden));
  EXPECT_EQ(a.net.bias(2), Vector::Zero(4));
  std::mt19937_64 r4(12);
  const Critic cr = Critic::make(128, 3, r4);
  const Matrix wc = cr.net.weight(2);
  EXPECT_LE((wc * wc.transpose() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
}
