#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fluxswarm/env/vector_env.hpp"
#include "fluxswarm/marl/buffer.hpp"
#include "fluxswarm/marl/evaluate.hpp"
#include "fluxswarm/marl/pcgrad.hpp"
#include "fluxswarm/marl/ppo.hpp"
#include "fluxswarm/marl/ppo_config.hpp"
#include "fluxswarm/nn/adam.hpp"
#include "fluxswarm/nn/networks.hpp"

namespace fluxswarm::marl {

inline constexpr int kNumPairs = 3;  // (progress, energy), (progress, smooth), (energy, smooth)
inline constexpr std::array<std::array<int, 2>, kNumPairs> kPairs{{{0, 1}, {0, 2}, {1, 2}}};

struct TrainConfig {
  env::EnvConfig env;
  PPOConfig ppo;

  void validate() const {
    env.validate();
    ppo.validate();
  }
};

struct StepLog {
  long long global_step = 0;
  int env_id = 0;
  long long episode_id = 0;
  int step_in_episode = 0;
  env::RewardRow mean_reward{};
  std::string status;
};

struct EpisodeLog {
  long long global_step = 0;
  int env_id = 0;
  long long episode_id = 0;
  int length = 0;
  env::RewardRow normalized{};
  std::string status;
};

struct UpdateStats {
  long long update = 0;
  long long global_step = 0;
  std::array<double, env::kNumObjectives> actor_loss{};
  double critic_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  std::array<double, kNumPairs> cos_mean{};
  std::array<double, kNumPairs> cos_min{};
  int conflicts = 0;  // (minibatch, pair) combinations with a negative dot product
};

/// Receives training telemetry; the default ignores everything.
class TrainingSink {
 public:
  virtual ~TrainingSink() = default;
  virtual void on_step(const StepLog&) {}
  virtual void on_episode(const EpisodeLog&) {}
  virtual void on_update(const UpdateStats&) {}
  /// Called after every environment step (after any auto-reset).
  virtual void on_env_step(int /*env_id*/, long long /*global_step*/, const env::Environment&, const env::VecStepResult&) {}
};

struct EpisodeAccumulator {
  env::RewardRow sums{};
  int length = 0;
};

/// Everything needed to continue a training run bit-identically.
struct TrainerState {
  nn::Vector actor;
  nn::Vector critic;
  nn::AdamState actor_opt;
  nn::AdamState critic_opt;
  std::string rng;
  std::string pcgrad_rng;
  long long update = 0;
  long long global_step = 0;
  std::vector<env::EnvState> envs;
  std::vector<EpisodeAccumulator> episodes;
};

inline std::vector<double> joint_observation(const std::vector<env::Observation>& obs) {
  std::vector<double> j;
  j.reserve(obs.size() * env::kObsDim);
  for (const auto& o : obs) j.insert(j.end(), o.begin(), o.end());
  return j;
}

/// CTDE multi-objective PPO: one shared actor over local observations, a
/// centralized three-head critic over the joint observation.
class Trainer {
 public:
  explicit Trainer(TrainConfig cfg, int threads = 1)
      : cfg_((cfg.validate(), std::move(cfg))), venv_(env_configs(cfg_), threads), rng_(cfg_.ppo.seed),
        pcgrad_rng_(cfg_.ppo.seed ^ 0x9e3779b97f4a7c15ULL) {
    const int n = venv_[0].n_agents();
    actor_ = nn::Actor::make(env::kObsDim, rng_);
    critic_ = nn::Critic::make(n * env::kObsDim, env::kNumObjectives, rng_);
    actor_opt_ = nn::AdamState(actor_.net.n_params());
    critic_opt_ = nn::AdamState(critic_.net.n_params());
    episodes_.resize(static_cast<std::size_t>(venv_.size()));
  }

  const TrainConfig& config() const { return cfg_; }
  nn::Actor& actor() { return actor_; }
  const nn::Actor& actor() const { return actor_; }
  nn::Critic& critic() { return critic_; }
  const nn::Critic& critic() const { return critic_; }
  env::VectorEnv& envs() { return venv_; }
  long long updates_done() const { return update_; }
  long long global_step() const { return global_step_; }
  bool finished() const { return update_ >= cfg_.ppo.total_updates(); }

  /// One rollout of rollout_length steps in every environment.
  RolloutBuffer collect(TrainingSink* sink = nullptr) {
    const int E = venv_.size();
    const int T = cfg_.ppo.rollout_length;
    const int n = venv_[0].n_agents();
    RolloutBuffer buf(E, T, n);
    auto obs = venv_.observations();
    // Final observations of truncated episodes, keyed by step index.
    std::vector<std::pair<std::size_t, std::vector<double>>> truncated_finals;
    for (int t = 0; t < T; ++t) {
      std::vector<std::vector<Vec2>> actions(static_cast<std::size_t>(E));
      for (int e = 0; e < E; ++e) {
        auto& rec = buf.step(e, t);
        rec.joint_obs = joint_observation(obs[e]);
        const nn::Matrix out = actor_.net.forward(observation_matrix(obs[e]));
        for (int i = 0; i < n; ++i) {
          const auto h = nn::Actor::head(out, i);
          const auto s = nn::sample_action(h, venv_[e].rng());
          auto& tr = buf.sample(buf.step_index(e, t), i);
          tr.obs = obs[e][static_cast<std::size_t>(i)];
          tr.action = {s.raw[0], s.raw[1]};
          tr.log_prob = s.log_prob;
          actions[static_cast<std::size_t>(e)].push_back({s.executed[0], s.executed[1]});
        }
      }
      auto results = venv_.step(actions);
      for (int e = 0; e < E; ++e) {
        auto& r = results[static_cast<std::size_t>(e)];
        auto& rec = buf.step(e, t);
        for (int i = 0; i < n; ++i) buf.sample(buf.step_index(e, t), i).reward = r.step.rewards[static_cast<std::size_t>(i)];
        rec.done = r.step.status.done();
        rec.truncated = r.step.status.truncated();
        if (rec.truncated) truncated_finals.emplace_back(buf.step_index(e, t), joint_observation(r.final_observations));
        log_step(e, r, sink);
        if (sink) sink->on_env_step(e, global_step_, venv_[e], r);
        obs[e] = std::move(r.step.observations);
      }
    }
    fill_values(buf, obs, truncated_finals);
    return buf;
  }

  /// PPO epochs over a filled buffer: per-objective surrogate gradients,
  /// merged by gradient surgery (or summed), plus one entropy term.
  UpdateStats train_update(const RolloutBuffer& buf) {
    const auto& p = cfg_.ppo;
    const AdvantageSet adv = compute_gae(buf, p.gamma, p.lambda);
    const int n = buf.n_agents();
    const std::size_t S = buf.n_steps();
    std::vector<std::size_t> order(S);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const nn::AdamSettings opt{p.lr};

    UpdateStats st;
    st.cos_min.fill(std::numeric_limits<double>::infinity());
    int minibatches = 0;
    long long samples = 0;
    long long clipped = 0;
    for (int epoch = 0; epoch < p.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng_);
      for (std::size_t start = 0; start < S; start += static_cast<std::size_t>(p.minibatch_size)) {
        const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(p.minibatch_size), S - start);
        const Eigen::Index N = static_cast<Eigen::Index>(m) * n;
        nn::Matrix x(env::kObsDim, N), act(2, N);
        nn::Vector old_lp(N);
        std::array<nn::Vector, env::kNumObjectives> a;
        for (auto& v : a) v.resize(N);
        nn::Matrix joint(critic_.net.input_dim(), static_cast<Eigen::Index>(m));
        nn::Matrix target(env::kNumObjectives, static_cast<Eigen::Index>(m));
        for (std::size_t b = 0; b < m; ++b) {
          const std::size_t k = order[start + b];
          const auto& rec = buf.step(k);
          joint.col(static_cast<Eigen::Index>(b)) = Eigen::Map<const nn::Vector>(rec.joint_obs.data(), joint.rows());
          for (int o = 0; o < env::kNumObjectives; ++o) target(o, static_cast<Eigen::Index>(b)) = adv.targets[o][k];
          for (int i = 0; i < n; ++i) {
            const Eigen::Index c = static_cast<Eigen::Index>(b) * n + i;
            const auto& tr = buf.sample(k, i);
            for (int d = 0; d < env::kObsDim; ++d) x(d, c) = tr.obs[static_cast<std::size_t>(d)];
            act(0, c) = tr.action[0];
            act(1, c) = tr.action[1];
            old_lp(c) = tr.log_prob;
            for (int o = 0; o < env::kNumObjectives; ++o) a[o](c) = adv.advantages[o][k * n + i];
          }
        }
        for (auto& v : a) normalize_advantages(v);

        nn::ForwardCache cache;
        const nn::Matrix out = actor_.net.forward(x, &cache);
        nn::Vector new_lp(N);
        nn::Matrix diff(2, N), inv_var(2, N);
        double ent = 0.0;
        for (Eigen::Index c = 0; c < N; ++c) {
          const auto h = nn::Actor::head(out, c);
          const double av[2] = {act(0, c), act(1, c)};
          new_lp(c) = nn::log_prob(h, av);
          ent += nn::entropy(h);
          for (int d = 0; d < 2; ++d) {
            diff(d, c) = av[d] - h.mean[d];
            inv_var(d, c) = std::exp(-2.0 * h.log_std[d]);
          }
        }
        std::vector<nn::Vector> grads;
        for (int o = 0; o < env::kNumObjectives; ++o) {
          const auto sr = clipped_surrogate(new_lp, old_lp, a[o], p.clip);
          st.actor_loss[o] += sr.loss;
          if (o == 0) clipped += sr.clipped;
          nn::Matrix dm(2, N), ds(2, N);
          for (Eigen::Index c = 0; c < N; ++c) {
            for (int d = 0; d < 2; ++d) {
              dm(d, c) = sr.d_log_prob(c) * diff(d, c) * inv_var(d, c);
              ds(d, c) = sr.d_log_prob(c) * (diff(d, c) * diff(d, c) * inv_var(d, c) - 1.0);
            }
          }
          grads.push_back(actor_.net.backward(cache, nn::actor_output_grad(out, dm, ds)));
          if (!grads.back().allFinite()) throw NonFiniteGradient("actor gradient is not finite");
        }
        for (int q = 0; q < kNumPairs; ++q) {
          const double c = cosine(grads[kPairs[q][0]], grads[kPairs[q][1]]);
          st.cos_mean[q] += c;
          st.cos_min[q] = std::min(st.cos_min[q], c);
          st.conflicts += grads[kPairs[q][0]].dot(grads[kPairs[q][1]]) < 0.0;
        }
        nn::Vector g = p.pcgrad_enabled ? pcgrad_merge(grads, pcgrad_rng_) : plain_sum(grads);
        // Entropy bonus: loss -c * mean H, dH/dlog_std = 1 per dimension.
        const nn::Matrix ds_ent = nn::Matrix::Constant(2, N, -p.entropy_coef / static_cast<double>(N));
        g += actor_.net.backward(cache, nn::actor_output_grad(out, nn::Matrix::Zero(2, N), ds_ent));
        if (!g.allFinite()) throw NonFiniteGradient("merged actor gradient is not finite");
        nn::adam_step(actor_.net.params(), g, actor_opt_, opt);

        nn::ForwardCache ccache;
        const nn::Matrix v = critic_.net.forward(joint, &ccache);
        nn::Matrix dv;
        st.critic_loss += critic_loss(v, target, &dv);
        const nn::Vector gc = critic_.net.backward(ccache, dv);
        if (!gc.allFinite()) throw NonFiniteGradient("critic gradient is not finite");
        nn::adam_step(critic_.net.params(), gc, critic_opt_, opt);

        st.entropy += ent / static_cast<double>(N);
        samples += N;
        ++minibatches;
      }
    }
    for (double& l : st.actor_loss) l /= minibatches;
    st.critic_loss /= minibatches;
    st.entropy /= minibatches;
    for (double& c : st.cos_mean) c /= minibatches;
    st.clip_fraction = static_cast<double>(clipped) / static_cast<double>(samples);
    return st;
  }

  /// Rollout plus update; reports the update to the sink.
  UpdateStats iterate(TrainingSink* sink = nullptr) {
    const RolloutBuffer buf = collect(sink);
    UpdateStats st = train_update(buf);
    ++update_;
    st.update = update_;
    st.global_step = global_step_;
    if (sink) sink->on_update(st);
    return st;
  }

  TrainerState save_state() const {
    TrainerState s;
    s.actor = actor_.net.params();
    s.critic = critic_.net.params();
    s.actor_opt = actor_opt_;
    s.critic_opt = critic_opt_;
    s.rng = engine_string(rng_);
    s.pcgrad_rng = engine_string(pcgrad_rng_);
    s.update = update_;
    s.global_step = global_step_;
    for (int e = 0; e < venv_.size(); ++e) s.envs.push_back(venv_[e].save_state());
    s.episodes = episodes_;
    return s;
  }

  void load_state(const TrainerState& s) {
    if (s.actor.size() != actor_.net.n_params() || s.critic.size() != critic_.net.n_params())
      throw Error("trainer: parameter count mismatch");
    if (static_cast<int>(s.envs.size()) != venv_.size() || s.episodes.size() != s.envs.size())
      throw Error("trainer: environment count mismatch");
    actor_.net.params() = s.actor;
    critic_.net.params() = s.critic;
    actor_opt_ = s.actor_opt;
    critic_opt_ = s.critic_opt;
    read_engine(s.rng, rng_);
    read_engine(s.pcgrad_rng, pcgrad_rng_);
    update_ = s.update;
    global_step_ = s.global_step;
    for (int e = 0; e < venv_.size(); ++e) venv_[e].load_state(s.envs[static_cast<std::size_t>(e)]);
    episodes_ = s.episodes;
  }

 private:
  static std::vector<env::EnvConfig> env_configs(const TrainConfig& c) {
    std::vector<env::EnvConfig> out;
    for (int e = 0; e < c.ppo.n_envs; ++e) {
      env::EnvConfig ec = c.env;
      ec.seed = c.ppo.seed + 1 + static_cast<std::uint64_t>(e);
      out.push_back(ec);
    }
    return out;
  }

  static std::string engine_string(const std::mt19937_64& r) {
    std::ostringstream os;
    os << r;
    return os.str();
  }
  static void read_engine(const std::string& s, std::mt19937_64& r) {
    std::istringstream is(s);
    is >> r;
    if (!is) throw Error("trainer: corrupt random-engine state");
  }

  void log_step(int e, const env::VecStepResult& r, TrainingSink* sink) {
    ++global_step_;
    auto& acc = episodes_[static_cast<std::size_t>(e)];
    const auto m = agent_mean(r.step.rewards);
    for (int k = 0; k < env::kNumObjectives; ++k) acc.sums[k] += m[k];
    acc.length = r.step.info.step;
    // After an auto-reset the environment already counts the next episode.
    const long long episode_id = venv_[e].episode() - (r.reset ? 1 : 0);
    if (sink) sink->on_step({global_step_, e, episode_id, r.step.info.step, m, r.step.status.label()});
    if (r.reset) {
      EpisodeLog ep{global_step_, e, episode_id, acc.length, {}, r.step.status.label()};
      for (int k = 0; k < env::kNumObjectives; ++k) ep.normalized[k] = acc.sums[k] / acc.length;
      if (sink) sink->on_episode(ep);
      acc = {};
    }
  }

  void fill_values(RolloutBuffer& buf, const std::vector<std::vector<env::Observation>>& last_obs,
                   const std::vector<std::pair<std::size_t, std::vector<double>>>& truncated_finals) {
    const int E = buf.n_envs();
    const int T = buf.length();
    const Eigen::Index J = critic_.net.input_dim();
    const Eigen::Index cols = static_cast<Eigen::Index>(buf.n_steps() + E + truncated_finals.size());
    nn::Matrix x(J, cols);
    for (std::size_t k = 0; k < buf.n_steps(); ++k)
      x.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const nn::Vector>(buf.step(k).joint_obs.data(), J);
    for (int e = 0; e < E; ++e) {
      const auto j = joint_observation(last_obs[e]);
      x.col(static_cast<Eigen::Index>(buf.n_steps()) + e) = Eigen::Map<const nn::Vector>(j.data(), J);
    }
    for (std::size_t q = 0; q < truncated_finals.size(); ++q)
      x.col(static_cast<Eigen::Index>(buf.n_steps() + E + q)) = Eigen::Map<const nn::Vector>(truncated_finals[q].second.data(), J);
    const nn::Matrix v = critic_.net.forward(x);
    auto col = [&](Eigen::Index c) {
      std::array<double, env::kNumObjectives> a{};
      for (int k = 0; k < env::kNumObjectives; ++k) a[k] = v(k, c);
      return a;
    };
    for (std::size_t k = 0; k < buf.n_steps(); ++k) buf.step(k).value = col(static_cast<Eigen::Index>(k));
    for (int e = 0; e < E; ++e) {
      for (int t = 0; t < T; ++t) {
        auto& rec = buf.step(e, t);
        if (rec.done) {
          rec.next_value = {};
        } else if (!rec.truncated) {
          rec.next_value = t + 1 < T ? buf.step(e, t + 1).value : col(static_cast<Eigen::Index>(buf.n_steps()) + e);
        }
      }
    }
    for (std::size_t q = 0; q < truncated_finals.size(); ++q)
      buf.step(truncated_finals[q].first).next_value = col(static_cast<Eigen::Index>(buf.n_steps() + E + q));
  }

  TrainConfig cfg_;
  env::VectorEnv venv_;
  std::mt19937_64 rng_;
  std::mt19937_64 pcgrad_rng_;
  nn::Actor actor_;
  nn::Critic critic_;
  nn::AdamState actor_opt_;
  nn::AdamState critic_opt_;
  long long update_ = 0;
  long long global_step_ = 0;
  std::vector<EpisodeAccumulator> episodes_;
};

}  // namespace fluxswarm::marl
