#include "apart/agent.hpp"

#include <algorithm>
#include <stdexcept>

namespace apart {

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be > 0");
  data_.reserve(std::min<size_t>(capacity, 1 << 20));
}

void ReplayBuffer::push(const Transition& tr) {
  if (data_.size() < capacity_) {
    data_.push_back(tr);
    return;
  }
  data_[cursor_] = tr;
  cursor_ = (cursor_ + 1) % capacity_;
}

const Transition& ReplayBuffer::by_age(size_t i) const {
  if (i >= data_.size()) throw std::out_of_range("replay index out of range");
  return data_.size() < capacity_ ? data_[i] : data_[(cursor_ + i) % capacity_];
}

void ReplayBuffer::restore(std::vector<Transition> data, size_t cursor) {
  if (data.size() > capacity_ || (cursor != 0 && cursor >= capacity_) ||
      (data.size() < capacity_ && cursor != 0)) {
    throw std::invalid_argument("inconsistent replay buffer state");
  }
  data_ = std::move(data);
  cursor_ = cursor;
}

std::vector<Transition> sample_batch(const ReplayBuffer& buffer, size_t n,
                                     Rng& rng) {
  if (buffer.empty()) {
    throw std::logic_error("cannot sample from an empty replay buffer");
  }
  std::uniform_int_distribution<size_t> pick(0, buffer.size() - 1);
  std::vector<Transition> batch;
  batch.reserve(n);
  for (size_t i = 0; i < n; ++i) batch.push_back(buffer[pick(rng)]);
  return batch;
}

QPolicy::QPolicy(const GridEnv& env, int num_latents,
                 const QPolicyOptions& options, Rng& init_rng)
    : env_(env),
      num_latents_(num_latents),
      options_(options),
      model_(LinearModel::fan_in_uniform(
          rl_obs_size(env, num_latents, options.encoding), kNumActions,
          init_rng)),
      target_(model_),
      adam_(model_, options.learning_rate) {
  if (num_latents <= 0) throw std::invalid_argument("need at least one latent");
  set_epsilon(options.epsilon);
  if (!(options.gamma >= 0.0 && options.gamma < 1.0)) {
    throw std::invalid_argument("gamma must lie in [0, 1)");
  }
  if (options.target_interval < 0) {
    throw std::invalid_argument("target interval must be >= 0");
  }
}

void QPolicy::set_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0, 1]");
  }
  options_.epsilon = epsilon;
}

std::array<double, kNumActions> QPolicy::q_values(Cell s, int z) const {
  const HotIndices hot = input(s, z);
  std::array<double, kNumActions> q{};
  model_.forward_hot(std::span(hot.index.data(), hot.count), q);
  return q;
}

std::array<double, kNumActions> QPolicy::target_q_values(Cell s, int z) const {
  const HotIndices hot = input(s, z);
  std::array<double, kNumActions> q{};
  const LinearModel& net = options_.target_interval > 0 ? target_ : model_;
  net.forward_hot(std::span(hot.index.data(), hot.count), q);
  return q;
}

Action greedy_action(std::span<const double> q) {
  if (static_cast<int>(q.size()) != kNumActions) {
    throw std::invalid_argument("expected one Q-value per action");
  }
  return static_cast<Action>(argmax_first(q));
}

namespace {

Action epsilon_greedy(std::span<const double> q, double epsilon, Rng& rng) {
  if (uniform01(rng) < epsilon) {
    return static_cast<Action>(uniform_int(rng, kNumActions));
  }
  return greedy_action(q);
}

}  // namespace

Action select_action(const QPolicy& policy, Cell s, int z, Rng& rng) {
  const auto q = policy.q_values(s, z);
  return epsilon_greedy(q, policy.epsilon(), rng);
}

Action select_action(const QPolicy& policy, std::span<const double> obs,
                     Rng& rng) {
  const std::vector<double> q = policy.model().forward(obs);
  return epsilon_greedy(q, policy.epsilon(), rng);
}

Cell collect_rollout(const GridEnv& env, const QPolicy& policy, int z,
                     ReplayBuffer& buffer, Rng& rng) {
  Cell s = env.start();
  for (int t = 1; t <= env.horizon(); ++t) {
    const Action a = select_action(policy, s, z, rng);
    const Cell next = env.step(s, a);
    buffer.push({s, a, next, t, z});
    s = next;
  }
  return s;
}

double td_loss(const QPolicy& policy, std::span<const Transition> batch,
               std::span<const double> rewards, Gradients* grads) {
  if (batch.size() != rewards.size() || batch.empty()) {
    throw std::invalid_argument("td_loss: batch shape mismatch");
  }
  const int horizon = policy.env().horizon();
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (size_t b = 0; b < batch.size(); ++b) {
    const Transition& tr = batch[b];
    double target = rewards[b];
    if (tr.t < horizon) {
      const auto next_q = policy.target_q_values(tr.s_next, tr.z);
      target += policy.gamma() * *std::max_element(next_q.begin(), next_q.end());
    }
    const HotIndices hot = policy.input(tr.s, tr.z);
    const std::span<const int> active(hot.index.data(), hot.count);
    const int a = static_cast<int>(tr.a);
    const double diff = policy.model().output_hot(active, a) - target;
    loss += diff * diff * inv_batch;
    if (grads != nullptr) accumulate_hot(*grads, active, a, 2.0 * diff, inv_batch);
  }
  return loss;
}

double td_update(QPolicy& policy, std::span<const Transition> batch,
                 std::span<const double> rewards) {
  Gradients grads(policy.model());
  const double loss = td_loss(policy, batch, rewards, &grads);
  adam_update(policy.optimizer(), policy.model(), grads);
  policy.set_updates(policy.updates() + 1);
  const int interval = policy.options().target_interval;
  if (interval > 0 && policy.updates() % interval == 0) policy.sync_target();
  return loss;
}

UpdateStats dqn_update(QPolicy& policy, const Discriminator& disc,
                       const RewardSpec& spec,
                       std::span<const Transition> batch, Rng& reward_rng) {
  const GridEnv& env = policy.env();
  std::vector<int> states(batch.size());
  std::vector<int> latents(batch.size());
  std::vector<int> steps(batch.size());
  for (size_t b = 0; b < batch.size(); ++b) {
    states[b] = env.free_index(batch[b].s_next);
    latents[b] = batch[b].z;
    steps[b] = batch[b].t;
  }
  const std::vector<double> rewards = batch_rewards(
      spec, disc, states, latents, steps, env.horizon(), reward_rng);
  UpdateStats stats;
  for (double r : rewards) stats.mean_reward += r;
  stats.mean_reward /= static_cast<double>(rewards.size());
  stats.td_loss = td_update(policy, batch, rewards);
  return stats;
}

double disc_update(Discriminator& disc, AdamState& optimizer,
                   const GridEnv& env, std::span<const Transition> batch) {
  std::vector<int> states(batch.size());
  std::vector<int> latents(batch.size());
  for (size_t b = 0; b < batch.size(); ++b) {
    states[b] = env.free_index(batch[b].s_next);
    latents[b] = batch[b].z;
  }
  Gradients grads(disc.model());
  const double loss = disc.batch_loss_and_grad(states, latents, grads);
  adam_update(optimizer, disc.model(), grads);
  return loss;
}

}  // namespace apart
