#pragma once

#include <array>
#include <span>
#include <vector>

#include "apart/discriminator.hpp"
#include "apart/gridworld.hpp"
#include "apart/linnet.hpp"
#include "apart/rewards.hpp"
#include "apart/rng.hpp"

namespace apart {

// Replay tuple. The action is kept because (s, s_next) alone cannot tell a
// Stay from a blocked move.
struct Transition {
  Cell s = 0;
  Action a = Action::Stay;
  Cell s_next = 0;
  int t = 1;  // 1..T
  int z = 0;

  friend bool operator==(const Transition&, const Transition&) = default;
};

// Fixed-capacity FIFO ring; the oldest transition is overwritten first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity);

  void push(const Transition& tr);

  size_t size() const { return data_.size(); }
  size_t capacity() const { return capacity_; }
  bool empty() const { return data_.empty(); }

  // Storage order, not age order.
  const Transition& operator[](size_t i) const { return data_[i]; }

  // i = 0 is the oldest stored transition.
  const Transition& by_age(size_t i) const;

  // Slot the next push writes to once the ring is full.
  size_t cursor() const { return cursor_; }
  const std::vector<Transition>& storage() const { return data_; }
  void restore(std::vector<Transition> data, size_t cursor);

 private:
  size_t capacity_;
  size_t cursor_ = 0;
  std::vector<Transition> data_;
};

// Uniform sampling with replacement.
std::vector<Transition> sample_batch(const ReplayBuffer& buffer, size_t n,
                                     Rng& rng);

struct QPolicyOptions {
  ObsEncoding encoding = ObsEncoding::Outer;
  double epsilon = 0.001;
  double gamma = 0.99;
  double learning_rate = 2e-3;
  // Hard target copy every this many updates; 0 bootstraps from the online
  // network.
  int target_interval = 200;
};

// Latent-conditioned linear Q-function over encode_rl_obs inputs.
class QPolicy {
 public:
  QPolicy(const GridEnv& env, int num_latents, const QPolicyOptions& options,
          Rng& init_rng);

  const GridEnv& env() const { return env_; }
  int num_latents() const { return num_latents_; }
  const QPolicyOptions& options() const { return options_; }

  double epsilon() const { return options_.epsilon; }
  void set_epsilon(double epsilon);
  double gamma() const { return options_.gamma; }

  HotIndices input(Cell s, int z) const {
    return rl_obs_indices(env_, s, z, num_latents_, options_.encoding);
  }

  std::array<double, kNumActions> q_values(Cell s, int z) const;
  std::array<double, kNumActions> target_q_values(Cell s, int z) const;

  LinearModel& model() { return model_; }
  const LinearModel& model() const { return model_; }
  LinearModel& target_model() { return target_; }
  const LinearModel& target_model() const { return target_; }
  AdamState& optimizer() { return adam_; }
  const AdamState& optimizer() const { return adam_; }

  long updates() const { return updates_; }
  void set_updates(long updates) { updates_ = updates; }

  void sync_target() { target_ = model_; }

 private:
  GridEnv env_;
  int num_latents_;
  QPolicyOptions options_;
  LinearModel model_;
  LinearModel target_;
  AdamState adam_;
  long updates_ = 0;
};

// Lowest index among the maximal values.
Action greedy_action(std::span<const double> q);

// Epsilon-greedy: uniform action with probability epsilon, else greedy.
Action select_action(const QPolicy& policy, Cell s, int z, Rng& rng);
Action select_action(const QPolicy& policy, std::span<const double> obs,
                     Rng& rng);

// Plays T steps from env.start() with latent z, storing every transition.
// Returns the state reached after the last step.
Cell collect_rollout(const GridEnv& env, const QPolicy& policy, int z,
                     ReplayBuffer& buffer, Rng& rng);

// Mean squared TD error of the batch against r + gamma max_a Q_target(s', z, a)
// (just r when t = T). Adds the gradient into `grads` when given.
double td_loss(const QPolicy& policy, std::span<const Transition> batch,
               std::span<const double> rewards, Gradients* grads = nullptr);

// One Adam step on td_loss; copies the target network on schedule.
double td_update(QPolicy& policy, std::span<const Transition> batch,
                 std::span<const double> rewards);

struct UpdateStats {
  double td_loss = 0.0;
  double mean_reward = 0.0;
};

// Rewards from the current discriminator on each s_next, then td_update.
UpdateStats dqn_update(QPolicy& policy, const Discriminator& disc,
                       const RewardSpec& spec,
                       std::span<const Transition> batch, Rng& reward_rng);

// One Adam step on the discriminator loss, inputs s_next and labels z.
double disc_update(Discriminator& disc, AdamState& optimizer,
                   const GridEnv& env, std::span<const Transition> batch);

}  // namespace apart
