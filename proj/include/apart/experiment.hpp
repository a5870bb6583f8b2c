#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "apart/agent.hpp"
#include "apart/config.hpp"
#include "apart/discriminator.hpp"
#include "apart/metrics.hpp"

namespace apart {

// Per-update training statistics, one rewards.csv row each logged update.
struct UpdateLog {
  long update = 0;
  long env_steps = 0;
  double mean_reward = 0.0;
  double td_loss = 0.0;
  double disc_loss = 0.0;
};

// Complete training state of one (config, seed) run: policy, discriminator,
// replay buffer, optimizers and RNG streams. Single-threaded.
class Trainer {
 public:
  explicit Trainer(const ExperimentConfig& cfg);

  const ExperimentConfig& config() const { return cfg_; }
  const GridEnv& env() const { return env_; }
  const QPolicy& policy() const { return policy_; }
  QPolicy& policy() { return policy_; }
  const Discriminator& discriminator() const { return disc_; }
  Discriminator& discriminator() { return disc_; }
  const ReplayBuffer& buffer() const { return buffer_; }

  long env_steps() const { return env_steps_; }
  long updates() const { return updates_; }

  // Collects one rollout (T env steps) and, when training, performs one
  // policy update and one discriminator update on a shared batch. Returns
  // the update statistics (zeros when not training).
  UpdateLog train_rollout();

  // Greedy (or eval_epsilon) evaluation of the current snapshot. The mean
  // reward is that of the updates since the previous evaluate() call.
  EvalRecord evaluate();

  std::vector<Cell> final_states();

  void save_checkpoint(const std::filesystem::path& path) const;
  // Restores a checkpoint written by save_checkpoint for the same config.
  void load_checkpoint(const std::filesystem::path& path);

 private:
  ExperimentConfig cfg_;
  GridEnv env_;
  Rng init_rng_;
  QPolicy policy_;
  Discriminator disc_;
  AdamState disc_adam_;
  ReplayBuffer buffer_;
  Rng latent_rng_;
  Rng policy_rng_;
  Rng replay_rng_;
  Rng reward_rng_;
  Rng eval_rng_;
  long env_steps_ = 0;
  long updates_ = 0;
  double reward_sum_ = 0.0;  // since last evaluation
  long reward_count_ = 0;
};

// Reads the config stored in a checkpoint.
ExperimentConfig checkpoint_config(const std::filesystem::path& path);

struct RunResult {
  std::filesystem::path dir;
  std::vector<EvalRecord> evals;
};

// Trains cfg (single seed cfg.seed) into `dir`:
//   config.txt        resolved config echo
//   env.txt           wall mask as ASCII art
//   metrics.csv       one EvalRecord per evaluation
//   rewards.csv       update,env_steps,mean_reward,td_loss,disc_loss
//   final_skills.csv  skill,final_state_x,final_state_y
//   checkpoint.bin    latest checkpoint
// Evaluates at step 0, every eval_interval steps and at the end. When
// `resume_from` is given, training continues from that checkpoint and the
// CSV files are appended to. Throws std::runtime_error on I/O failure or
// non-finite parameters.
RunResult run_experiment(const ExperimentConfig& cfg,
                         const std::filesystem::path& dir,
                         const std::filesystem::path& resume_from = {});

// Runs cfg.num_seeds replicas with seeds cfg.seed, cfg.seed + 1, ... into
// dir/seed_<seed>.
std::vector<RunResult> run_seeds(const ExperimentConfig& cfg,
                                 const std::filesystem::path& dir);

}  // namespace apart
