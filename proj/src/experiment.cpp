#include "apart/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace apart {

namespace {

QPolicyOptions policy_options(const ExperimentConfig& cfg) {
  QPolicyOptions opts;
  opts.encoding = cfg.obs_encoding;
  opts.epsilon = cfg.epsilon;
  opts.gamma = cfg.gamma;
  opts.learning_rate = cfg.policy_lr;
  opts.target_interval = cfg.target_interval;
  return opts;
}

}  // namespace

Trainer::Trainer(const ExperimentConfig& cfg)
    : cfg_(cfg),
      env_(build_env(cfg.env, cfg.horizon)),
      init_rng_(make_stream(cfg.seed, "init")),
      policy_(env_, cfg.num_latents, policy_options(cfg), init_rng_),
      disc_(cfg.disc_mode, env_.num_free(), cfg.num_latents, cfg.disc_beta,
            cfg.mask_dont_cares, init_rng_),
      disc_adam_(disc_.model(), cfg.disc_lr),
      buffer_(static_cast<size_t>(cfg.buffer_capacity)),
      latent_rng_(make_stream(cfg.seed, "latent")),
      policy_rng_(make_stream(cfg.seed, "policy")),
      replay_rng_(make_stream(cfg.seed, "replay")),
      reward_rng_(make_stream(cfg.seed, "dropout")),
      eval_rng_(make_stream(cfg.seed, "eval")) {
  validate(cfg_);
}

UpdateLog Trainer::train_rollout() {
  const int z = uniform_int(latent_rng_, cfg_.num_latents);
  collect_rollout(env_, policy_, z, buffer_, policy_rng_);
  env_steps_ += env_.horizon();

  UpdateLog log;
  log.env_steps = env_steps_;
  if (!cfg_.train) return log;

  const std::vector<Transition> batch =
      sample_batch(buffer_, static_cast<size_t>(cfg_.batch_size), replay_rng_);
  const UpdateStats stats =
      dqn_update(policy_, disc_, cfg_.reward, batch, reward_rng_);
  const double disc_loss = disc_update(disc_, disc_adam_, env_, batch);
  ++updates_;
  if (!std::isfinite(stats.td_loss) || !std::isfinite(disc_loss) ||
      !std::isfinite(stats.mean_reward)) {
    throw std::runtime_error(
        "non-finite training value at update " + std::to_string(updates_) +
        " (td_loss=" + std::to_string(stats.td_loss) +
        ", disc_loss=" + std::to_string(disc_loss) +
        ", mean_reward=" + std::to_string(stats.mean_reward) + ")");
  }
  reward_sum_ += stats.mean_reward;
  ++reward_count_;

  log.update = updates_;
  log.mean_reward = stats.mean_reward;
  log.td_loss = stats.td_loss;
  log.disc_loss = disc_loss;
  return log;
}

std::vector<Cell> Trainer::final_states() {
  return skill_final_states(env_, policy_, cfg_.num_latents, cfg_.eval_epsilon,
                            eval_rng_);
}

EvalRecord Trainer::evaluate() {
  if (!policy_.model().all_finite() || !disc_.model().all_finite()) {
    throw std::runtime_error("non-finite parameters at env step " +
                             std::to_string(env_steps_));
  }
  EvalRecord rec;
  rec.env_steps = env_steps_;
  rec.seed = cfg_.seed;
  rec.n_effective = count_distinct(final_states());
  rec.mean_reward =
      reward_count_ > 0 ? reward_sum_ / static_cast<double>(reward_count_) : 0.0;
  rec.disc_accuracy =
      disc_accuracy_per_step(env_, policy_, disc_, cfg_.num_latents,
                             cfg_.eval_rollouts, cfg_.eval_epsilon, eval_rng_);
  reward_sum_ = 0.0;
  reward_count_ = 0;
  return rec;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path, bool append) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  auto out = open_output(path, false);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_final_skills(const std::filesystem::path& path, const GridEnv& env,
                        const std::vector<Cell>& finals) {
  std::string text = "skill,final_state_x,final_state_y\n";
  for (size_t z = 0; z < finals.size(); ++z) {
    text += std::to_string(z) + "," + std::to_string(env.x_of(finals[z])) +
            "," + std::to_string(env.y_of(finals[z])) + "\n";
  }
  write_file(path, text);
}

std::string reward_row(const UpdateLog& log) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%ld,%ld,%.9g,%.9g,%.9g\n", log.update,
                log.env_steps, log.mean_reward, log.td_loss, log.disc_loss);
  return buf;
}

long next_multiple(long value, long interval) {
  return (value / interval + 1) * interval;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg,
                         const std::filesystem::path& dir,
                         const std::filesystem::path& resume_from) {
  validate(cfg);
  std::filesystem::create_directories(dir);
  RunResult result;
  result.dir = dir;

  Trainer trainer(cfg);
  const bool resume = !resume_from.empty();
  if (resume) trainer.load_checkpoint(resume_from);

  write_file(dir / "config.txt", to_config_text(cfg));
  write_file(dir / "env.txt", trainer.env().ascii());
  auto metrics = open_output(dir / "metrics.csv", resume);
  auto rewards = open_output(dir / "rewards.csv", resume);
  if (!resume) {
    metrics << metrics_csv_header(cfg.horizon) << "\n";
    rewards << "update,env_steps,mean_reward,td_loss,disc_loss\n";
  }

  auto record = [&](const EvalRecord& rec) {
    metrics << metrics_csv_row(rec) << "\n" << std::flush;
    if (!metrics) throw std::runtime_error("failed writing metrics.csv");
    result.evals.push_back(rec);
  };

  long last_eval = trainer.env_steps();
  if (!resume) record(trainer.evaluate());
  long next_eval = next_multiple(trainer.env_steps(), cfg.eval_interval);
  long next_checkpoint =
      cfg.checkpoint_interval > 0
          ? next_multiple(trainer.env_steps(), cfg.checkpoint_interval)
          : -1;

  while (trainer.env_steps() < cfg.total_env_steps) {
    const UpdateLog log = trainer.train_rollout();
    if (log.update > 0 && log.update % cfg.reward_log_interval == 0) {
      rewards << reward_row(log);
    }
    if (trainer.env_steps() >= next_eval) {
      record(trainer.evaluate());
      last_eval = trainer.env_steps();
      next_eval = next_multiple(trainer.env_steps(), cfg.eval_interval);
    }
    if (next_checkpoint > 0 && trainer.env_steps() >= next_checkpoint) {
      trainer.save_checkpoint(dir / "checkpoint.bin");
      next_checkpoint =
          next_multiple(trainer.env_steps(), cfg.checkpoint_interval);
    }
  }
  if (last_eval != trainer.env_steps()) record(trainer.evaluate());
  rewards.flush();
  if (!rewards) throw std::runtime_error("failed writing rewards.csv");

  trainer.save_checkpoint(dir / "checkpoint.bin");
  write_final_skills(dir / "final_skills.csv", trainer.env(),
                     trainer.final_states());
  return result;
}

std::vector<RunResult> run_seeds(const ExperimentConfig& cfg,
                                 const std::filesystem::path& dir) {
  std::vector<RunResult> results;
  for (int k = 0; k < cfg.num_seeds; ++k) {
    ExperimentConfig replica = cfg;
    replica.seed = cfg.seed + static_cast<std::uint64_t>(k);
    replica.num_seeds = 1;
    results.push_back(run_experiment(
        replica, dir / ("seed_" + std::to_string(replica.seed))));
  }
  return results;
}

}  // namespace apart
