#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "apart/discriminator.hpp"
#include "apart/gridworld.hpp"
#include "apart/rewards.hpp"

namespace apart {

// Fully resolved experiment settings. Defaults are the published
// hyperparameters (batch 640, T = 40, 100 latents, 50k replay, Adam 2e-3,
// epsilon 0.001, gamma 0.99).
struct ExperimentConfig {
  std::string preset = "apart";
  EnvName env = EnvName::FourRooms;
  RewardSpec reward = RewardSpec::make(RewardKind::APART);
  DiscMode disc_mode = DiscMode::AP;
  double disc_beta = 1.0;
  bool mask_dont_cares = true;
  int num_latents = 100;
  int horizon = 40;
  int batch_size = 640;
  long buffer_capacity = 50'000;
  double policy_lr = 2e-3;
  double disc_lr = 2e-3;
  double gamma = 0.99;
  double epsilon = 0.001;
  long total_env_steps = 5'000'000;
  long eval_interval = 50'000;
  int eval_rollouts = 1;
  double eval_epsilon = 0.0;
  long checkpoint_interval = 1'000'000;  // 0: final checkpoint only
  int reward_log_interval = 10;          // updates per rewards.csv row
  std::uint64_t seed = 0;
  int num_seeds = 1;
  ObsEncoding obs_encoding = ObsEncoding::Outer;
  int target_interval = 200;
  bool train = true;
};

using ConfigMap = std::map<std::string, std::string>;

// Every recognised key, in echo order.
const std::vector<std::string>& config_keys();

// Parses `key = value` lines; '#' starts a comment. Unknown keys and
// malformed lines throw ConfigError naming the line.
ConfigMap parse_config_text(std::string_view text);
ConfigMap read_config_file(const std::filesystem::path& path);

// Builds a config from key/value settings. `preset` (if present) is applied
// first, then `reward` (which resets reward-derived defaults), then every
// other key. Throws ConfigError on unknown keys, bad values or invalid
// combinations.
ExperimentConfig resolve_config(const ConfigMap& settings);

// File settings overridden by flag settings.
ExperimentConfig load_config(const std::filesystem::path& path,
                             const ConfigMap& flags);

// Throws ConfigError describing the first violated constraint.
void validate(const ExperimentConfig& cfg);

// Canonical `key = value` echo; resolve_config(parse_config_text(echo))
// reproduces the config exactly.
std::string to_config_text(const ExperimentConfig& cfg);

// Named configurations for every learning curve and ablation row.
const std::vector<std::string>& preset_names();
std::string preset_description(std::string_view name);
ExperimentConfig preset(std::string_view name);

}  // namespace apart
