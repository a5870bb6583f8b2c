#include "apart/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "apart/errors.hpp"

namespace apart {

namespace {

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("invalid value '" + value + "' for key '" + key + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") {
    return true;
  }
  if (value == "false" || value == "0" || value == "no" || value == "off") {
    return false;
  }
  throw ConfigError("invalid boolean '" + value + "' for key '" + key + "'");
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct PresetDef {
  std::string name;
  std::string description;
  ConfigMap settings;
};

const std::vector<PresetDef>& presets() {
  static const std::vector<PresetDef> defs = {
      {"apart", "AP min reward, ascending weights as dropout (APART)",
       {{"reward", "apart"}}},
      {"diayn", "OvA log reward on every state, beta 1 (DIAYN)",
       {{"reward", "diayn"}}},
      {"vic", "OvA log reward on the last state only (VIC)",
       {{"reward", "vic"}}},
      {"tuned_vic_b10", "VIC without log, softmax beta 10 (tuned VIC)",
       {{"reward", "tuned_vic"}, {"beta", "10"}}},
      {"tuned_vic_b1", "VIC without log, softmax beta 1",
       {{"reward", "tuned_vic"}, {"beta", "1"}}},
      {"tuned_vic_b01", "VIC without log, softmax beta 0.1",
       {{"reward", "tuned_vic"}, {"beta", "0.1"}}},
      {"ap_min_plain", "AP min, no ascending, no dropout",
       {{"reward", "ap_min"}}},
      {"ap_min_asc", "AP min, ascending weights, no dropout",
       {{"reward", "ap_min"}, {"ascending", "true"}}},
      {"ap_min_drop", "AP min, constant 0.5 dropout, no ascending",
       {{"reward", "ap_min"}, {"dropout", "true"}}},
      {"ap_min_last", "AP min on the last state only",
       {{"reward", "ap_min"}, {"placement", "last"}}},
      {"ap_average", "AP average, no ascending, no dropout",
       {{"reward", "ap_average"}}},
      {"ap_average_art", "AP average, ascending weights as dropout",
       {{"reward", "ap_average"}, {"ascending", "true"}, {"dropout", "true"}}},
      {"ova_asc", "OvA log reward, ascending weights, no dropout",
       {{"reward", "diayn"}, {"ascending", "true"}}},
      {"ova_drop", "OvA log reward, constant 0.5 dropout, no ascending",
       {{"reward", "diayn"}, {"dropout", "true"}}},
      {"ova_art", "OvA log reward, ascending weights as dropout",
       {{"reward", "diayn"}, {"ascending", "true"}, {"dropout", "true"}}},
      {"apart_linear", "APART with W(t) = t/T",
       {{"reward", "apart"}, {"weight_fn", "linear"}}},
      {"apart_quartic", "APART with W(t) = (t/T)^4",
       {{"reward", "apart"}, {"weight_fn", "quartic"}}},
      {"apart_exp", "APART with W(t) = exp(5 t/T - 5)",
       {{"reward", "apart"}, {"weight_fn", "exp"}}},
      {"apart_dont_cares", "APART trained on don't-care pairs too",
       {{"reward", "apart"}, {"mask_dont_cares", "false"}}},
      {"random_walk", "uniform random actions, no learning",
       {{"reward", "diayn"},
        {"train", "false"},
        {"epsilon", "1"},
        {"eval_epsilon", "1"}}},
  };
  return defs;
}

const PresetDef& find_preset(std::string_view name) {
  for (const auto& def : presets()) {
    if (def.name == name) return def;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

void apply_reward(ExperimentConfig& cfg, const std::string& value) {
  cfg.reward = RewardSpec::make(parse_reward_kind(value));
  cfg.disc_mode = cfg.reward.required_mode();
  cfg.disc_beta = 1.0;
}

void apply_key(ExperimentConfig& cfg, const std::string& key,
               const std::string& value) {
  try {
    if (key == "env") {
      cfg.env = parse_env_name(value);
    } else if (key == "beta") {
      cfg.reward.beta = parse_number<double>(key, value);
    } else if (key == "weight_fn") {
      cfg.reward.weight_fn = parse_weight_fn(value);
    } else if (key == "ascending") {
      cfg.reward.ascending = parse_bool(key, value);
    } else if (key == "dropout") {
      cfg.reward.dropout = parse_bool(key, value);
    } else if (key == "dropout_prob") {
      cfg.reward.dropout_only_prob = parse_number<double>(key, value);
    } else if (key == "placement") {
      cfg.reward.placement = parse_placement(value);
    } else if (key == "disc") {
      cfg.disc_mode = parse_disc_mode(value);
    } else if (key == "disc_beta") {
      cfg.disc_beta = parse_number<double>(key, value);
    } else if (key == "mask_dont_cares") {
      cfg.mask_dont_cares = parse_bool(key, value);
    } else if (key == "latents") {
      cfg.num_latents = parse_number<int>(key, value);
    } else if (key == "horizon") {
      cfg.horizon = parse_number<int>(key, value);
    } else if (key == "batch_size") {
      cfg.batch_size = parse_number<int>(key, value);
    } else if (key == "buffer_size") {
      cfg.buffer_capacity = parse_number<long>(key, value);
    } else if (key == "policy_lr") {
      cfg.policy_lr = parse_number<double>(key, value);
    } else if (key == "disc_lr") {
      cfg.disc_lr = parse_number<double>(key, value);
    } else if (key == "gamma") {
      cfg.gamma = parse_number<double>(key, value);
    } else if (key == "epsilon") {
      cfg.epsilon = parse_number<double>(key, value);
    } else if (key == "steps") {
      cfg.total_env_steps = parse_number<long>(key, value);
    } else if (key == "eval_interval") {
      cfg.eval_interval = parse_number<long>(key, value);
    } else if (key == "eval_rollouts") {
      cfg.eval_rollouts = parse_number<int>(key, value);
    } else if (key == "eval_epsilon") {
      cfg.eval_epsilon = parse_number<double>(key, value);
    } else if (key == "checkpoint_interval") {
      cfg.checkpoint_interval = parse_number<long>(key, value);
    } else if (key == "reward_log_interval") {
      cfg.reward_log_interval = parse_number<int>(key, value);
    } else if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "seeds") {
      cfg.num_seeds = parse_number<int>(key, value);
    } else if (key == "obs") {
      cfg.obs_encoding = parse_obs_encoding(value);
    } else if (key == "target_interval") {
      cfg.target_interval = parse_number<int>(key, value);
    } else if (key == "train") {
      cfg.train = parse_bool(key, value);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "preset",          "env",           "reward",
      "beta",            "weight_fn",     "ascending",
      "dropout",         "dropout_prob",  "placement",
      "disc",            "disc_beta",     "mask_dont_cares",
      "latents",         "horizon",       "batch_size",
      "buffer_size",     "policy_lr",     "disc_lr",
      "gamma",           "epsilon",       "steps",
      "eval_interval",   "eval_rollouts", "eval_epsilon",
      "checkpoint_interval", "reward_log_interval", "seed",
      "seeds",           "obs",           "target_interval",
      "train"};
  return keys;
}

ConfigMap parse_config_text(std::string_view text) {
  ConfigMap out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": unknown config key '" + key + "'");
    }
    out[key] = value;
  }
  return out;
}

ConfigMap read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

ExperimentConfig resolve_config(const ConfigMap& settings) {
  ConfigMap merged;
  std::string preset_name = "custom";
  if (auto it = settings.find("preset"); it != settings.end()) {
    preset_name = it->second;
    if (preset_name != "custom") merged = find_preset(preset_name).settings;
  }
  for (const auto& [key, value] : settings) merged[key] = value;

  ExperimentConfig cfg;
  cfg.preset = preset_name;
  if (auto it = merged.find("reward"); it != merged.end()) {
    apply_reward(cfg, it->second);
  }
  for (const auto& [key, value] : merged) {
    if (key == "preset" || key == "reward") continue;
    apply_key(cfg, key, value);
  }
  if (cfg.reward.kind == RewardKind::TunedVIC && !merged.contains("disc_beta")) {
    cfg.disc_beta = cfg.reward.beta;
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const ConfigMap& flags) {
  ConfigMap settings = read_config_file(path);
  for (const auto& [key, value] : flags) settings[key] = value;
  return resolve_config(settings);
}

void validate(const ExperimentConfig& cfg) {
  auto require = [](bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
  };
  require(cfg.reward.required_mode() == cfg.disc_mode,
          "reward '" + std::string(reward_kind_str(cfg.reward.kind)) +
              "' needs a " +
              std::string(disc_mode_str(cfg.reward.required_mode())) +
              " discriminator, got " + std::string(disc_mode_str(cfg.disc_mode)));
  require(cfg.num_latents >= 2, "latents must be >= 2");
  require(cfg.horizon >= 1, "horizon must be >= 1");
  require(cfg.batch_size >= 1, "batch_size must be >= 1");
  require(cfg.buffer_capacity >= 1, "buffer_size must be >= 1");
  require(cfg.policy_lr > 0.0 && cfg.disc_lr > 0.0,
          "learning rates must be > 0");
  require(cfg.gamma >= 0.0 && cfg.gamma < 1.0, "gamma must lie in [0, 1)");
  require(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0,
          "epsilon must lie in [0, 1]");
  require(cfg.eval_epsilon >= 0.0 && cfg.eval_epsilon <= 1.0,
          "eval_epsilon must lie in [0, 1]");
  require(cfg.total_env_steps >= 0, "steps must be >= 0");
  require(cfg.eval_interval >= 1, "eval_interval must be >= 1");
  require(cfg.eval_rollouts >= 1, "eval_rollouts must be >= 1");
  require(cfg.checkpoint_interval >= 0, "checkpoint_interval must be >= 0");
  require(cfg.reward_log_interval >= 1, "reward_log_interval must be >= 1");
  require(cfg.num_seeds >= 1, "seeds must be >= 1");
  require(cfg.target_interval >= 0, "target_interval must be >= 0");
  require(cfg.reward.beta > 0.0, "beta must be > 0");
  require(cfg.disc_beta > 0.0, "disc_beta must be > 0");
  require(cfg.reward.dropout_only_prob >= 0.0 &&
              cfg.reward.dropout_only_prob <= 1.0,
          "dropout_prob must lie in [0, 1]");
}

std::string to_config_text(const ExperimentConfig& cfg) {
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  const std::vector<std::pair<std::string, std::string>> rows = {
      {"preset", cfg.preset},
      {"env", std::string(env_name_str(cfg.env))},
      {"reward", std::string(reward_kind_str(cfg.reward.kind))},
      {"beta", format_double(cfg.reward.beta)},
      {"weight_fn", std::string(weight_fn_str(cfg.reward.weight_fn))},
      {"ascending", b(cfg.reward.ascending)},
      {"dropout", b(cfg.reward.dropout)},
      {"dropout_prob", format_double(cfg.reward.dropout_only_prob)},
      {"placement", std::string(placement_str(cfg.reward.placement))},
      {"disc", std::string(disc_mode_str(cfg.disc_mode))},
      {"disc_beta", format_double(cfg.disc_beta)},
      {"mask_dont_cares", b(cfg.mask_dont_cares)},
      {"latents", std::to_string(cfg.num_latents)},
      {"horizon", std::to_string(cfg.horizon)},
      {"batch_size", std::to_string(cfg.batch_size)},
      {"buffer_size", std::to_string(cfg.buffer_capacity)},
      {"policy_lr", format_double(cfg.policy_lr)},
      {"disc_lr", format_double(cfg.disc_lr)},
      {"gamma", format_double(cfg.gamma)},
      {"epsilon", format_double(cfg.epsilon)},
      {"steps", std::to_string(cfg.total_env_steps)},
      {"eval_interval", std::to_string(cfg.eval_interval)},
      {"eval_rollouts", std::to_string(cfg.eval_rollouts)},
      {"eval_epsilon", format_double(cfg.eval_epsilon)},
      {"checkpoint_interval", std::to_string(cfg.checkpoint_interval)},
      {"reward_log_interval", std::to_string(cfg.reward_log_interval)},
      {"seed", std::to_string(cfg.seed)},
      {"seeds", std::to_string(cfg.num_seeds)},
      {"obs", std::string(obs_encoding_str(cfg.obs_encoding))},
      {"target_interval", std::to_string(cfg.target_interval)},
      {"train", b(cfg.train)},
  };
  std::string out;
  for (const auto& [key, value] : rows) out += key + " = " + value + "\n";
  return out;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& def : presets()) out.push_back(def.name);
    return out;
  }();
  return names;
}

std::string preset_description(std::string_view name) {
  return find_preset(name).description;
}

ExperimentConfig preset(std::string_view name) {
  return resolve_config({{"preset", std::string(name)}});
}

}  // namespace apart
