// Command-line driver for skill-discovery experiments.
//
//   apart run --config F [--<key> v]... [--out DIR] [--resume CKPT]
//   apart preset <name> [--steps N] [--seeds K] [--out DIR] [--<key> v]...
//   apart eval --checkpoint C [--rollouts N]
//   apart baseline-random --env E [--latents N] [--episodes M] [--seed S]
//   apart env --env E
//   apart presets

#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "apart/config.hpp"
#include "apart/errors.hpp"
#include "apart/experiment.hpp"
#include "apart/metrics.hpp"

namespace {

using apart::ConfigMap;

// Adds --<key> for every config key, recording only those given.
class KeyFlags {
 public:
  void attach(CLI::App* app, const std::vector<std::string>& skip) {
    for (const auto& key : apart::config_keys()) {
      if (std::find(skip.begin(), skip.end(), key) != skip.end()) continue;
      options_[key] = app->add_option("--" + key, values_[key],
                                      "override config key '" + key + "'");
    }
  }

  ConfigMap given() const {
    ConfigMap out;
    for (const auto& [key, opt] : options_) {
      if (opt->count() > 0) out[key] = values_.at(key);
    }
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, CLI::Option*> options_;
};

void print_summary(const std::vector<apart::RunResult>& results) {
  for (const auto& run : results) {
    if (run.evals.empty()) continue;
    const auto& last = run.evals.back();
    std::printf("%s: env_steps=%ld n_effective=%d\n", run.dir.string().c_str(),
                last.env_steps, last.n_effective);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"All-pairs skill discovery on grid worlds"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "train from a config file");
  std::string config_path;
  std::string run_out = "runs/run";
  std::string resume;
  run->add_option("--config", config_path, "key = value config file");
  run->add_option("--out", run_out, "run directory");
  run->add_option("--resume", resume, "checkpoint to continue from");
  KeyFlags run_flags;
  run_flags.attach(run, {});

  auto* pre = app.add_subcommand("preset", "train a named preset");
  std::string preset_name;
  std::string preset_out;
  pre->add_option("name", preset_name, "preset name (see 'apart presets')")
      ->required();
  pre->add_option("--out", preset_out, "output directory");
  KeyFlags preset_flags;
  preset_flags.attach(pre, {"preset"});

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string checkpoint;
  int eval_rollouts = 1;
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("--rollouts", eval_rollouts, "rollouts per latent");

  auto* baseline =
      app.add_subcommand("baseline-random", "random-walk skill count");
  std::string baseline_env = "rooms";
  int baseline_latents = 100;
  int baseline_episodes = 10000;
  int baseline_horizon = 40;
  std::uint64_t baseline_seed = 0;
  baseline->add_option("--env", baseline_env, "rooms, empty or umaze");
  baseline->add_option("--latents", baseline_latents, "number of latents");
  baseline->add_option("--episodes", baseline_episodes, "episodes to average");
  baseline->add_option("--horizon", baseline_horizon, "episode length");
  baseline->add_option("--seed", baseline_seed, "RNG seed");

  auto* env_cmd = app.add_subcommand("env", "print an environment's walls");
  std::string env_name = "rooms";
  env_cmd->add_option("--env", env_name, "rooms, empty or umaze");

  auto* list = app.add_subcommand("presets", "list presets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const ConfigMap flags = run_flags.given();
      const apart::ExperimentConfig cfg =
          config_path.empty() ? apart::resolve_config(flags)
                              : apart::load_config(config_path, flags);
      if (!resume.empty()) {
        print_summary({apart::run_experiment(cfg, run_out, resume)});
      } else if (cfg.num_seeds > 1) {
        print_summary(apart::run_seeds(cfg, run_out));
      } else {
        print_summary({apart::run_experiment(cfg, run_out)});
      }
    } else if (*pre) {
      ConfigMap settings = preset_flags.given();
      settings["preset"] = preset_name;
      const apart::ExperimentConfig cfg = apart::resolve_config(settings);
      const std::string out =
          preset_out.empty() ? "runs/" + preset_name : preset_out;
      print_summary(apart::run_seeds(cfg, out));
    } else if (*eval) {
      apart::ExperimentConfig cfg = apart::checkpoint_config(checkpoint);
      cfg.eval_rollouts = eval_rollouts;
      apart::Trainer trainer(cfg);
      trainer.load_checkpoint(checkpoint);
      const apart::EvalRecord rec = trainer.evaluate();
      std::cout << apart::metrics_csv_header(cfg.horizon) << "\n"
                << apart::metrics_csv_row(rec) << "\n";
    } else if (*baseline) {
      const apart::GridEnv env = apart::build_env(
          apart::parse_env_name(baseline_env), baseline_horizon);
      apart::Rng rng = apart::make_stream(baseline_seed, "eval");
      const double mean = apart::random_walk_baseline(
          env, baseline_latents, baseline_episodes, rng);
      std::printf("env=%s latents=%d horizon=%d episodes=%d mean_effective=%.4f\n",
                  baseline_env.c_str(), baseline_latents, baseline_horizon,
                  baseline_episodes, mean);
    } else if (*env_cmd) {
      const apart::GridEnv env =
          apart::build_env(apart::parse_env_name(env_name));
      std::cout << env.ascii() << "free states: " << env.num_free() << "\n";
    } else if (*list) {
      for (const auto& name : apart::preset_names()) {
        std::printf("%-18s %s\n", name.c_str(),
                    apart::preset_description(name).c_str());
      }
    }
  } catch (const apart::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
